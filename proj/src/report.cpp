#include "gratetile/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include "gratetile/feature_map.hpp"

namespace gratetile::report {

using sim::FetchReport;
using sim::ModeToken;

namespace {

constexpr const char* kEol = "\r\n";   // RFC-4180 line ending

std::string format_percent(double ratio) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", ratio * 100.0);
    return buf;
}

} // namespace

std::string format_ratio(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", value);
    return buf;
}

double csv_rounded(double value) {
    return std::strtod(format_ratio(value).c_str(), nullptr);
}

// =============================================================================
// Sweep driver
// =============================================================================

namespace {

struct Task {
    uint32_t layer_index;
    uint32_t platform_index;
    ModeToken mode;
};

struct TaskResult {
    std::vector<SweepRow> rows;
    std::string note;
    std::string failure;
};

size_t mode_rank(ModeToken mode) {
    const auto tokens = sim::all_mode_tokens();
    for (size_t i = 0; i < tokens.size(); ++i)
        if (tokens[i] == mode) return i;
    return 0;
}

} // namespace

SweepResult run_sweep(const std::vector<CatalogEntry>& catalog,
                      const SweepOptions& options) {
    if (catalog.empty()) throw std::invalid_argument("catalog is empty");
    if (options.seed_count < 1) throw std::invalid_argument("need at least one seed");

    std::vector<PlatformProfile> platforms = options.platforms;
    if (platforms.empty()) platforms = {small_platform(), large_platform()};

    // Maps are pure functions of (dims, model); generate each (layer, seed)
    // once and share across platforms and modes.  The layer index is folded
    // into the seed so layers with identical shapes still get distinct data.
    std::vector<FeatureMap> maps(catalog.size() * options.seed_count);
    std::vector<uint64_t> map_seed(maps.size());
    for (uint32_t li = 0; li < catalog.size(); ++li) {
        for (uint32_t si = 0; si < options.seed_count; ++si) {
            SparsityModel model;
            model.mode = options.sparsity_mode;
            model.zero_fraction = options.sparsity;
            model.blob_radius = options.blob_radius;
            model.seed = options.base_seed + 1000003ull * li + si;
            const auto& e = catalog[li];
            const uint64_t idx = uint64_t(li) * options.seed_count + si;
            maps[idx] = generate_feature_map(e.height, e.width, e.channels, model);
            map_seed[idx] = model.seed;
        }
    }

    std::vector<Task> tasks;
    for (uint32_t li = 0; li < catalog.size(); ++li)
        for (uint32_t pi = 0; pi < platforms.size(); ++pi)
            for (ModeToken mode : sim::all_mode_tokens())
                tasks.push_back({li, pi, mode});

    std::vector<TaskResult> results(tasks.size());
    std::atomic<size_t> next{0};

    auto worker = [&]() {
        for (size_t t = next.fetch_add(1); t < tasks.size(); t = next.fetch_add(1)) {
            const Task& task = tasks[t];
            TaskResult& out = results[t];
            const CatalogEntry& entry = catalog[task.layer_index];
            const PlatformProfile& platform = platforms[task.platform_index];
            try {
                const LayerConfig layer = sim::make_layer_config(entry, platform);
                const auto mode = sim::division_mode_for(task.mode, layer);
                if (!mode) {
                    out.note = entry.id() + " on " + platform.name + ": " +
                               sim::to_string(task.mode) +
                               " skipped (tile smaller than the division period)";
                    continue;
                }
                for (uint32_t si = 0; si < options.seed_count; ++si) {
                    const uint64_t idx =
                        uint64_t(task.layer_index) * options.seed_count + si;
                    sim::SimOptions sim_options;
                    sim_options.baseline_exact = options.baseline_exact;
                    FetchReport report = sim::simulate_layer(
                        maps[idx], layer, platform, *mode, options.codec, sim_options);
                    report.network = entry.network;
                    report.layer = entry.layer;
                    out.rows.push_back({std::move(report), map_seed[idx]});
                }
            } catch (const std::exception& e) {
                out.failure = entry.id() + " on " + platform.name + " " +
                              sim::to_string(task.mode) + ": " + e.what();
            }
        }
    };

    uint32_t jobs = options.jobs ? options.jobs : std::thread::hardware_concurrency();
    jobs = std::max(1u, std::min<uint32_t>(jobs, uint32_t(tasks.size())));
    std::vector<std::thread> pool;
    for (uint32_t j = 0; j + 1 < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& thread : pool) thread.join();

    SweepResult result;
    for (const TaskResult& r : results) {
        for (const SweepRow& row : r.rows) result.rows.push_back(row);
        if (!r.note.empty()) result.notes.push_back(r.note);
        if (!r.failure.empty()) result.failures.push_back(r.failure);
    }

    // Summary: seeds averaged arithmetically per layer, then geometric mean
    // across layers, all on CSV-rounded values so the file reproduces it.
    for (uint32_t pi = 0; pi < platforms.size(); ++pi) {
        for (ModeToken mode : sim::all_mode_tokens()) {
            std::vector<FetchReport> layer_means;
            for (uint32_t li = 0; li < catalog.size(); ++li) {
                double no = 0, with = 0, opt = 0;
                uint32_t n = 0;
                const uint64_t task_index =
                    (uint64_t(li) * platforms.size() + pi) * sim::all_mode_tokens().size() +
                    mode_rank(mode);
                for (const SweepRow& row : results[task_index].rows) {
                    no += csv_rounded(row.report.saving_no_overhead);
                    with += csv_rounded(row.report.saving_with_overhead);
                    opt += csv_rounded(row.report.optimal);
                    ++n;
                }
                if (n == 0) continue;
                FetchReport mean;
                mean.saving_no_overhead = no / n;
                mean.saving_with_overhead = with / n;
                mean.optimal = opt / n;
                layer_means.push_back(mean);
            }
            if (layer_means.empty()) continue;
            SummaryRow row;
            row.platform = platforms[pi].name;
            row.mode = mode;
            row.layer_count = uint32_t(layer_means.size());
            row.summary = sim::aggregate(layer_means);
            result.summary.push_back(row);
        }
    }
    return result;
}

// =============================================================================
// Writers
// =============================================================================

namespace {

void write_report_fields(std::ostream& out, const FetchReport& r) {
    out << r.network << ',' << r.layer << ',' << r.platform << ','
        << sim::to_string(r.mode) << ',' << codec::to_string(r.codec) << ','
        << r.payload_bytes << ',' << r.metadata_bytes << ',' << r.baseline_bytes << ','
        << format_ratio(r.saving_no_overhead) << ','
        << format_ratio(r.saving_with_overhead) << ',' << format_ratio(r.optimal);
}

} // namespace

void write_simulate_csv(std::ostream& out, const std::vector<FetchReport>& reports) {
    out << "network,layer,platform,mode,codec,payload_bytes,metadata_bytes,"
           "baseline_bytes,saving_no_overhead,saving_with_overhead,optimal"
        << kEol;
    for (const FetchReport& r : reports) {
        write_report_fields(out, r);
        out << kEol;
    }
}

void write_layers_csv(std::ostream& out, const SweepResult& result) {
    out << "network,layer,platform,mode,codec,seed,payload_bytes,metadata_bytes,"
           "baseline_bytes,saving_no_overhead,saving_with_overhead,optimal"
        << kEol;
    for (const SweepRow& row : result.rows) {
        const FetchReport& r = row.report;
        out << r.network << ',' << r.layer << ',' << r.platform << ','
            << sim::to_string(r.mode) << ',' << codec::to_string(r.codec) << ','
            << row.seed << ',' << r.payload_bytes << ',' << r.metadata_bytes << ','
            << r.baseline_bytes << ',' << format_ratio(r.saving_no_overhead) << ','
            << format_ratio(r.saving_with_overhead) << ',' << format_ratio(r.optimal)
            << kEol;
    }
}

void write_summary_csv(std::ostream& out, const SweepResult& result) {
    out << "platform,mode,layers,saving_no_overhead,saving_with_overhead,optimal" << kEol;
    for (const SummaryRow& row : result.summary) {
        out << row.platform << ',' << sim::to_string(row.mode) << ',' << row.layer_count
            << ',' << format_ratio(row.summary.saving_no_overhead) << ','
            << format_ratio(row.summary.saving_with_overhead) << ','
            << format_ratio(row.summary.optimal) << kEol;
    }
}

void write_summary_markdown(std::ostream& out, const SweepResult& result) {
    std::vector<std::string> platforms;
    for (const SummaryRow& row : result.summary)
        if (std::find(platforms.begin(), platforms.end(), row.platform) == platforms.end())
            platforms.push_back(row.platform);

    auto find_row = [&](ModeToken mode, const std::string& platform) -> const SummaryRow* {
        for (const SummaryRow& row : result.summary)
            if (row.mode == mode && row.platform == platform) return &row;
        return nullptr;
    };

    uint32_t full_coverage = 0;
    for (const SummaryRow& row : result.summary)
        full_coverage = std::max(full_coverage, row.layer_count);
    auto cell = [&](const SummaryRow* row, bool with_overhead) {
        if (!row) return std::string("-");
        std::string text = format_percent(with_overhead
                                              ? row->summary.saving_with_overhead
                                              : row->summary.saving_no_overhead);
        if (row->layer_count != full_coverage)
            text += " (" + std::to_string(row->layer_count) + "/" +
                    std::to_string(full_coverage) + " layers)";
        return text;
    };

    out << "# Bandwidth saved (%), geometric mean over layers\n\n";
    out << "Savings are relative to the uncompressed tiled baseline; 'optimal'\n"
           "is the zero-word fraction of the synthetic inputs.\n\n";
    out << "| division mode |";
    for (const auto& p : platforms) out << " " << p << " w/o overhead |";
    for (const auto& p : platforms) out << " " << p << " with overhead |";
    out << "\n|---|";
    for (size_t i = 0; i < 2 * platforms.size(); ++i) out << "---|";
    out << "\n";
    for (ModeToken mode : sim::all_mode_tokens()) {
        bool any = false;
        for (const auto& p : platforms) any |= find_row(mode, p) != nullptr;
        if (!any) continue;
        out << "| " << sim::to_string(mode) << " |";
        for (const auto& p : platforms) out << " " << cell(find_row(mode, p), false) << " |";
        for (const auto& p : platforms) out << " " << cell(find_row(mode, p), true) << " |";
        out << "\n";
    }
    if (const SummaryRow* first = result.summary.empty() ? nullptr : &result.summary[0]) {
        out << "\nOptimal (zero fraction) reference: "
            << format_percent(first->summary.optimal) << "%\n";
    }
    if (!result.notes.empty()) {
        out << "\nSkipped cells:\n";
        for (const auto& note : result.notes) out << "- " << note << "\n";
    }
}

} // namespace gratetile::report
