// gratetile_cli.cpp — Command-line driver
// =============================================================================
//
//   gratetile gen       generate a synthetic sparse feature map (.grtt)
//   gratetile simulate  bandwidth report for one layer, CSV rows per mode
//   gratetile sweep     full (layer x platform x mode x seed) benchmark matrix
//
// Exit codes: 0 ok, 2 argument error, 3 input/format error,
//             4 simulation configuration error.
//
// =============================================================================
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "gratetile/io.hpp"
#include "gratetile/report.hpp"

namespace gt = gratetile;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitArgument = 2;
constexpr int kExitInput = 3;
constexpr int kExitConfig = 4;

struct Dims {
    uint32_t h = 0, w = 0, c = 0;
};

Dims parse_dims(const std::string& text) {
    Dims d;
    char sep1 = 0, sep2 = 0;
    std::istringstream in(text);
    if (!(in >> d.h >> sep1 >> d.w >> sep2 >> d.c) || sep1 != 'x' || sep2 != 'x' ||
        !in.eof() || d.h < 1 || d.w < 1 || d.c < 1)
        throw CLI::ValidationError("--dims", "expected HxWxC with positive extents");
    return d;
}

gt::SparsityMode parse_sparsity_mode(const std::string& text) {
    if (text == "iid") return gt::SparsityMode::iid;
    if (text == "blob") return gt::SparsityMode::blob;
    throw CLI::ValidationError("--mode", "expected iid or blob");
}

std::vector<gt::PlatformProfile> parse_platforms(const std::string& text) {
    if (text == "small") return {gt::small_platform()};
    if (text == "large") return {gt::large_platform()};
    if (text == "both") return {gt::small_platform(), gt::large_platform()};
    throw CLI::ValidationError("--platform", "expected small, large or both");
}

gt::codec::Codec parse_codec(const std::string& text) {
    if (text == "bitmask") return gt::codec::Codec::bitmask;
    if (text == "zrlc") return gt::codec::Codec::zrlc;
    if (text == "raw") return gt::codec::Codec::raw;
    throw CLI::ValidationError("--codec", "expected bitmask, zrlc or raw");
}

// =============================================================================
// gen
// =============================================================================

struct GenArgs {
    std::string dims;
    double sparsity = 0.7;
    uint64_t seed = 42;
    std::string mode = "iid";
    uint32_t blob_radius = 3;
    std::string out;
};

int run_gen(const GenArgs& args) {
    const Dims dims = parse_dims(args.dims);
    gt::SparsityModel model;
    model.mode = parse_sparsity_mode(args.mode);
    model.zero_fraction = args.sparsity;
    model.seed = args.seed;
    model.blob_radius = args.blob_radius;

    const gt::FeatureMap map = gt::generate_feature_map(dims.h, dims.w, dims.c, model);
    try {
        gt::store_feature_map(map, args.out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    std::cerr << "wrote " << args.out << " (" << dims.h << "x" << dims.w << "x" << dims.c
              << ", zero fraction " << gt::report::format_ratio(gt::zero_fraction(map))
              << ")\n";
    return kExitOk;
}

// =============================================================================
// simulate
// =============================================================================

struct SimulateArgs {
    std::string map_path;
    bool synthetic = false;
    std::string dims;
    double sparsity = 0.7;
    uint64_t seed = 42;
    std::string sparsity_mode = "iid";
    uint32_t blob_radius = 3;

    std::string catalog_path;
    std::string layer_id;
    uint32_t kernel = 3;
    uint32_t stride = 1;
    uint32_t dilation = 1;

    std::string platform = "both";
    std::string mode = "all";
    std::string codec = "bitmask";
    std::string csv_path;
    bool baseline_exact = false;
};

int run_simulate(const SimulateArgs& args) {
    if (!args.map_path.empty() && args.synthetic)
        throw CLI::ValidationError("--synthetic", "cannot combine --map with --synthetic");
    const auto platforms = parse_platforms(args.platform);
    const auto codec = parse_codec(args.codec);

    // Resolve the layer: a catalog entry by id, or ad-hoc kernel parameters.
    gt::CatalogEntry entry;
    if (!args.layer_id.empty()) {
        const std::string path =
            args.catalog_path.empty() ? gt::bundled_catalog_path() : args.catalog_path;
        std::optional<gt::CatalogEntry> found;
        for (const auto& e : gt::load_layer_catalog(path))
            if (e.id() == args.layer_id || e.layer == args.layer_id) found = e;
        if (!found) {
            std::cerr << "error: layer '" << args.layer_id << "' not found in " << path
                      << "\n";
            return kExitInput;
        }
        entry = *found;
    } else {
        if (args.kernel % 2 == 0)
            throw CLI::ValidationError("--kernel", "kernel size must be odd");
        entry.network = "custom";
        entry.layer = "k" + std::to_string(args.kernel) + "s" + std::to_string(args.stride) +
                      "d" + std::to_string(args.dilation);
        entry.kernel = args.kernel;
        entry.stride = args.stride;
        entry.dilation = args.dilation;
        if (args.map_path.empty()) {
            const Dims dims = parse_dims(args.dims);
            entry.height = dims.h;
            entry.width = dims.w;
            entry.channels = dims.c;
        }
    }

    gt::FeatureMap map;
    if (!args.map_path.empty()) {
        map = gt::load_feature_map(args.map_path);
        if (entry.height != 0 && (map.height != entry.height || map.width != entry.width ||
                                  map.channels != entry.channels)) {
            std::cerr << "error: map dimensions " << map.height << "x" << map.width << "x"
                      << map.channels << " do not match the layer's " << entry.height << "x"
                      << entry.width << "x" << entry.channels << "\n";
            return kExitInput;
        }
        entry.height = map.height;
        entry.width = map.width;
        entry.channels = map.channels;
    } else {
        gt::SparsityModel model;
        model.mode = parse_sparsity_mode(args.sparsity_mode);
        model.zero_fraction = args.sparsity;
        model.seed = args.seed;
        model.blob_radius = args.blob_radius;
        map = gt::generate_feature_map(entry.height, entry.width, entry.channels, model);
    }
    if (map.channels % gt::kChannelBlock != 0) {
        std::cerr << "error: map channels must be a multiple of 8 for simulation\n";
        return kExitInput;
    }

    std::vector<gt::sim::ModeToken> tokens;
    if (args.mode == "all") {
        tokens.assign(gt::sim::all_mode_tokens().begin(), gt::sim::all_mode_tokens().end());
    } else if (auto token = gt::sim::parse_mode_token(args.mode)) {
        tokens = {*token};
    } else {
        throw CLI::ValidationError("--mode", "unknown division mode '" + args.mode + "'");
    }

    std::vector<gt::sim::FetchReport> reports;
    for (const auto& platform : platforms) {
        const gt::LayerConfig layer = gt::sim::make_layer_config(entry, platform);
        for (auto token : tokens) {
            const auto mode = gt::sim::division_mode_for(token, layer);
            if (!mode) {
                std::cerr << "note: " << gt::sim::to_string(token) << " on "
                          << platform.name
                          << " skipped (tile smaller than the division period)\n";
                if (tokens.size() == 1) return kExitConfig;
                continue;
            }
            gt::sim::SimOptions options;
            options.baseline_exact = args.baseline_exact;
            auto report =
                gt::sim::simulate_layer(map, layer, platform, *mode, codec, options);
            report.network = entry.network;
            report.layer = entry.layer;
            reports.push_back(std::move(report));
        }
    }

    if (args.csv_path.empty()) {
        gt::report::write_simulate_csv(std::cout, reports);
    } else {
        std::ofstream out(args.csv_path, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot open " << args.csv_path << "\n";
            return kExitInput;
        }
        gt::report::write_simulate_csv(out, reports);
    }
    return kExitOk;
}

// =============================================================================
// sweep
// =============================================================================

struct SweepArgs {
    std::string catalog_path;
    std::string platform = "both";
    double sparsity = 0.7;
    std::string sparsity_mode = "iid";
    uint32_t blob_radius = 3;
    uint32_t seeds = 3;
    uint64_t seed = 42;
    std::string codec = "bitmask";
    std::string out_dir;
    uint32_t jobs = 0;
    bool baseline_exact = false;
};

int run_sweep_cmd(const SweepArgs& args) {
    const std::string path =
        args.catalog_path.empty() ? gt::bundled_catalog_path() : args.catalog_path;
    const auto catalog = gt::load_layer_catalog(path);

    gt::report::SweepOptions options;
    options.platforms = parse_platforms(args.platform);
    options.sparsity = args.sparsity;
    options.sparsity_mode = parse_sparsity_mode(args.sparsity_mode);
    options.blob_radius = args.blob_radius;
    options.seed_count = args.seeds;
    options.base_seed = args.seed;
    options.codec = parse_codec(args.codec);
    options.baseline_exact = args.baseline_exact;
    options.jobs = args.jobs;

    const auto result = gt::report::run_sweep(catalog, options);

    fs::create_directories(args.out_dir);
    auto write_file = [&](const std::string& name, auto writer) {
        std::ofstream out(fs::path(args.out_dir) / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open output file: " + name);
        writer(out);
    };
    write_file("layers.csv",
               [&](std::ostream& out) { gt::report::write_layers_csv(out, result); });
    write_file("summary.csv",
               [&](std::ostream& out) { gt::report::write_summary_csv(out, result); });
    write_file("summary.md",
               [&](std::ostream& out) { gt::report::write_summary_markdown(out, result); });

    for (const auto& note : result.notes) std::cerr << "note: " << note << "\n";
    for (const auto& failure : result.failures) std::cerr << "error: " << failure << "\n";
    std::cerr << "wrote " << (fs::path(args.out_dir) / "layers.csv").string() << ", "
              << "summary.csv, summary.md (" << result.rows.size() << " cells)\n";
    return result.failures.empty() ? kExitOk : kExitConfig;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse feature-map tiling and DRAM-bandwidth simulation"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic sparse feature map");
    gen_cmd->add_option("--dims", gen.dims, "Map dimensions HxWxC")->required();
    gen_cmd->add_option("--sparsity", gen.sparsity, "Target zero fraction in [0,1]")
        ->check(CLI::Range(0.0, 1.0));
    gen_cmd->add_option("--seed", gen.seed, "RNG seed");
    gen_cmd->add_option("--mode", gen.mode, "Sparsity pattern: iid or blob");
    gen_cmd->add_option("--blob-radius", gen.blob_radius, "Blob disc radius (blob mode)");
    gen_cmd->add_option("--out", gen.out, "Output .grtt path")->required();

    SimulateArgs simulate;
    auto* sim_cmd = app.add_subcommand("simulate", "Simulate one layer's fetch traffic");
    sim_cmd->add_option("--map", simulate.map_path, "Input .grtt feature map");
    sim_cmd->add_flag("--synthetic", simulate.synthetic, "Generate the input on the fly");
    sim_cmd->add_option("--dims", simulate.dims, "Synthetic map dimensions HxWxC");
    sim_cmd->add_option("--sparsity", simulate.sparsity, "Synthetic zero fraction")
        ->check(CLI::Range(0.0, 1.0));
    sim_cmd->add_option("--seed", simulate.seed, "Synthetic RNG seed");
    sim_cmd->add_option("--sparsity-mode", simulate.sparsity_mode, "iid or blob");
    sim_cmd->add_option("--blob-radius", simulate.blob_radius, "Blob disc radius");
    sim_cmd->add_option("--catalog", simulate.catalog_path, "Layer catalog path");
    sim_cmd->add_option("--layer", simulate.layer_id,
                        "Catalog layer id (network/layer or layer)");
    sim_cmd->add_option("--kernel", simulate.kernel, "Kernel size (odd), ad-hoc layers");
    sim_cmd->add_option("--stride", simulate.stride, "Stride, ad-hoc layers");
    sim_cmd->add_option("--dilation", simulate.dilation, "Dilation, ad-hoc layers");
    sim_cmd->add_option("--platform", simulate.platform, "small, large or both");
    sim_cmd->add_option("--mode", simulate.mode,
                        "grate4|grate8|grate16|u8|u4|u2|u1|all");
    sim_cmd->add_option("--codec", simulate.codec, "bitmask, zrlc or raw");
    sim_cmd->add_option("--csv", simulate.csv_path, "CSV output path (default stdout)");
    sim_cmd->add_flag("--baseline-exact", simulate.baseline_exact,
                      "Charge exact baseline bytes instead of whole lines");

    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run the full benchmark matrix");
    sweep_cmd->add_option("--catalog", sweep.catalog_path, "Layer catalog path");
    sweep_cmd->add_option("--platform", sweep.platform, "small, large or both");
    sweep_cmd->add_option("--sparsity", sweep.sparsity, "Zero fraction")
        ->check(CLI::Range(0.0, 1.0));
    sweep_cmd->add_option("--sparsity-mode", sweep.sparsity_mode, "iid or blob");
    sweep_cmd->add_option("--blob-radius", sweep.blob_radius, "Blob disc radius");
    sweep_cmd->add_option("--seeds", sweep.seeds, "Number of seeds")->check(CLI::Range(1, 64));
    sweep_cmd->add_option("--seed", sweep.seed, "Base seed");
    sweep_cmd->add_option("--codec", sweep.codec, "bitmask, zrlc or raw");
    sweep_cmd->add_option("--out", sweep.out_dir, "Output directory")->required();
    sweep_cmd->add_option("--jobs", sweep.jobs, "Worker threads (0 = auto)");
    sweep_cmd->add_flag("--baseline-exact", sweep.baseline_exact,
                        "Charge exact baseline bytes instead of whole lines");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitArgument;
    }

    try {
        if (gen_cmd->parsed()) return run_gen(gen);
        if (sim_cmd->parsed()) return run_simulate(simulate);
        if (sweep_cmd->parsed()) return run_sweep_cmd(sweep);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitArgument;
    } catch (const gt::ConfigurationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const gt::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitArgument;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}
