// report.hpp — Sweep driver and CSV / markdown report emission
// =============================================================================
//
// Runs the (layer × platform × mode × seed) simulation matrix over a layer
// catalog and aggregates results:
//
//   layers.csv  — one row per simulated cell
//   summary.csv — per (platform, mode): geometric-mean savings over layers,
//                 seeds averaged arithmetically first
//   summary.md  — the same summary as a markdown table, one row per mode,
//                 with/without-overhead columns per platform
//
// Summaries are computed from the 6-decimal values written to layers.csv,
// so recomputing them from the file reproduces summary.csv exactly.  Cells
// run concurrently; results are assembled in a fixed order, so output files
// are byte-identical across runs for the same flags.
//
// =============================================================================
#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "gratetile/simulator.hpp"

namespace gratetile::report {

struct SweepOptions {
    std::vector<PlatformProfile> platforms;   // empty -> {small, large}
    double sparsity = 0.7;
    SparsityMode sparsity_mode = SparsityMode::iid;
    uint32_t blob_radius = 3;
    uint32_t seed_count = 3;
    uint64_t base_seed = 42;
    codec::Codec codec = codec::Codec::bitmask;
    bool baseline_exact = false;
    uint32_t jobs = 0;                        // 0 -> hardware concurrency
};

struct SweepRow {
    sim::FetchReport report;
    uint64_t seed = 0;
};

struct SummaryRow {
    std::string platform;
    sim::ModeToken mode = sim::ModeToken::u8;
    uint32_t layer_count = 0;
    sim::Summary summary;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<SummaryRow> summary;
    std::vector<std::string> notes;     // skipped (layer, platform, mode) cells
    std::vector<std::string> failures;  // per-cell errors; empty on success
};

SweepResult run_sweep(const std::vector<CatalogEntry>& catalog,
                      const SweepOptions& options);

/// Ratio formatted as a 6-decimal fraction ('.' decimal separator).
std::string format_ratio(double value);

/// The value that a 6-decimal CSV field round-trips to.
double csv_rounded(double value);

void write_simulate_csv(std::ostream& out, const std::vector<sim::FetchReport>& reports);
void write_layers_csv(std::ostream& out, const SweepResult& result);
void write_summary_csv(std::ostream& out, const SweepResult& result);
void write_summary_markdown(std::ostream& out, const SweepResult& result);

} // namespace gratetile::report
