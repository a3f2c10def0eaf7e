#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "shadow/config.hpp"
#include "shadow/exact.hpp"

namespace shadow {

/// End-to-end optimization pipeline: Haar bag, pre-optimization, main
/// optimization, amplitude factor, correlator estimates. Writes a
/// self-describing run directory (manifest, traces, checkpoint,
/// correlator CSVs, correlation-matrix export) and returns the headline
/// numbers.
struct OptimizeOutcome {
    std::string run_dir;
    double f = 1.0;
    double final_energy = 0.0;
    double final_lambda_min = 0.0;
    double eps = 0.0;
    int preopt_steps = 0;
    OptimizerState preopt_state;
    OptimizerState main_state;
};
OptimizeOutcome run_optimize(const RunConfig& config);

/// Exact-diagonalization pipeline: ground energy, all weight-<=2
/// correlators plus the contiguous families of the configured report
/// weights. Writes exact.csv + exact_meta.json under out_dir.
struct ExactOutcome {
    std::string out_dir;
    double energy = 0.0;
    bool degenerate = false;
};
ExactOutcome run_exact(const RunConfig& config);

/// Compare an optimization run directory against an exact table. Refuses
/// on model-hash or L mismatch. Writes error_report.json,
/// per_operator.csv and zz_xx.csv under <run_dir>/compare.
struct CompareOutcome {
    std::string out_dir;
    double energy_density_error = 0.0;
    double energy_density_error_rescaled = 0.0;
    std::map<int, double> rms_by_weight;
    std::map<int, double> shadow_reference_error; // sqrt(3^k ln M_k / N)
};
CompareOutcome run_compare(const std::string& run_dir, const std::string& exact_dir);

/// Born-sample |0...0> shadows over the (L, N) grid, assemble M, collect
/// lambda_min, fit the eigenvalue-floor ansatz. Writes floor.json and
/// floor_samples.csv under out_dir.
struct FloorFitOutcome {
    std::string out_dir;
    EigenFloor floor;
    double residual_sigma = 0.0;
    std::vector<FloorSample> samples;
};
FloorFitOutcome run_floor_fit(const std::vector<int>& site_list,
                              const std::vector<int>& snapshot_list, std::uint64_t seed,
                              const std::string& out_dir, int threads = 0);

/// Independent optimize+compare runs over (N, seed) combinations with a
/// shared exact table; emits sweep_summary.csv under the base out_dir.
struct SweepOutcome {
    std::string summary_csv;
    std::vector<std::string> run_dirs;
};
SweepOutcome run_sweep(const RunConfig& base, const std::vector<int>& snapshot_list,
                       const std::vector<std::uint64_t>& seeds, int workers = 1);

} // namespace shadow
