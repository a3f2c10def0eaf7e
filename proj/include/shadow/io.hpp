#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shadow/optimizer.hpp"
#include "shadow/snapshots.hpp"

namespace shadow {

/// Binary checkpoint: (seed, N, L, theta) plus, when present, the
/// optimizer state. Rotation coefficients are regenerated from the seed
/// on load, bit-exactly.
void save_checkpoint(const std::string& path, const SnapshotBag& bag,
                     const OptimizerState* state = nullptr);

struct Checkpoint {
    SnapshotBag bag;
    std::optional<OptimizerState> state;
};

Checkpoint load_checkpoint(const std::string& path);

/// Convergence-trace CSV with the fixed column set
/// (epoch, cost, energy, energy_density, lambda_min, lr, mu, beta1,
/// beta2, x_eps); energy_density = energy / sites.
void write_trace_csv(const std::string& path, const std::vector<EpochRecord>& history,
                     int sites);

/// Estimate every string of the list in one pass over the bag (Bloch
/// vectors computed once); same fixed-block reduction as estimate().
std::vector<double> estimate_many(const SnapshotBag& bag, const std::vector<PauliString>& ops,
                                  int threads = 0);

void write_correlators_csv(const std::string& path, const std::vector<PauliString>& ops,
                           const std::vector<double>& values);

} // namespace shadow
