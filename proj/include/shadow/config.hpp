#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shadow/optimizer.hpp"

namespace shadow {

/// One document collecting every run hyperparameter. Loaded from JSON,
/// overridable by CLI flags, validated before any computation starts.
struct RunConfig {
    std::string model = "main"; // builtin name or path to a model file
    int sites = 8;              // L
    int snapshots = 16384;      // N
    std::uint64_t seed = 1;
    int epochs = 300;           // T
    double x_eps_target = 0.03;
    double lr0 = 0.05;
    double mu0 = 0.0; // 0: derive 5e-2 / N_{P:w<=2}
    double g = 0.0;   // 0: derive (L sum|c|)^{-1}
    double adam_eps = 1e-8;
    double backoff_factor = 0.9;
    double grad_ratio_cap = 1.5;
    double preopt_gap = 0.1;
    int preopt_step_limit = 2000;
    int retry_cap = 50;
    std::vector<int> report_weights = {2, 5};
    EigenFloor floor{};
    std::string out_dir = "runs";
    int threads = 0; // 0: hardware concurrency

    ScheduleParams schedule() const {
        ScheduleParams p;
        p.epochs = epochs;
        p.mu0 = mu0;
        p.g = g;
        p.x_eps_target = x_eps_target;
        p.lr0 = lr0;
        p.adam_eps = adam_eps;
        p.backoff_factor = backoff_factor;
        p.grad_ratio_cap = grad_ratio_cap;
        p.preopt_gap = preopt_gap;
        p.preopt_step_limit = preopt_step_limit;
        p.retry_cap = retry_cap;
        p.threads = threads;
        return p;
    }

    /// Fail-fast validation: rejects anything the library would later
    /// reject. Throws ValidationError.
    void validate() const;
};

RunConfig load_config(const std::string& path);
std::string config_to_json(const RunConfig& c);

} // namespace shadow
