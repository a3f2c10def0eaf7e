#pragma once

#include <stdexcept>
#include <string>

namespace shadow {

/// Bad input that should be caught before any heavy computation starts
/// (config fields, dimension mismatches, violated preconditions).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterate left the domain of the log-barrier: some eigenvalue of
/// M + eps*I is non-positive. Signals the optimizer to back off.
class BarrierDomainError : public std::runtime_error {
public:
    explicit BarrierDomainError(double lambda_min, double eps)
        : std::runtime_error("log-barrier domain violated: lambda_min + eps = " +
                             std::to_string(lambda_min + eps)),
          lambda_min_(lambda_min), eps_(eps) {}
    double lambda_min() const noexcept { return lambda_min_; }
    double eps() const noexcept { return eps_; }

private:
    double lambda_min_;
    double eps_;
};

/// Iterative numerics failed to converge (Lanczos, pre-optimization, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The learning-rate backoff loop hit its retry cap without finding a
/// feasible step. Carries the epoch at which the run stalled; the full
/// history stays inside the OptimizerState owned by the caller.
class StalledOptimizationError : public std::runtime_error {
public:
    StalledOptimizationError(int epoch, double lr)
        : std::runtime_error("optimization stalled at epoch " + std::to_string(epoch) +
                             " (learning rate decayed to " + std::to_string(lr) + ")"),
          epoch_(epoch), lr_(lr) {}
    int epoch() const noexcept { return epoch_; }
    double lr() const noexcept { return lr_; }

private:
    int epoch_;
    double lr_;
};

} // namespace shadow
