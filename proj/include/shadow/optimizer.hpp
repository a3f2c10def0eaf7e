#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shadow/corrmat.hpp"
#include "shadow/hamiltonian.hpp"
#include "shadow/snapshots.hpp"
#include "shadow/spectral.hpp"

namespace shadow {

/// Random-matrix floor parameters for the smallest eigenvalue of an
/// unoptimized correlation matrix.
struct EigenFloor {
    double alpha0 = 70.0;
    double b0 = 340.0;
};

/// Hyperparameters of the two-phase optimization. Zero mu0 means
/// "derive 5e-2 / N_{P:w<=2} from the basis size"; zero g means "derive
/// (L sum_m |c_m|)^{-1} from the Hamiltonian".
struct ScheduleParams {
    int epochs = 300;            // T
    double mu0 = 0.0;            // barrier strength at t = 0
    double g = 0.0;              // energy-cost scale
    double x_eps_target = 0.03;  // final constraint relaxation scale
    double lr0 = 0.05;
    double adam_eps = 1e-8;
    double backoff_factor = 0.9;
    double grad_ratio_cap = 1.5;
    double preopt_gap = 0.1;
    int preopt_step_limit = 2000;
    int retry_cap = 50;
    int threads = 0;

    void validate() const;
};

/// One row of the convergence trace; values describe the iterate after
/// the epoch's accepted step (epoch 0 is the phase's initial state).
struct EpochRecord {
    int epoch = 0;
    double cost = 0.0;
    double energy = 0.0;
    double lambda_min = 0.0;
    double lr = 0.0;
    double mu = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;
    double x_eps = 0.0;
};

enum class OptimizerPhase { Preopt, Main, Done };

struct OptimizerState {
    int epoch = 0;
    double lr = 0.0;
    std::vector<double> m; // first moment, count x sites
    std::vector<double> v; // second moment
    double x_eps = 0.0;
    OptimizerPhase phase = OptimizerPhase::Preopt;
    std::vector<EpochRecord> history;
};

/// (b0 - alpha0 (L + 2)) / sqrt(N): the state-dependence-padded eigenvalue
/// floor used for the optimization constraint (negative for L >= 3 with
/// default floor parameters).
double epsilon0(int count, int sites, const EigenFloor& floor);

/// eps = x_eps * |epsilon0|; the feasible region is lambda_min(M) > -eps.
double barrier_shift(int count, int sites, double x_eps, const EigenFloor& floor);

/// mu(t) = (1/4) mu0 [1 + cos(pi t / (4/3 T + 1))]^2, strictly decreasing
/// on [0, T].
double mu_schedule(int t, int epochs, double mu0);

/// (beta1, beta2)(t) with tau = t / (4/3 T):
/// beta1 = 0.6 + ((tau - 1/2)^2/2 - 1/8)(-2.8),
/// beta2 = 0.85 + ((tau - 1/2)^2/2 - 1/8)(-1.192).
std::pair<double, double> beta_schedules(int t, int epochs);

/// g = (L sum_m |c_m|)^{-1}, evaluated as the reciprocal of the summed
/// absolute coefficients of the full (all-sites) term list.
double g_coefficient(const HamiltonianSpec& h);

struct CostGrad {
    double cost = 0.0;
    double energy = 0.0;
    double lambda_min = 0.0;
    std::vector<double> grad;         // combined, count x sites
    std::vector<double> energy_grad;  // g-scaled
    std::vector<double> barrier_grad; // mu-scaled, after any cap
    double mean_abs_energy_grad = 0.0;
    double mean_abs_barrier_grad = 0.0;
    bool cap_applied = false;
};

/// Full cost f = g*H - mu Tr log(M + eps I) and its analytic gradient.
/// The barrier gradient is evaluated as an element-wise contraction of
/// (M + eps I)^{-1} against the sparse derivative of M. When
/// grad_ratio_cap > 0 and the energy gradient is nonzero, a barrier
/// gradient whose mean magnitude exceeds cap * (energy mean magnitude) is
/// rescaled onto the cap. Throws BarrierDomainError on an infeasible
/// iterate.
CostGrad cost_and_grad(const SnapshotBag& bag, const HamiltonianSpec& h, ProductCache& cache,
                       double g, double mu, double eps, double grad_ratio_cap = 0.0,
                       int threads = 0);

/// Barrier-only descent from a fresh (theta = 0) bag: raises
/// lambda_min(M) above x_eps_target * epsilon0 while the dynamic
/// relaxation keeps lambda_min - x_eps(t) epsilon0 = preopt_gap.
/// Mutates bag.theta. trace_ham, when given, only fills the energy column
/// of the history.
OptimizerState preoptimize(SnapshotBag& bag, ProductCache& cache, const ScheduleParams& params,
                           const EigenFloor& floor,
                           const HamiltonianSpec* trace_ham = nullptr);

/// Main phase: epochs 0..T of adaptive-moment descent on the full cost
/// with the mu/beta schedules, learning-rate backoff on infeasible steps
/// and fresh moments at entry. Requires a preoptimized bag (entry iterate
/// feasible at the target relaxation).
OptimizerState optimize(SnapshotBag& bag, const HamiltonianSpec& h, ProductCache& cache,
                        const ScheduleParams& params, const EigenFloor& floor);

/// Amplitude correction f = (H^2 estimate) / (H estimate)^2; reported
/// Pauli observables other than the identity are rescaled by f.
double amplitude_factor(const SnapshotBag& bag, const HamiltonianSpec& h, int threads = 0);

} // namespace shadow
