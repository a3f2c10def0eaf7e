#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shadow/hamiltonian.hpp"
#include "shadow/optimizer.hpp"
#include "shadow/pauli.hpp"
#include "shadow/snapshots.hpp"

namespace shadow {

struct GroundState {
    int sites = 0;
    double energy = 0.0;
    Eigen::VectorXcd vector; // length 2^L, unit norm
    bool degenerate = false; // second eigenvalue within 1e-6
    double gap = 0.0;        // E1 - E0 from the Krylov spectrum
};

/// Lowest eigenpair of H by matrix-free Lanczos with full
/// reorthogonalization (bit-twiddling Pauli action on basis states, no
/// matrix is ever assembled). Envelope L <= 14; residual target 1e-8.
GroundState ground_state(const HamiltonianSpec& h, std::uint64_t seed = 1234);

/// Matrix-free y += coeff * P x over the 2^L computational basis.
void apply_pauli(const PauliString& p, double coeff, const Eigen::VectorXcd& x,
                 Eigen::VectorXcd& y);

/// <v|P|v>; real for Hermitian P up to rounding.
double exact_expectation(const GroundState& gs, const PauliString& p);

struct ErrorReport {
    double energy_density_error = 0.0;          // |H_est - <H>| / L, raw
    double energy_density_error_rescaled = 0.0; // with the f-rescaled estimate
    std::map<int, double> rms_error_by_weight;  // contiguous weight-k families
    struct Row {
        std::string op;
        int weight = 0;
        double exact = 0.0;
        double estimated = 0.0;
        double rescaled = 0.0;
    };
    std::vector<Row> table;
};

/// Compare bag estimates against the exact ground state: energy-density
/// error plus, for every requested weight k, the RMS error over the
/// contiguous weight-k family using f-rescaled estimates, with the full
/// per-operator table.
ErrorReport error_report(const SnapshotBag& bag, const GroundState& gs,
                         const HamiltonianSpec& h, double f,
                         const std::vector<int>& weights = {2, 5}, int threads = 0);

struct FloorSample {
    int count = 0; // N
    int sites = 0; // L
    double lambda_min = 0.0;
};

/// Least-squares fit of lambda_min * sqrt(N) = b0 - alpha0 * L. Requires
/// at least two distinct L and two distinct N among the samples.
EigenFloor fit_eigen_floor(const std::vector<FloorSample>& samples);

/// Residual sigma sqrt(SSR / (n - 2)) of the fit above.
double fit_residual_sigma(const std::vector<FloorSample>& samples, const EigenFloor& floor);

/// ceil(3^k ln(M) / eps^2): snapshot budget from the shadow-tomography
/// scaling estimate.
long long shadow_budget(int k, long long m, double eps);

} // namespace shadow
