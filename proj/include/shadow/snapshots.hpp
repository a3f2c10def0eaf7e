#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "shadow/pauli.hpp"

namespace shadow {

/// Rows of the sampled single-qubit rotation that enter the measurement
/// axis: uY and uZ over the axes (X, Y, Z). The identity row is the
/// implicit delta and is never stored; the uX row never enters.
struct RotationCoeffs {
    std::array<double, 3> uY{};
    std::array<double, 3> uZ{};
};

/// Haar angles (phi, omega, alpha) -> rotation coefficient rows.
RotationCoeffs rotation_coeffs(double phi, double omega, double alpha);

/// Measurement axis n(theta): n_a = -sin(theta) uY_a + cos(theta) uZ_a.
/// Always a unit vector, for any real theta.
std::array<double, 3> bloch_vector(const RotationCoeffs& c, double theta);

/// d n(theta) / d theta = -(cos(theta) uY + sin(theta) uZ).
std::array<double, 3> bloch_vector_deriv(const RotationCoeffs& c, double theta);

/// Bag of N parametrized snapshots over L sites. The per-(site, snapshot)
/// rotations are drawn once from the Haar ensemble and stay fixed; only
/// theta is optimized. Angles and coefficients are a pure function of
/// (seed, N, L): regenerating with the same seed reproduces them
/// bit-exactly.
///
/// RNG stream: sub-stream "haar" of the master seed, consumed as
/// (l outer, j inner), three uniforms gamma0, gamma1, gamma3 on [-1, 1)
/// per pair, mapped to (phi, omega, alpha) = (pi g0, pi g1, arccos g3).
struct SnapshotBag {
    int sites = 0;
    int count = 0;
    std::uint64_t seed = 0;
    std::vector<double> theta;  // count x sites, row-major (l, j)
    std::vector<double> angles; // count x sites x 3: (phi, omega, alpha)
    std::vector<double> rot;    // count x sites x 6: uY[3], uZ[3]

    double theta_at(int l, int j) const { return theta[idx(l, j)]; }
    double& theta_at(int l, int j) { return theta[idx(l, j)]; }

    RotationCoeffs coeffs_at(int l, int j) const {
        const double* r = rot.data() + 6 * idx(l, j);
        return {{r[0], r[1], r[2]}, {r[3], r[4], r[5]}};
    }

    std::array<double, 3> angles_at(int l, int j) const {
        const double* a = angles.data() + 3 * idx(l, j);
        return {a[0], a[1], a[2]};
    }

    std::size_t idx(int l, int j) const {
        return static_cast<std::size_t>(l) * static_cast<std::size_t>(sites) +
               static_cast<std::size_t>(j);
    }
};

/// Fresh bag with Haar-sampled rotations and theta identically zero.
SnapshotBag sample_haar(std::uint64_t seed, int count, int sites);

/// Product state, one single-qubit ket per site. Entanglement is outside
/// the design envelope; the type enforces product form.
struct ProductState {
    std::vector<std::array<std::complex<double>, 2>> site_kets;

    static ProductState all_zeros(int sites) {
        ProductState s;
        s.site_kets.assign(static_cast<std::size_t>(sites), {std::complex<double>(1.0, 0.0),
                                                             std::complex<double>(0.0, 0.0)});
        return s;
    }
    int sites() const { return static_cast<int>(site_kets.size()); }
};

/// Simulate the classical-shadow experiment on a product state: Haar
/// rotations from sub-stream "haar", measurement outcomes from sub-stream
/// "born" (one uniform per (l, j), same l-outer/j-inner order). Outcome 0
/// sets theta = 0, outcome 1 sets theta = pi. For input |0>, p(outcome 0)
/// = cos^2(alpha/2).
SnapshotBag born_sample(const ProductState& state, std::uint64_t seed, int count, int sites);

/// Tr(rho_l P) = 3^w(P) * prod_{j in supp P} n_{j,l}(theta_{j,l})_{a_j};
/// exactly 1 for the identity string.
double snapshot_expectation(const SnapshotBag& bag, int l, const PauliString& p);

/// d/d theta_{j,l} of snapshot_expectation; zero when P acts trivially
/// at the site.
double snapshot_expectation_grad(const SnapshotBag& bag, int l, int site, const PauliString& p);

/// (1/N) sum_l Tr(rho_l P), reduced over fixed snapshot blocks so the
/// result is identical for any worker count.
double estimate(const SnapshotBag& bag, const PauliString& p, int threads = 0);

/// Empirical standard error of estimate(): sample std of the per-snapshot
/// values divided by sqrt(N).
double estimate_stderr(const SnapshotBag& bag, const PauliString& p);

} // namespace shadow
