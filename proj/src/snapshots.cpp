#include "shadow/snapshots.hpp"

#include <cmath>

#include "shadow/errors.hpp"
#include "shadow/parallel.hpp"
#include "shadow/rng.hpp"

namespace shadow {

RotationCoeffs rotation_coeffs(double phi, double omega, double alpha) {
    const double cp = std::cos(phi), sp = std::sin(phi);
    const double co = std::cos(omega), so = std::sin(omega);
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    RotationCoeffs c;
    c.uY = {co * sp + ca * cp * so, cp * co - ca * sp * so, sa * so};
    c.uZ = {-cp * sa, sa * sp, ca};
    return c;
}

std::array<double, 3> bloch_vector(const RotationCoeffs& c, double theta) {
    const double st = std::sin(theta), ct = std::cos(theta);
    return {-st * c.uY[0] + ct * c.uZ[0],
            -st * c.uY[1] + ct * c.uZ[1],
            -st * c.uY[2] + ct * c.uZ[2]};
}

std::array<double, 3> bloch_vector_deriv(const RotationCoeffs& c, double theta) {
    const double st = std::sin(theta), ct = std::cos(theta);
    return {-(ct * c.uY[0] + st * c.uZ[0]),
            -(ct * c.uY[1] + st * c.uZ[1]),
            -(ct * c.uY[2] + st * c.uZ[2])};
}

namespace {

SnapshotBag make_bag(std::uint64_t seed, int count, int sites) {
    if (count < 1 || sites < 2)
        throw ValidationError("snapshot bag requires N >= 1 and L >= 2");
    SnapshotBag bag;
    bag.sites = sites;
    bag.count = count;
    bag.seed = seed;
    const std::size_t nl = static_cast<std::size_t>(count) * static_cast<std::size_t>(sites);
    bag.theta.assign(nl, 0.0);
    bag.angles.resize(3 * nl);
    bag.rot.resize(6 * nl);

    RngStream haar(seed, "haar");
    for (std::size_t i = 0; i < nl; ++i) {
        const double g0 = haar.uniform_pm1();
        const double g1 = haar.uniform_pm1();
        const double g3 = haar.uniform_pm1();
        const double phi = M_PI * g0;
        const double omega = M_PI * g1;
        const double alpha = std::acos(g3);
        double* a = bag.angles.data() + 3 * i;
        a[0] = phi;
        a[1] = omega;
        a[2] = alpha;
        const RotationCoeffs c = rotation_coeffs(phi, omega, alpha);
        double* r = bag.rot.data() + 6 * i;
        r[0] = c.uY[0];
        r[1] = c.uY[1];
        r[2] = c.uY[2];
        r[3] = c.uZ[0];
        r[4] = c.uZ[1];
        r[5] = c.uZ[2];
    }
    return bag;
}

} // namespace

SnapshotBag sample_haar(std::uint64_t seed, int count, int sites) {
    return make_bag(seed, count, sites);
}

SnapshotBag born_sample(const ProductState& state, std::uint64_t seed, int count, int sites) {
    if (state.sites() != sites)
        throw ValidationError("born_sample: product state has " + std::to_string(state.sites()) +
                              " sites, expected " + std::to_string(sites));
    SnapshotBag bag = make_bag(seed, count, sites);
    RngStream born(seed, "born");
    for (int l = 0; l < count; ++l)
        for (int j = 0; j < sites; ++j) {
            const auto ang = bag.angles_at(l, j);
            // Row 0 of U(phi, omega, alpha) applied to the site ket:
            // <0|U|psi> = e^{-i(phi+omega)/2} cos(a/2) psi_0
            //           - e^{ i(phi-omega)/2} sin(a/2) psi_1.
            const double half = ang[2] / 2.0;
            const std::complex<double> u00 =
                std::polar(std::cos(half), -(ang[0] + ang[1]) / 2.0);
            const std::complex<double> u01 =
                -std::polar(std::sin(half), (ang[0] - ang[1]) / 2.0);
            const auto& ket = state.site_kets[static_cast<std::size_t>(j)];
            const double p0 = std::norm(u00 * ket[0] + u01 * ket[1]);
            bag.theta_at(l, j) = (born.uniform() < p0) ? 0.0 : M_PI;
        }
    return bag;
}

namespace {

inline double site_factor(const SnapshotBag& bag, int l, int j, Axis a) {
    const auto n = bloch_vector(bag.coeffs_at(l, j), bag.theta_at(l, j));
    return n[static_cast<std::size_t>(a) - 1];
}

} // namespace

double snapshot_expectation(const SnapshotBag& bag, int l, const PauliString& p) {
    if (p.size() != bag.sites)
        throw ValidationError("snapshot_expectation: string length mismatch");
    double prod = 1.0;
    int w = 0;
    for (int j = 0; j < bag.sites; ++j) {
        if (p.at(j) == Axis::I) continue;
        prod *= site_factor(bag, l, j, p.at(j));
        ++w;
    }
    return std::pow(3.0, w) * prod;
}

double snapshot_expectation_grad(const SnapshotBag& bag, int l, int site, const PauliString& p) {
    if (p.size() != bag.sites)
        throw ValidationError("snapshot_expectation_grad: string length mismatch");
    if (p.at(site) == Axis::I) return 0.0;
    double prod = 1.0;
    int w = 0;
    for (int j = 0; j < bag.sites; ++j) {
        if (p.at(j) == Axis::I) continue;
        ++w;
        if (j == site) {
            const auto dn = bloch_vector_deriv(bag.coeffs_at(l, j), bag.theta_at(l, j));
            prod *= dn[static_cast<std::size_t>(p.at(j)) - 1];
        } else {
            prod *= site_factor(bag, l, j, p.at(j));
        }
    }
    return std::pow(3.0, w) * prod;
}

double estimate(const SnapshotBag& bag, const PauliString& p, int threads) {
    if (p.size() != bag.sites)
        throw ValidationError("estimate: string length mismatch");
    const int nblocks = block_count(bag.count);
    std::vector<double> partial(static_cast<std::size_t>(nblocks), 0.0);
    parallel_blocks(nblocks, threads, [&](int b) {
        const int l0 = b * kReduceBlock;
        const int l1 = std::min(bag.count, l0 + kReduceBlock);
        double s = 0.0;
        for (int l = l0; l < l1; ++l) s += snapshot_expectation(bag, l, p);
        partial[static_cast<std::size_t>(b)] = s;
    });
    double total = 0.0;
    for (double s : partial) total += s;
    return total / bag.count;
}

double estimate_stderr(const SnapshotBag& bag, const PauliString& p) {
    double sum = 0.0, sq = 0.0;
    for (int l = 0; l < bag.count; ++l) {
        const double v = snapshot_expectation(bag, l, p);
        sum += v;
        sq += v * v;
    }
    const double n = bag.count;
    const double mean = sum / n;
    const double var = std::max(0.0, sq / n - mean * mean);
    return std::sqrt(var / n);
}

} // namespace shadow
