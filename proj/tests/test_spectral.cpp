#include <doctest.h>

#include <cmath>
#include <random>

#include "shadow/errors.hpp"
#include "shadow/spectral.hpp"
#include "support/dense_oracle.hpp"

using namespace shadow;

namespace {

Eigen::MatrixXcd random_hermitian(int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<> g(0.0, 1.0);
    Eigen::MatrixXcd a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = std::complex<double>(g(rng), g(rng));
    return 0.5 * (a + Eigen::MatrixXcd(a.adjoint()));
}

} // namespace

TEST_CASE("eigh on pinned matrices") {
    const auto id = eigh(Eigen::MatrixXcd::Identity(5, 5));
    for (int i = 0; i < 5; ++i) CHECK(id.eigenvalues(i) == doctest::Approx(1.0));

    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(3, 3);
    d(0, 0) = 5.0;
    d(1, 1) = -1.0;
    d(2, 2) = 2.0;
    const auto r = eigh(d);
    CHECK(r.eigenvalues(0) == doctest::Approx(-1.0));
    CHECK(r.eigenvalues(1) == doctest::Approx(2.0));
    CHECK(r.eigenvalues(2) == doctest::Approx(5.0));
}

TEST_CASE("eigh reconstructs, stays unitary, matches the jacobi oracle") {
    const int dim = 50;
    const Eigen::MatrixXcd a = random_hermitian(dim, 2024);
    const auto r = eigh(a);

    // ascending eigenvalues
    for (int i = 1; i < dim; ++i) CHECK(r.eigenvalues(i) >= r.eigenvalues(i - 1));

    // reconstruction and unitarity
    const Eigen::MatrixXcd recon =
        r.eigenvectors * r.eigenvalues.asDiagonal() * r.eigenvectors.adjoint();
    CHECK((recon - a).norm() <= 1e-10 * a.norm());
    CHECK((r.eigenvectors.adjoint() * r.eigenvectors -
           Eigen::MatrixXcd::Identity(dim, dim))
              .norm() < 1e-10);

    // eigenvalue sum equals the trace
    CHECK(r.eigenvalues.sum() == doctest::Approx(a.trace().real()).epsilon(1e-10));

    // independent cyclic-jacobi factorization oracle
    const Eigen::VectorXd jac = oracle::jacobi_eigenvalues(a);
    for (int i = 0; i < dim; ++i)
        CHECK(std::abs(jac(i) - r.eigenvalues(i)) < 1e-9 * std::max(1.0, a.norm()));
}

TEST_CASE("eigh rejects non-hermitian input") {
    Eigen::MatrixXcd a = random_hermitian(6, 3);
    a(0, 1) += std::complex<double>(0.1, 0.2);
    CHECK_THROWS_AS(eigh(a), ValidationError);
    Eigen::MatrixXcd rect(3, 4);
    CHECK_THROWS_AS(eigh(rect), ValidationError);
}

TEST_CASE("trace-log on pinned matrices") {
    CHECK(trace_log_shifted(Eigen::MatrixXcd::Identity(4, 4), 0.0) == doctest::Approx(0.0));

    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = std::exp(1.0) - 1.0;
    CHECK(trace_log_shifted(d, 1.0) == doctest::Approx(std::log(2.0) + 1.0));
}

TEST_CASE("trace-log matches an LU log-determinant oracle") {
    const int dim = 40;
    std::mt19937_64 rng(5);
    const Eigen::MatrixXcd a = random_hermitian(dim, 5);
    const auto r = eigh(a);
    const double eps = -r.eigenvalues(0) + 2.0; // comfortably feasible shift
    const double tl = trace_log_shifted(a, eps);
    // independent route: LU determinant of the shifted matrix
    const Eigen::MatrixXcd shifted =
        a + eps * Eigen::MatrixXcd::Identity(dim, dim);
    const std::complex<double> det = Eigen::PartialPivLU<Eigen::MatrixXcd>(shifted).determinant();
    CHECK(std::abs(det.imag()) < 1e-8 * std::abs(det.real()));
    CHECK(tl == doctest::Approx(std::log(det.real())).epsilon(1e-9));
}

TEST_CASE("trace-log and inverse raise a barrier-domain error when infeasible") {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
    d(0, 0) = -2.0;
    d(1, 1) = 3.0;
    CHECK_THROWS_AS(trace_log_shifted(d, 1.0), BarrierDomainError);
    CHECK_THROWS_AS(inverse_shifted(d, 2.0), BarrierDomainError);
    CHECK_NOTHROW(trace_log_shifted(d, 2.5));
    try {
        trace_log_shifted(d, 1.0);
    } catch (const BarrierDomainError& e) {
        CHECK(e.lambda_min() == doctest::Approx(-2.0));
        CHECK(e.eps() == doctest::Approx(1.0));
    }
}

TEST_CASE("shifted inverse: pinned values and residual") {
    const Eigen::MatrixXcd half = inverse_shifted(Eigen::MatrixXcd::Identity(3, 3), 1.0);
    CHECK((half - 0.5 * Eigen::MatrixXcd::Identity(3, 3)).norm() < 1e-14);

    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(3, 3);
    d(0, 0) = 1.0;
    d(1, 1) = 2.0;
    d(2, 2) = 4.0;
    const Eigen::MatrixXcd invd = inverse_shifted(d, 0.0);
    CHECK(invd(0, 0).real() == doctest::Approx(1.0));
    CHECK(invd(1, 1).real() == doctest::Approx(0.5));
    CHECK(invd(2, 2).real() == doctest::Approx(0.25));

    const int dim = 200;
    const Eigen::MatrixXcd a = random_hermitian(dim, 7);
    const auto r = eigh(a);
    const double eps = -r.eigenvalues(0) + 1.0;
    const Eigen::MatrixXcd w = inverse_shifted(r, eps);
    const Eigen::MatrixXcd residual =
        (a + eps * Eigen::MatrixXcd::Identity(dim, dim)) * w -
        Eigen::MatrixXcd::Identity(dim, dim);
    CHECK(residual.norm() <= 1e-8 * dim);
    // hermitian by construction
    CHECK((w - Eigen::MatrixXcd(w.adjoint())).norm() < 1e-10);
    // consistent with the explicit spectral form
    const Eigen::MatrixXcd spectral =
        r.eigenvectors *
        Eigen::VectorXd((r.eigenvalues.array() + eps).inverse()).asDiagonal() *
        r.eigenvectors.adjoint();
    CHECK((w - spectral).norm() < 1e-9);
}

TEST_CASE("d/d eps of the trace-log equals the trace of the shifted inverse") {
    const Eigen::MatrixXcd a = random_hermitian(30, 11);
    const auto r = eigh(a);
    const double eps = -r.eigenvalues(0) + 0.7;
    const double h = 1e-6;
    const double fd = (trace_log_shifted(r, eps + h) - trace_log_shifted(r, eps - h)) / (2 * h);
    const double an = inverse_shifted(r, eps).trace().real();
    CHECK(std::abs(fd - an) / std::abs(an) < 1e-6);
}
