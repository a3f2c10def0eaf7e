#include "shadow/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>

#include "shadow/errors.hpp"
#include "shadow/rng.hpp"

namespace shadow {

namespace {

struct CompiledTerm {
    double coeff;
    std::uint32_t flip;        // X and Y sites
    std::uint32_t zmask;       // Y and Z sites: (-1)^{bits}
    std::complex<double> base; // i^{#Y}
};

std::vector<CompiledTerm> compile_terms(const HamiltonianSpec& h) {
    std::vector<CompiledTerm> out;
    out.reserve(h.terms.size());
    for (const auto& t : h.terms) {
        CompiledTerm ct{t.coeff, 0, 0, {1.0, 0.0}};
        int ny = 0;
        for (int j = 0; j < t.op.size(); ++j) {
            switch (t.op.at(j)) {
                case Axis::X: ct.flip |= 1u << j; break;
                case Axis::Y:
                    ct.flip |= 1u << j;
                    ct.zmask |= 1u << j;
                    ++ny;
                    break;
                case Axis::Z: ct.zmask |= 1u << j; break;
                case Axis::I: break;
            }
        }
        ct.base = Phase(ny).value(); // Y|s> = i(-1)^{s_j}|s^1>
        out.push_back(ct);
    }
    return out;
}

void apply_terms(const std::vector<CompiledTerm>& terms, const Eigen::VectorXcd& x,
                 Eigen::VectorXcd& y) {
    const auto dim = x.size();
    for (const auto& t : terms) {
        const std::complex<double> c = t.coeff * t.base;
        for (Eigen::Index s = 0; s < dim; ++s) {
            const double sign =
                (std::popcount(static_cast<std::uint32_t>(s) & t.zmask) & 1) ? -1.0 : 1.0;
            y(static_cast<Eigen::Index>(s ^ t.flip)) += c * sign * x(s);
        }
    }
}

struct RitzPair {
    double value = 0.0;
    Eigen::VectorXcd vector;
    bool converged = false;
};

// Lanczos with full reorthogonalization for the lowest eigenpair,
// optionally deflated against previously found eigenvectors.
RitzPair lanczos_lowest(const std::vector<CompiledTerm>& terms, Eigen::VectorXcd start,
                        const std::vector<Eigen::VectorXcd>& deflate, double tol) {
    const Eigen::Index dim = start.size();
    auto project_out = [&](Eigen::VectorXcd& x) {
        for (const auto& d : deflate) x -= d.dot(x) * d;
    };
    project_out(start);
    if (start.norm() < 1e-12) throw NumericalError("lanczos: start vector in deflated span");
    start.normalize();

    const int max_iter =
        static_cast<int>(std::min<Eigen::Index>(dim - static_cast<Eigen::Index>(deflate.size()), 300));
    std::vector<Eigen::VectorXcd> basis;
    basis.reserve(static_cast<std::size_t>(max_iter));
    std::vector<double> alpha, beta;
    Eigen::VectorXcd q = start, w(dim);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small;
    Eigen::VectorXd ritz0;
    double theta0 = 0.0;

    auto tridiag = [&](int m) {
        Eigen::MatrixXd tmat = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            tmat(i, i) = alpha[static_cast<std::size_t>(i)];
            if (i + 1 < m) {
                tmat(i, i + 1) = beta[static_cast<std::size_t>(i)];
                tmat(i + 1, i) = beta[static_cast<std::size_t>(i)];
            }
        }
        small.compute(tmat);
        theta0 = small.eigenvalues()(0);
        ritz0 = small.eigenvectors().col(0);
    };

    bool closed = false;
    for (int it = 0; it < max_iter; ++it) {
        basis.push_back(q);
        w.setZero();
        apply_terms(terms, q, w);
        project_out(w);
        alpha.push_back(std::real(q.dot(w)));
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) w -= b.dot(w) * b;
        const double nb = w.norm();
        if (nb < 1e-12) { // Krylov space closed: T spectrum exact
            closed = true;
            break;
        }
        beta.push_back(nb);
        q = w / nb;
        if (it >= 1 && (it % 5 == 0 || it == max_iter - 1)) {
            tridiag(it + 1);
            if (std::abs(beta.back() * ritz0(it)) < 0.1 * tol) break;
        }
    }
    const int m = static_cast<int>(basis.size());
    tridiag(m);

    RitzPair out;
    out.value = theta0;
    out.vector = Eigen::VectorXcd::Zero(dim);
    for (int i = 0; i < m; ++i) out.vector += ritz0(i) * basis[static_cast<std::size_t>(i)];
    project_out(out.vector);
    out.vector.normalize();
    w.setZero();
    apply_terms(terms, out.vector, w);
    project_out(w);
    out.converged = closed || (w - out.value * out.vector).norm() <= tol;
    return out;
}

} // namespace

void apply_pauli(const PauliString& p, double coeff, const Eigen::VectorXcd& x,
                 Eigen::VectorXcd& y) {
    HamiltonianSpec h;
    h.sites = p.size();
    h.terms.push_back({coeff, p});
    apply_terms(compile_terms(h), x, y);
}

GroundState ground_state(const HamiltonianSpec& h, std::uint64_t seed) {
    if (h.sites < 1 || h.sites > 14)
        throw ValidationError("ground_state: L = " + std::to_string(h.sites) +
                              " outside the dense-vector envelope (1..14)");
    const Eigen::Index dim = Eigen::Index(1) << h.sites;
    const auto terms = compile_terms(h);
    constexpr double kResidualTol = 1e-8;
    constexpr double kDegenerateTol = 1e-6;

    RngStream rng(seed, "lanczos-start");
    Eigen::VectorXcd start(dim);
    for (Eigen::Index i = 0; i < dim; ++i) start(i) = {rng.uniform_pm1(), rng.uniform_pm1()};

    RitzPair lowest = lanczos_lowest(terms, start, {}, kResidualTol);
    if (!lowest.converged)
        throw NumericalError("ground_state: Lanczos did not reach residual tolerance");

    GroundState gs;
    gs.sites = h.sites;
    gs.energy = lowest.value;
    gs.vector = lowest.vector;

    if (dim > 1) {
        // second pass, deflated, to see the next eigenvalue including any
        // multiplicity of the ground space
        Eigen::VectorXcd start2(dim);
        for (Eigen::Index i = 0; i < dim; ++i) start2(i) = {rng.uniform_pm1(), rng.uniform_pm1()};
        RitzPair second = lanczos_lowest(terms, start2, {gs.vector}, 1e-7);
        gs.gap = second.value - gs.energy;
        gs.degenerate = gs.gap < kDegenerateTol;
    }
    return gs;
}

double exact_expectation(const GroundState& gs, const PauliString& p) {
    if (p.size() != gs.sites)
        throw ValidationError("exact_expectation: string length mismatch");
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(gs.vector.size());
    apply_pauli(p, 1.0, gs.vector, y);
    return std::real(gs.vector.dot(y));
}

ErrorReport error_report(const SnapshotBag& bag, const GroundState& gs,
                         const HamiltonianSpec& h, double f, const std::vector<int>& weights,
                         int threads) {
    if (bag.sites != gs.sites)
        throw ValidationError("error_report: bag and ground state disagree on L");
    ErrorReport rep;
    const double e_est = energy(bag, h, threads);
    rep.energy_density_error = std::abs(e_est - gs.energy) / bag.sites;
    rep.energy_density_error_rescaled = std::abs(f * e_est - gs.energy) / bag.sites;
    for (int k : weights) {
        const auto family = enumerate_contiguous(bag.sites, k);
        double ss = 0.0;
        for (const auto& p : family) {
            ErrorReport::Row row;
            row.op = p.str();
            row.weight = k;
            row.exact = exact_expectation(gs, p);
            row.estimated = estimate(bag, p, threads);
            row.rescaled = f * row.estimated;
            ss += (row.rescaled - row.exact) * (row.rescaled - row.exact);
            rep.table.push_back(std::move(row));
        }
        rep.rms_error_by_weight[k] = std::sqrt(ss / static_cast<double>(family.size()));
    }
    return rep;
}

EigenFloor fit_eigen_floor(const std::vector<FloorSample>& samples) {
    int distinct_l = 0, distinct_n = 0;
    {
        std::vector<int> ls, ns;
        for (const auto& s : samples) {
            ls.push_back(s.sites);
            ns.push_back(s.count);
        }
        std::sort(ls.begin(), ls.end());
        std::sort(ns.begin(), ns.end());
        distinct_l = static_cast<int>(std::unique(ls.begin(), ls.end()) - ls.begin());
        distinct_n = static_cast<int>(std::unique(ns.begin(), ns.end()) - ns.begin());
    }
    if (distinct_l < 2 || distinct_n < 2)
        throw ValidationError("fit_eigen_floor: need at least two distinct L and two distinct N "
                              "(rank-deficient design)");
    // least squares of y = b0 - alpha0 * L with y = lambda_min sqrt(N)
    double s1 = 0, sl = 0, sll = 0, sy = 0, sly = 0;
    for (const auto& s : samples) {
        const double y = s.lambda_min * std::sqrt(static_cast<double>(s.count));
        s1 += 1.0;
        sl += s.sites;
        sll += static_cast<double>(s.sites) * s.sites;
        sy += y;
        sly += s.sites * y;
    }
    const double det = s1 * sll - sl * sl;
    if (std::abs(det) < 1e-12) throw ValidationError("fit_eigen_floor: singular design");
    const double b0 = (sll * sy - sl * sly) / det;
    const double slope = (s1 * sly - sl * sy) / det; // = -alpha0
    return {-slope, b0};
}

double fit_residual_sigma(const std::vector<FloorSample>& samples, const EigenFloor& floor) {
    if (samples.size() <= 2) return 0.0;
    double ssr = 0.0;
    for (const auto& s : samples) {
        const double y = s.lambda_min * std::sqrt(static_cast<double>(s.count));
        const double pred = floor.b0 - floor.alpha0 * s.sites;
        ssr += (y - pred) * (y - pred);
    }
    return std::sqrt(ssr / (static_cast<double>(samples.size()) - 2.0));
}

long long shadow_budget(int k, long long m, double eps) {
    if (k < 1 || m < 1 || eps <= 0.0)
        throw ValidationError("shadow_budget: need k >= 1, M >= 1, eps > 0");
    const double n = std::pow(3.0, k) * std::log(static_cast<double>(m)) / (eps * eps);
    return static_cast<long long>(std::ceil(n));
}

} // namespace shadow
