#include "shadow/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shadow/errors.hpp"

namespace shadow {

void ScheduleParams::validate() const {
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    if (mu0 < 0.0) throw ValidationError("mu0 must be positive (or 0 for the derived default)");
    if (g < 0.0) throw ValidationError("g must be positive (or 0 for the derived default)");
    if (!(x_eps_target > 0.0 && x_eps_target <= 1.0))
        throw ValidationError("x_eps_target must lie in (0, 1]");
    if (lr0 <= 0.0) throw ValidationError("lr0 must be positive");
    if (adam_eps <= 0.0) throw ValidationError("adam_eps must be positive");
    if (!(backoff_factor > 0.0 && backoff_factor < 1.0))
        throw ValidationError("backoff_factor must lie in (0, 1)");
    if (grad_ratio_cap <= 0.0) throw ValidationError("grad_ratio_cap must be positive");
    if (preopt_gap <= 0.0) throw ValidationError("preopt_gap must be positive");
    if (preopt_step_limit < 1) throw ValidationError("preopt_step_limit must be >= 1");
    if (retry_cap < 1) throw ValidationError("retry_cap must be >= 1");
}

double epsilon0(int count, int sites, const EigenFloor& floor) {
    if (count < 1) throw ValidationError("epsilon0: snapshot count must be >= 1");
    if (floor.alpha0 < 0.0 || floor.b0 < 0.0)
        throw ValidationError("epsilon0: floor parameters must be non-negative");
    return (floor.b0 - floor.alpha0 * (sites + 2)) / std::sqrt(static_cast<double>(count));
}

double barrier_shift(int count, int sites, double x_eps, const EigenFloor& floor) {
    if (!(x_eps > 0.0 && x_eps <= 1.0))
        throw ValidationError("barrier_shift: x_eps must lie in (0, 1]");
    return x_eps * std::abs(epsilon0(count, sites, floor));
}

double mu_schedule(int t, int epochs, double mu0) {
    if (t < 0 || t > epochs) throw ValidationError("mu_schedule: t outside [0, T]");
    const double c = 1.0 + std::cos(M_PI * t / (4.0 / 3.0 * epochs + 1.0));
    return 0.25 * mu0 * c * c;
}

std::pair<double, double> beta_schedules(int t, int epochs) {
    if (t < 0 || t > epochs) throw ValidationError("beta_schedules: t outside [0, T]");
    const double tau = t / (4.0 / 3.0 * epochs);
    const double bump = (tau - 0.5) * (tau - 0.5) / 2.0 - 0.125;
    return {0.6 + bump * (-2.8), 0.85 + bump * (-1.192)};
}

double g_coefficient(const HamiltonianSpec& h) {
    if (h.terms.empty()) throw ValidationError("g_coefficient: Hamiltonian has no terms");
    const double sum = h.abs_coeff_sum();
    if (sum == 0.0) throw ValidationError("g_coefficient: all coefficients are zero");
    return 1.0 / sum;
}

namespace {

double mean_abs(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s / static_cast<double>(v.size());
}

// s_c = sum over strictly-upper basis pairs with product string c of
// 2 Re[W(a,b) phase(b,a)]; Tr(W dM/dtheta) then decomposes over table
// strings. Diagonal entries are constant (identity product) and drop out.
void barrier_weights(const ProductCache& cache, const Eigen::MatrixXcd& w,
                     std::vector<double>& s) {
    s.assign(static_cast<std::size_t>(cache.table.size()), 0.0);
    const int dim = cache.dim();
    for (int b = 0; b < dim; ++b) {
        const auto* col = w.data() + static_cast<std::size_t>(b) * dim; // W(a, b) = col[a]
        const auto* ids = cache.string_id.data() + static_cast<std::size_t>(b) * dim;
        const auto* ph = cache.phase_exp.data() + static_cast<std::size_t>(b) * dim;
        for (int a = b + 1; a < dim; ++a) {
            double re;
            switch (ph[a]) {
                case 0: re = col[a].real(); break;
                case 1: re = -col[a].imag(); break;
                case 2: re = -col[a].real(); break;
                default: re = col[a].imag(); break;
            }
            s[static_cast<std::size_t>(ids[a])] += 2.0 * re;
        }
    }
}

// Shared evaluation state for one bag: fused estimator plus the current
// eigendecomposition, refreshed after every theta change.
class CostEngine {
public:
    CostEngine(const SnapshotBag& bag, ProductCache& cache,
               const std::vector<std::pair<double, int>>& term_ids, int threads)
        : estimator_(bag, cache, threads), cache_(&cache), term_ids_(term_ids) {
        energy_weights_.assign(static_cast<std::size_t>(cache.table.size()), 0.0);
        for (const auto& [coeff, id] : term_ids_)
            energy_weights_[static_cast<std::size_t>(id)] += coeff;
        decompose();
    }

    void refresh() {
        estimator_.refresh();
        decompose();
    }

    double lambda_min() const { return eig_.eigenvalues(0); }
    const EighResult& eig() const { return eig_; }
    double energy() const { return estimator_.energy(term_ids_); }
    const ShadowEstimator& estimator() const { return estimator_; }

    double cost(double g, double mu, double eps) const {
        double c = g * energy();
        if (mu != 0.0) c -= mu * trace_log_shifted(eig_, eps);
        return c;
    }

    CostGrad gradient(double g, double mu, double eps, double ratio_cap) {
        CostGrad out;
        out.lambda_min = lambda_min();
        out.energy = energy();
        out.cost = g * out.energy;
        const std::size_t size = estimator_.bag().theta.size();
        out.energy_grad.assign(size, 0.0);
        out.barrier_grad.assign(size, 0.0);
        if (g != 0.0) estimator_.accumulate_gradient(energy_weights_, g, out.energy_grad);
        if (mu != 0.0) {
            out.cost -= mu * trace_log_shifted(eig_, eps);
            const Eigen::MatrixXcd w = inverse_shifted(eig_, eps);
            barrier_weights(*cache_, w, scratch_);
            estimator_.accumulate_gradient(scratch_, -mu, out.barrier_grad);
        }
        out.mean_abs_energy_grad = mean_abs(out.energy_grad);
        out.mean_abs_barrier_grad = mean_abs(out.barrier_grad);
        if (ratio_cap > 0.0 && out.mean_abs_energy_grad > 0.0 &&
            out.mean_abs_barrier_grad > ratio_cap * out.mean_abs_energy_grad) {
            const double f = ratio_cap * out.mean_abs_energy_grad / out.mean_abs_barrier_grad;
            for (double& x : out.barrier_grad) x *= f;
            out.mean_abs_barrier_grad = mean_abs(out.barrier_grad);
            out.cap_applied = true;
        }
        out.grad.resize(size);
        for (std::size_t i = 0; i < size; ++i)
            out.grad[i] = out.energy_grad[i] + out.barrier_grad[i];
        return out;
    }

private:
    void decompose() { eig_ = eigh(estimator_.matrix().entries); }

    ShadowEstimator estimator_;
    const ProductCache* cache_;
    std::vector<std::pair<double, int>> term_ids_;
    std::vector<double> energy_weights_;
    std::vector<double> scratch_;
    EighResult eig_;
};

struct AdamMoments {
    std::vector<double> m, v;
    int step = 0;

    explicit AdamMoments(std::size_t size) : m(size, 0.0), v(size, 0.0) {}

    void update(const std::vector<double>& grad, double b1, double b2) {
        ++step;
        for (std::size_t i = 0; i < m.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
            v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
        }
        corr1_ = 1.0 - std::pow(b1, step);
        corr2_ = 1.0 - std::pow(b2, step);
    }

    // theta = theta0 - lr * mhat / (sqrt(vhat) + adam_eps), with the
    // bias corrections of the betas used for the current epoch.
    void propose(const std::vector<double>& theta0, double lr, double adam_eps,
                 std::vector<double>& theta) const {
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double mhat = m[i] / corr1_;
            const double vhat = v[i] / corr2_;
            theta[i] = theta0[i] - lr * mhat / (std::sqrt(vhat) + adam_eps);
        }
    }

private:
    double corr1_ = 1.0, corr2_ = 1.0;
};

double derived_mu0(const ScheduleParams& params, const ProductCache& cache) {
    return params.mu0 > 0.0 ? params.mu0 : 5e-2 / cache.dim();
}

void require_negative_floor(double eps0) {
    if (eps0 >= 0.0)
        throw ValidationError("epsilon0(N, L) = " + std::to_string(eps0) +
                              " is non-negative; the relaxed positivity scheme requires a "
                              "negative eigenvalue floor (larger L or smaller b0)");
}

} // namespace

CostGrad cost_and_grad(const SnapshotBag& bag, const HamiltonianSpec& h, ProductCache& cache,
                       double g, double mu, double eps, double grad_ratio_cap, int threads) {
    auto term_ids = register_hamiltonian(cache, h);
    CostEngine engine(bag, cache, term_ids, threads);
    return engine.gradient(g, mu, eps, grad_ratio_cap);
}

OptimizerState preoptimize(SnapshotBag& bag, ProductCache& cache, const ScheduleParams& params,
                           const EigenFloor& floor, const HamiltonianSpec* trace_ham) {
    params.validate();
    for (double t : bag.theta)
        if (t != 0.0)
            throw ValidationError("preoptimize: bag is not fresh (theta != 0)");
    const double eps0 = epsilon0(bag.count, bag.sites, floor);
    require_negative_floor(eps0);
    const double mu0 = derived_mu0(params, cache);
    const double target = params.x_eps_target * eps0;
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999;

    std::vector<std::pair<double, int>> term_ids;
    if (trace_ham) term_ids = register_hamiltonian(cache, *trace_ham);
    CostEngine engine(bag, cache, term_ids, params.threads);

    OptimizerState st;
    st.phase = OptimizerPhase::Preopt;
    st.lr = params.lr0;
    st.m.assign(bag.theta.size(), 0.0);
    st.v.assign(bag.theta.size(), 0.0);
    AdamMoments adam(bag.theta.size());

    double lam = engine.lambda_min();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto record = [&](int epoch, double eps_t) {
        EpochRecord r;
        r.epoch = epoch;
        r.cost = -mu0 * trace_log_shifted(engine.eig(), eps_t);
        r.energy = trace_ham ? engine.energy() : nan;
        r.lambda_min = lam;
        r.lr = st.lr;
        r.mu = mu0;
        r.beta1 = kBeta1;
        r.beta2 = kBeta2;
        r.x_eps = (lam - params.preopt_gap) / eps0;
        st.history.push_back(r);
    };
    record(0, params.preopt_gap - lam);

    std::vector<double> theta0;
    int step = 0;
    while (lam <= target) {
        if (step >= params.preopt_step_limit)
            throw NumericalError("preoptimize: eigenvalue floor not reached within " +
                                 std::to_string(params.preopt_step_limit) + " steps (lambda_min " +
                                 std::to_string(lam) + ", target " + std::to_string(target) + ")");
        // dynamic relaxation: keep lambda_min + eps_t == preopt_gap
        const double eps_t = params.preopt_gap - lam;
        CostGrad cg = engine.gradient(0.0, mu0, eps_t, 0.0);
        adam.update(cg.grad, kBeta1, kBeta2);
        theta0 = bag.theta;
        int retry = 0;
        for (;;) {
            adam.propose(theta0, st.lr, params.adam_eps, bag.theta);
            engine.refresh();
            if (engine.lambda_min() + eps_t > 0.0) break;
            if (++retry > params.retry_cap) throw StalledOptimizationError(step, st.lr);
            st.lr *= params.backoff_factor;
        }
        lam = engine.lambda_min();
        ++step;
        record(step, eps_t);
    }
    st.epoch = step;
    st.x_eps = (lam - params.preopt_gap) / eps0;
    st.m = adam.m;
    st.v = adam.v;
    return st;
}

OptimizerState optimize(SnapshotBag& bag, const HamiltonianSpec& h, ProductCache& cache,
                        const ScheduleParams& params, const EigenFloor& floor) {
    params.validate();
    const double eps0 = epsilon0(bag.count, bag.sites, floor);
    require_negative_floor(eps0);
    const double eps = barrier_shift(bag.count, bag.sites, params.x_eps_target, floor);
    const double mu0 = derived_mu0(params, cache);
    const double g = params.g > 0.0 ? params.g : g_coefficient(h);

    auto term_ids = register_hamiltonian(cache, h);
    CostEngine engine(bag, cache, term_ids, params.threads);
    if (engine.lambda_min() <= -eps)
        throw BarrierDomainError(engine.lambda_min(), eps);

    OptimizerState st;
    st.phase = OptimizerPhase::Main;
    st.lr = params.lr0; // reset at the main-phase boundary
    AdamMoments adam(bag.theta.size()); // fresh moments at the phase boundary
    const int T = params.epochs;

    auto record = [&](int epoch, double mu, double b1, double b2) {
        EpochRecord r;
        r.epoch = epoch;
        r.cost = engine.cost(g, mu, eps);
        r.energy = engine.energy();
        r.lambda_min = engine.lambda_min();
        r.lr = st.lr;
        r.mu = mu;
        r.beta1 = b1;
        r.beta2 = b2;
        r.x_eps = params.x_eps_target;
        st.history.push_back(r);
    };
    {
        auto [b1, b2] = beta_schedules(0, T);
        record(0, mu_schedule(0, T, mu0), b1, b2);
    }

    std::vector<double> theta0;
    for (int t = 0; t <= T; ++t) {
        const double mu = mu_schedule(t, T, mu0);
        const auto [b1, b2] = beta_schedules(t, T);
        CostGrad cg = engine.gradient(g, mu, eps, params.grad_ratio_cap);
        adam.update(cg.grad, b1, b2);
        theta0 = bag.theta;
        int retry = 0;
        for (;;) {
            adam.propose(theta0, st.lr, params.adam_eps, bag.theta);
            engine.refresh();
            if (engine.lambda_min() > -eps) break;
            if (++retry > params.retry_cap) {
                bag.theta = theta0;
                engine.refresh();
                throw StalledOptimizationError(t, st.lr);
            }
            st.lr *= params.backoff_factor;
        }
        record(t + 1, mu, b1, b2);
    }
    st.epoch = T + 1;
    st.phase = OptimizerPhase::Done;
    st.x_eps = params.x_eps_target;
    st.m = adam.m;
    st.v = adam.v;
    return st;
}

double amplitude_factor(const SnapshotBag& bag, const HamiltonianSpec& h, int threads) {
    const double e = energy(bag, h, threads);
    if (std::abs(e) < 1e-12)
        throw NumericalError("amplitude_factor: energy estimate is zero, factor undefined");
    const double e2 = energy(bag, expand_square(h), threads);
    return e2 / (e * e);
}

} // namespace shadow
