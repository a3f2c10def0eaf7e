#include <doctest.h>

#include <cmath>
#include <random>

#include "shadow/errors.hpp"
#include "shadow/exact.hpp"
#include "shadow/models.hpp"
#include "shadow/optimizer.hpp"

using namespace shadow;

TEST_CASE("epsilon0 closed form") {
    const EigenFloor def{};
    CHECK(epsilon0(16384, 8, def) == doctest::Approx(-2.8125).epsilon(1e-14));
    CHECK(epsilon0(65536, 8, def) == doctest::Approx(-1.40625).epsilon(1e-14));
    CHECK(epsilon0(100, 5, EigenFloor{0.0, 0.0}) == 0.0);
    CHECK_THROWS_AS(epsilon0(0, 8, def), ValidationError);
}

TEST_CASE("barrier shift") {
    const EigenFloor def{};
    CHECK(barrier_shift(16384, 8, 0.03, def) == doctest::Approx(0.084375).epsilon(1e-14));
    CHECK(barrier_shift(16384, 8, 1.0, def) == doctest::Approx(2.8125).epsilon(1e-14));
    // tightening toward exact positivity
    CHECK(barrier_shift(16384, 8, 1e-9, def) < 1e-8);
    CHECK_THROWS_AS(barrier_shift(16384, 8, 0.0, def), ValidationError);
    CHECK_THROWS_AS(barrier_shift(16384, 8, 1.5, def), ValidationError);
}

TEST_CASE("mu schedule endpoints and monotonicity") {
    const double mu0 = 0.37;
    CHECK(mu_schedule(0, 300, mu0) == mu0); // cos 0 = 1 exactly
    CHECK(mu_schedule(300, 300, mu0) ==
          doctest::Approx(0.0220611931328667 * mu0).epsilon(1e-12));
    for (int t = 1; t <= 300; ++t) CHECK(mu_schedule(t, 300, mu0) < mu_schedule(t - 1, 300, mu0));
    CHECK_THROWS_AS(mu_schedule(-1, 300, mu0), ValidationError);
    CHECK_THROWS_AS(mu_schedule(301, 300, mu0), ValidationError);
}

TEST_CASE("beta schedules: endpoints, vertex, bounds") {
    auto [b1_0, b2_0] = beta_schedules(0, 300);
    CHECK(b1_0 == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(b2_0 == doctest::Approx(0.85).epsilon(1e-14));
    auto [b1_v, b2_v] = beta_schedules(200, 300); // tau = 1/2 at t = (2/3) T
    CHECK(b1_v == doctest::Approx(0.95).epsilon(1e-14));
    CHECK(b2_v == doctest::Approx(0.999).epsilon(1e-14));
    for (int t = 0; t <= 300; ++t) {
        auto [b1, b2] = beta_schedules(t, 300);
        CHECK(b1 > 0.0);
        CHECK(b1 < 1.0);
        CHECK(b2 > 0.0);
        CHECK(b2 < 1.0);
    }
}

TEST_CASE("g coefficient from the model coefficients") {
    CHECK(g_coefficient(expand_model(builtin_model("main"), 20)) ==
          doctest::Approx(1.0 / 28.0).epsilon(1e-14));
    CHECK(g_coefficient(expand_model(builtin_model("H1"), 8)) ==
          doctest::Approx(1.0 / 16.0).epsilon(1e-14));
    // doubling L halves g
    CHECK(g_coefficient(expand_model(builtin_model("main"), 8)) ==
          doctest::Approx(2.0 * g_coefficient(expand_model(builtin_model("main"), 16)))
              .epsilon(1e-14));
    HamiltonianSpec zero;
    zero.sites = 4;
    zero.terms.push_back({0.0, PauliString::parse("XIII")});
    CHECK_THROWS_AS(g_coefficient(zero), ValidationError);
    HamiltonianSpec empty;
    empty.sites = 4;
    CHECK_THROWS_AS(g_coefficient(empty), ValidationError);
}

namespace {

struct FdSetup {
    SnapshotBag bag;
    ProductCache cache;
    HamiltonianSpec ham;
    double g, mu, eps;
};

FdSetup feasible_random_iterate(std::uint64_t seed) {
    const int sites = 4, count = 16;
    FdSetup s{sample_haar(seed, count, sites), build_product_cache(enumerate_basis(sites, 2)),
              expand_model(builtin_model("main"), sites), 0.0, 0.0, 0.0};
    std::mt19937_64 rng(seed * 31 + 7);
    std::uniform_real_distribution<> u(0.0, M_PI);
    for (auto& t : s.bag.theta) t = u(rng);
    s.g = g_coefficient(s.ham);
    s.mu = 5e-2 / s.cache.dim();
    // choose eps to make this iterate feasible with a finite barrier gap
    const CorrelationMatrix m = assemble(s.bag, s.cache);
    s.eps = -eigh(m.entries).eigenvalues(0) + 0.5;
    return s;
}

double max_rel_error(const std::vector<double>& fd, const std::vector<double>& an) {
    double scale = 0.0;
    for (double x : an) scale = std::max(scale, std::abs(x));
    double worst = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i)
        worst = std::max(worst,
                         std::abs(fd[i] - an[i]) / std::max(std::abs(an[i]), 1e-3 * scale));
    return worst;
}

} // namespace

TEST_CASE("full cost gradient matches central finite differences") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        FdSetup s = feasible_random_iterate(seed);
        // uncapped gradient against the scalar cost
        const CostGrad cg =
            cost_and_grad(s.bag, s.ham, s.cache, s.g, s.mu, s.eps, /*cap=*/0.0);
        const double h = 1e-5;
        std::vector<double> fd(cg.grad.size());
        for (int l = 0; l < s.bag.count; ++l)
            for (int j = 0; j < s.bag.sites; ++j) {
                const double t0 = s.bag.theta_at(l, j);
                s.bag.theta_at(l, j) = t0 + h;
                const double cp =
                    cost_and_grad(s.bag, s.ham, s.cache, s.g, s.mu, s.eps, 0.0).cost;
                s.bag.theta_at(l, j) = t0 - h;
                const double cm =
                    cost_and_grad(s.bag, s.ham, s.cache, s.g, s.mu, s.eps, 0.0).cost;
                s.bag.theta_at(l, j) = t0;
                fd[s.bag.idx(l, j)] = (cp - cm) / (2 * h);
            }
        CHECK(max_rel_error(fd, cg.grad) < 1e-4);
    }
}

TEST_CASE("cost_and_grad: zero couplings give zero cost and gradient") {
    FdSetup s = feasible_random_iterate(4);
    const CostGrad cg = cost_and_grad(s.bag, s.ham, s.cache, 0.0, 0.0, s.eps);
    CHECK(cg.cost == 0.0);
    for (double x : cg.grad) CHECK(x == 0.0);
}

TEST_CASE("cost_and_grad rejects infeasible iterates") {
    FdSetup s = feasible_random_iterate(5);
    CHECK_THROWS_AS(cost_and_grad(s.bag, s.ham, s.cache, s.g, s.mu, /*eps=*/0.0),
                    BarrierDomainError);
}

TEST_CASE("gradient ratio cap rescales the barrier part onto the cap") {
    FdSetup s = feasible_random_iterate(6);
    // raise mu so the barrier dominates
    const double mu_big = 1.0;
    const CostGrad un = cost_and_grad(s.bag, s.ham, s.cache, s.g, mu_big, s.eps, 0.0);
    REQUIRE(un.mean_abs_barrier_grad > 1.5 * un.mean_abs_energy_grad);
    CHECK_FALSE(un.cap_applied);
    const CostGrad capped = cost_and_grad(s.bag, s.ham, s.cache, s.g, mu_big, s.eps, 1.5);
    CHECK(capped.cap_applied);
    CHECK(capped.mean_abs_barrier_grad ==
          doctest::Approx(1.5 * capped.mean_abs_energy_grad).epsilon(1e-12));
    // the energy part and the scalar cost are untouched by the cap
    CHECK(capped.cost == un.cost);
    CHECK(capped.mean_abs_energy_grad == un.mean_abs_energy_grad);
    // capped barrier is a uniform rescaling of the uncapped one
    const double f = capped.barrier_grad[0] / un.barrier_grad[0];
    for (std::size_t i = 1; i < un.barrier_grad.size(); i += 7)
        CHECK(capped.barrier_grad[i] == doctest::Approx(f * un.barrier_grad[i]).epsilon(1e-10));
    // with g = 0 the cap must not fire (it would zero the pre-optimization)
    const CostGrad preopt_like = cost_and_grad(s.bag, s.ham, s.cache, 0.0, mu_big, s.eps, 1.5);
    CHECK_FALSE(preopt_like.cap_applied);
    CHECK(preopt_like.mean_abs_barrier_grad > 0.0);
}

TEST_CASE("preoptimize raises lambda_min above the target on a desk instance") {
    const int sites = 4, count = 256;
    SnapshotBag bag = sample_haar(33, count, sites);
    ProductCache cache = build_product_cache(enumerate_basis(sites, 2));
    ScheduleParams params;
    params.threads = 2;
    const EigenFloor floor{};
    const HamiltonianSpec ham = expand_model(builtin_model("main"), sites);
    OptimizerState st = preoptimize(bag, cache, params, floor, &ham);
    const double target = params.x_eps_target * epsilon0(count, sites, floor);
    CHECK(st.epoch <= params.preopt_step_limit);
    CHECK(st.history.back().lambda_min > target);
    // the dynamic relaxation kept the recorded x_eps on the gap rule
    for (const auto& r : st.history)
        CHECK(r.x_eps ==
              doctest::Approx((r.lambda_min - params.preopt_gap) /
                              epsilon0(count, sites, floor))
                  .epsilon(1e-12));
    // fresh-bag precondition
    CHECK_THROWS_AS(preoptimize(bag, cache, params, floor), ValidationError);
}

TEST_CASE("preoptimize rejects a non-negative eigenvalue floor") {
    SnapshotBag bag = sample_haar(3, 32, 2);
    ProductCache cache = build_product_cache(enumerate_basis(2, 2));
    ScheduleParams params;
    CHECK_THROWS_AS(preoptimize(bag, cache, params, EigenFloor{}), ValidationError);
}

TEST_CASE("optimize completes a tiny run, keeps iterates feasible, lowers the energy") {
    const int sites = 4, count = 256;
    SnapshotBag bag = sample_haar(77, count, sites);
    ProductCache cache = build_product_cache(enumerate_basis(sites, 2));
    ScheduleParams params;
    params.epochs = 60;
    params.threads = 2;
    const EigenFloor floor{};
    const HamiltonianSpec ham = expand_model(builtin_model("main"), sites);
    preoptimize(bag, cache, params, floor);
    OptimizerState st = optimize(bag, ham, cache, params, floor);

    const double eps = barrier_shift(count, sites, params.x_eps_target, floor);
    REQUIRE(st.history.size() == static_cast<std::size_t>(params.epochs) + 2);
    for (const auto& r : st.history) CHECK(r.lambda_min > -eps);
    CHECK(st.history.back().energy < st.history.front().energy);
    CHECK(st.phase == OptimizerPhase::Done);

    // schedule columns recorded verbatim
    CHECK(st.history[0].lr == params.lr0);
    CHECK(st.history[1].mu == mu_schedule(0, params.epochs, 5e-2 / cache.dim()));
    CHECK(st.history[1].beta1 == beta_schedules(0, params.epochs).first);

    // ground-state quality at desk scale: rescaled energy density within
    // 0.1 of exact for this tiny (L=4, N=256) budget
    const GroundState gs = ground_state(ham);
    const double f = amplitude_factor(bag, ham);
    CHECK(std::abs(f * st.history.back().energy - gs.energy) / sites < 0.1);
}

TEST_CASE("optimize requires a preoptimized (feasible) bag") {
    const int sites = 4, count = 64;
    SnapshotBag bag = sample_haar(5, count, sites);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<> u(0.0, M_PI);
    for (auto& t : bag.theta) t = u(rng); // random: far below the floor
    ProductCache cache = build_product_cache(enumerate_basis(sites, 2));
    ScheduleParams params;
    const HamiltonianSpec ham = expand_model(builtin_model("main"), sites);
    CHECK_THROWS_AS(optimize(bag, ham, cache, params, EigenFloor{}), BarrierDomainError);
}

TEST_CASE("determinism: identical seed and config give bit-identical history") {
    auto run_once = [] {
        const int sites = 4, count = 128;
        SnapshotBag bag = sample_haar(123, count, sites);
        ProductCache cache = build_product_cache(enumerate_basis(sites, 2));
        ScheduleParams params;
        params.epochs = 15;
        const HamiltonianSpec ham = expand_model(builtin_model("main"), sites);
        preoptimize(bag, cache, params, EigenFloor{});
        return optimize(bag, ham, cache, params, EigenFloor{});
    };
    const OptimizerState a = run_once();
    const OptimizerState b = run_once();
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].cost == b.history[i].cost);
        CHECK(a.history[i].energy == b.history[i].energy);
        CHECK(a.history[i].lambda_min == b.history[i].lambda_min);
        CHECK(a.history[i].lr == b.history[i].lr);
    }
}

TEST_CASE("amplitude factor is 1 on exact-eigenstate moments and errors on zero energy") {
    // oracle route: <H^2> / <H>^2 with exact ground-state correlators
    const HamiltonianSpec ham = expand_model(builtin_model("main"), 6);
    const GroundState gs = ground_state(ham);
    const HamiltonianSpec sq = expand_square(ham);
    double e = 0.0, e2 = 0.0;
    for (const auto& t : ham.terms) e += t.coeff * exact_expectation(gs, t.op);
    for (const auto& t : sq.terms) e2 += t.coeff * exact_expectation(gs, t.op);
    CHECK(e2 / (e * e) == doctest::Approx(1.0).epsilon(1e-9));

    SnapshotBag bag = sample_haar(8, 16, 4); // theta = 0: every Pauli estimate has mean ~ 0
    HamiltonianSpec traceless;
    traceless.sites = 4;
    traceless.terms.push_back({0.0, PauliString::parse("ZIII")});
    CHECK_THROWS_AS(amplitude_factor(bag, traceless), NumericalError);
}

TEST_CASE("schedule params validate their ranges") {
    ScheduleParams p;
    CHECK_NOTHROW(p.validate());
    p.x_eps_target = 1.5;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = ScheduleParams{};
    p.lr0 = 0.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = ScheduleParams{};
    p.backoff_factor = 1.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
}
