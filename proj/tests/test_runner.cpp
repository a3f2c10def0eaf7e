#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "shadow/errors.hpp"
#include <nlohmann/json.hpp>

#include "shadow/io.hpp"
#include "shadow/runner.hpp"

using namespace shadow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig tiny_config(const fs::path& out) {
    RunConfig c;
    c.model = "main";
    c.sites = 6;
    c.snapshots = 512;
    c.epochs = 25;
    c.seed = 31;
    c.out_dir = out.string();
    c.threads = 2;
    return c;
}

} // namespace

TEST_CASE("checkpoint round trip restores the bag bit-exactly") {
    SnapshotBag bag = sample_haar(55, 64, 5);
    for (std::size_t i = 0; i < bag.theta.size(); ++i) bag.theta[i] = 0.01 * double(i);
    OptimizerState st;
    st.epoch = 7;
    st.lr = 0.031;
    st.x_eps = 0.4;
    st.phase = OptimizerPhase::Main;
    st.m.assign(bag.theta.size(), 0.25);
    st.v.assign(bag.theta.size(), 0.5);

    const auto path = fs::temp_directory_path() / "shadow_ckpt_test.bin";
    save_checkpoint(path.string(), bag, &st);
    const Checkpoint cp = load_checkpoint(path.string());
    CHECK(cp.bag.seed == bag.seed);
    CHECK(cp.bag.theta == bag.theta);
    CHECK(cp.bag.rot == bag.rot);     // regenerated from the seed
    CHECK(cp.bag.angles == bag.angles);
    REQUIRE(cp.state.has_value());
    CHECK(cp.state->epoch == 7);
    CHECK(cp.state->lr == 0.031);
    CHECK(cp.state->m == st.m);
    CHECK(cp.state->phase == OptimizerPhase::Main);
    fs::remove(path);

    CHECK_THROWS_AS(load_checkpoint("/nonexistent/x.bin"), ValidationError);
}

TEST_CASE("estimate_many agrees with per-string estimates") {
    SnapshotBag bag = sample_haar(9, 300, 5);
    for (std::size_t i = 0; i < bag.theta.size(); ++i) bag.theta[i] = 0.002 * double(i % 97);
    std::vector<PauliString> ops = {PauliString::parse("ZIIII"), PauliString::parse("XYIIZ"),
                                    PauliString::identity(5), PauliString::parse("ZZZZZ")};
    const auto many = estimate_many(bag, ops, 2);
    for (std::size_t i = 0; i < ops.size(); ++i)
        CHECK(many[i] == doctest::Approx(estimate(bag, ops[i])).epsilon(1e-12));
    // deterministic across worker counts
    CHECK(estimate_many(bag, ops, 1) == many);
}

TEST_CASE("optimize run directory is self-describing and deterministic") {
    const fs::path out = fs::temp_directory_path() / "shadow_runner_test";
    fs::remove_all(out);
    const RunConfig c = tiny_config(out);
    const OptimizeOutcome first = run_optimize(c);

    for (const char* name :
         {"manifest.json", "summary.json", "trace.csv", "preopt_trace.csv", "checkpoint.bin",
          "correlators_raw.csv", "correlators_rescaled.csv", "corrmat.csv"})
        CHECK(fs::exists(fs::path(first.run_dir) / name));

    // rerun with the identical config reproduces the traces bit-exactly
    const fs::path moved = fs::temp_directory_path() / "shadow_runner_test_copy";
    fs::remove_all(moved);
    fs::rename(first.run_dir, moved);
    const OptimizeOutcome second = run_optimize(c);
    for (const char* name : {"trace.csv", "preopt_trace.csv", "correlators_raw.csv",
                             "correlators_rescaled.csv"})
        CHECK(slurp(moved / name) == slurp(fs::path(second.run_dir) / name));
    fs::remove_all(moved);

    // final iterate respects the feasibility floor
    CHECK(second.final_lambda_min >= -second.eps);

    // checkpoint reloads to the final bag
    const Checkpoint cp = load_checkpoint((fs::path(second.run_dir) / "checkpoint.bin").string());
    CHECK(cp.bag.count == c.snapshots);
    CHECK(cp.state.has_value());

    fs::remove_all(out);
}

TEST_CASE("exact output is consumed unchanged by compare") {
    const fs::path out = fs::temp_directory_path() / "shadow_compare_test";
    fs::remove_all(out);
    RunConfig c = tiny_config(out);
    c.epochs = 20;
    const OptimizeOutcome run = run_optimize(c);
    const ExactOutcome exact = run_exact(c);
    const CompareOutcome cmp = run_compare(run.run_dir, exact.out_dir);
    CHECK(fs::exists(fs::path(cmp.out_dir) / "error_report.json"));
    CHECK(fs::exists(fs::path(cmp.out_dir) / "per_operator.csv"));
    CHECK(fs::exists(fs::path(cmp.out_dir) / "zz_xx.csv"));
    CHECK(cmp.rms_by_weight.count(2) == 1);
    CHECK(cmp.rms_by_weight.count(5) == 1);
    CHECK(cmp.rms_by_weight.at(2) >= 0.0);
    // the exact.csv path works as well as its directory
    const CompareOutcome cmp2 =
        run_compare(run.run_dir, (fs::path(exact.out_dir) / "exact.csv").string());
    CHECK(cmp2.rms_by_weight.at(2) == cmp.rms_by_weight.at(2));

    // zz_xx series has L-1 rows
    std::ifstream zz(fs::path(cmp.out_dir) / "zz_xx.csv");
    std::string line;
    int rows = -1; // header
    while (std::getline(zz, line))
        if (!line.empty()) ++rows;
    CHECK(rows == c.sites - 1);

    // model mismatch refused
    RunConfig other = c;
    other.model = "H1";
    const ExactOutcome wrong = run_exact(other);
    CHECK_THROWS_AS(run_compare(run.run_dir, wrong.out_dir), ValidationError);
    fs::remove_all(out);
}

TEST_CASE("self-comparison of exact correlators is all zeros") {
    // feed the exact values through the error_report path with f = 1 by
    // reading from the written exact.csv
    const fs::path out = fs::temp_directory_path() / "shadow_selfcmp_test";
    fs::remove_all(out);
    RunConfig c = tiny_config(out);
    const ExactOutcome exact = run_exact(c);
    std::ifstream in(fs::path(exact.out_dir) / "exact.csv");
    REQUIRE(in);
    std::string line;
    std::getline(in, line);
    CHECK(line == "op,weight,value");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    // weight <= 2 basis plus contiguous weight-5 family
    CHECK(rows == 1 + 3 * 6 + 9 * 6 * 5 / 2 + 6 * 243);
    fs::remove_all(out);
}

TEST_CASE("floor fit pipeline writes a reloadable floor override") {
    const fs::path out = fs::temp_directory_path() / "shadow_floor_test";
    fs::remove_all(out);
    // desk-size grid; the window assertions live in the acceptance suite
    const FloorFitOutcome fit = run_floor_fit({4, 6}, {256, 1024}, 5, out.string(), 2);
    CHECK(fit.samples.size() == 4);
    CHECK(fs::exists(fs::path(out) / "floor.json"));
    CHECK(fs::exists(fs::path(out) / "floor_samples.csv"));
    for (const auto& s : fit.samples) CHECK(s.lambda_min < 1.0);

    // output JSON reloads as a floor override in an optimize config
    std::ifstream in(fs::path(out) / "floor.json");
    nlohmann::json j;
    in >> j;
    RunConfig c = tiny_config(out);
    c.floor.alpha0 = j.at("alpha0").get<double>();
    c.floor.b0 = j.at("b0").get<double>();
    CHECK_NOTHROW(c.validate());
    fs::remove_all(out);

    CHECK_THROWS_AS(run_floor_fit({8}, {4096}, 1, out.string(), 2), ValidationError);
    fs::remove_all(out);
}

TEST_CASE("sweep emits one summary row per (N, seed) combination") {
    const fs::path out = fs::temp_directory_path() / "shadow_sweep_test";
    fs::remove_all(out);
    RunConfig c = tiny_config(out);
    c.sites = 4;
    c.snapshots = 128;
    c.epochs = 8;
    c.report_weights = {2};
    const SweepOutcome sweep = run_sweep(c, {128, 256}, {1, 2}, 1);
    CHECK(sweep.run_dirs.size() == 4);
    std::ifstream in(sweep.summary_csv);
    REQUIRE(in);
    std::string line;
    std::getline(in, line);
    CHECK(line == "N,seed,run_dir,f,energy_density_error_rescaled,rms_k2,ref_k2");
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 4);
    fs::remove_all(out);
}
