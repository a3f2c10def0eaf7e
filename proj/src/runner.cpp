#include "shadow/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <semaphore>
#include <sstream>

#include <nlohmann/json.hpp>

#include "shadow/errors.hpp"
#include "shadow/io.hpp"
#include "shadow/models.hpp"
#include "shadow/rng.hpp"
#include "shadow/version.hpp"

namespace shadow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path + " for writing");
    out << text;
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return j;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Strings reported by a run: the full weight-<=2 basis followed by the
/// contiguous families of every configured weight above 2.
std::vector<PauliString> report_operators(int sites, const std::vector<int>& weights) {
    std::vector<PauliString> ops = enumerate_basis(sites, 2);
    for (int k : weights) {
        if (k <= 2) continue; // already inside the basis
        auto family = enumerate_contiguous(sites, k);
        ops.insert(ops.end(), family.begin(), family.end());
    }
    return ops;
}

std::map<std::string, double> load_correlator_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    std::map<std::string, double> out;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw ValidationError(path + ": malformed row '" + line + "'");
        out[line.substr(0, c1)] = std::stod(line.substr(c2 + 1));
    }
    return out;
}

} // namespace

OptimizeOutcome run_optimize(const RunConfig& config) {
    config.validate();
    const auto model = resolve_model(config.model);
    const HamiltonianSpec ham = expand_model(model, config.sites);
    const std::string hash = model_hash(ham);

    std::ostringstream dir_name;
    dir_name << "run-" << model.name << "-L" << config.sites << "-N" << config.snapshots
             << "-T" << config.epochs << "-seed" << config.seed;
    const fs::path run_dir = fs::path(config.out_dir) / dir_name.str();
    fs::create_directories(run_dir);

    auto basis = enumerate_basis(config.sites, 2);
    ProductCache cache = build_product_cache(std::move(basis));
    SnapshotBag bag = sample_haar(config.seed, config.snapshots, config.sites);
    const ScheduleParams params = config.schedule();

    OptimizeOutcome out;
    out.run_dir = run_dir.string();
    out.eps = barrier_shift(config.snapshots, config.sites, config.x_eps_target, config.floor);
    out.preopt_state = preoptimize(bag, cache, params, config.floor, &ham);
    out.preopt_steps = out.preopt_state.epoch;
    out.main_state = optimize(bag, ham, cache, params, config.floor);
    out.f = amplitude_factor(bag, ham, config.threads);
    out.final_energy = out.main_state.history.back().energy;
    out.final_lambda_min = out.main_state.history.back().lambda_min;

    write_trace_csv((run_dir / "preopt_trace.csv").string(), out.preopt_state.history,
                    config.sites);
    write_trace_csv((run_dir / "trace.csv").string(), out.main_state.history, config.sites);
    save_checkpoint((run_dir / "checkpoint.bin").string(), bag, &out.main_state);

    const auto ops = report_operators(config.sites, config.report_weights);
    const auto raw = estimate_many(bag, ops, config.threads);
    std::vector<double> rescaled(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        rescaled[i] = ops[i].is_identity() ? raw[i] : out.f * raw[i];
    write_correlators_csv((run_dir / "correlators_raw.csv").string(), ops, raw);
    write_correlators_csv((run_dir / "correlators_rescaled.csv").string(), ops, rescaled);
    write_matrix_csv(assemble(bag, cache, config.threads), (run_dir / "corrmat.csv").string());

    json manifest;
    manifest["config"] = json::parse(config_to_json(config));
    manifest["model_name"] = model.name;
    manifest["model_hash"] = hash;
    manifest["library_version"] = kVersion;
    manifest["derived"] = {
        {"basis_dim", cache.dim()},
        {"mu0", config.mu0 > 0 ? config.mu0 : 5e-2 / cache.dim()},
        {"g", config.g > 0 ? config.g : g_coefficient(ham)},
        {"epsilon0", epsilon0(config.snapshots, config.sites, config.floor)},
        {"eps", out.eps},
        {"preopt_steps", out.preopt_steps},
    };
    manifest["notes"] = {
        "adam moments are reset at the pre-optimization/main boundary",
        "learning rate is reset to lr0 at the main-phase start",
    };
    write_text((run_dir / "manifest.json").string(), manifest.dump(2) + "\n");

    json summary;
    summary["f"] = out.f;
    summary["final_energy"] = out.final_energy;
    summary["final_energy_density"] = out.final_energy / config.sites;
    summary["final_lambda_min"] = out.final_lambda_min;
    summary["eps"] = out.eps;
    summary["initial_main_energy"] = out.main_state.history.front().energy;
    write_text((run_dir / "summary.json").string(), summary.dump(2) + "\n");
    return out;
}

ExactOutcome run_exact(const RunConfig& config) {
    config.validate();
    if (config.sites > 14)
        throw ValidationError("exact: L = " + std::to_string(config.sites) +
                              " outside the diagonalization envelope (<= 14)");
    const auto model = resolve_model(config.model);
    const HamiltonianSpec ham = expand_model(model, config.sites);

    std::ostringstream dir_name;
    dir_name << "exact-" << model.name << "-L" << config.sites;
    const fs::path out_dir = fs::path(config.out_dir) / dir_name.str();
    fs::create_directories(out_dir);

    const GroundState gs = ground_state(ham, config.seed);
    const auto ops = report_operators(config.sites, config.report_weights);

    std::ofstream csv(out_dir / "exact.csv");
    if (!csv) throw ValidationError("cannot write exact.csv");
    csv << "op,weight,value\n";
    for (const auto& p : ops)
        csv << p.str() << "," << p.weight() << "," << format_double(exact_expectation(gs, p))
            << "\n";
    csv.close();

    json meta;
    meta["L"] = config.sites;
    meta["model_name"] = model.name;
    meta["model_hash"] = model_hash(ham);
    meta["energy"] = gs.energy;
    meta["energy_density"] = gs.energy / config.sites;
    meta["degenerate"] = gs.degenerate;
    meta["gap"] = gs.gap;
    meta["report_weights"] = config.report_weights;
    write_text((out_dir / "exact_meta.json").string(), meta.dump(2) + "\n");

    return {out_dir.string(), gs.energy, gs.degenerate};
}

CompareOutcome run_compare(const std::string& run_dir, const std::string& exact_dir) {
    const fs::path run(run_dir);
    fs::path exact(exact_dir);
    if (exact.filename() == "exact.csv") exact = exact.parent_path();

    const json manifest = read_json((run / "manifest.json").string());
    const json summary = read_json((run / "summary.json").string());
    const json meta = read_json((exact / "exact_meta.json").string());

    if (manifest.at("model_hash") != meta.at("model_hash"))
        throw ValidationError("compare: model hash mismatch (run " +
                              manifest.at("model_hash").get<std::string>() + ", exact " +
                              meta.at("model_hash").get<std::string>() + ")");
    const int sites = manifest.at("config").at("L").get<int>();
    if (sites != meta.at("L").get<int>())
        throw ValidationError("compare: L mismatch between run and exact table");
    const int snapshots = manifest.at("config").at("N").get<int>();
    const auto weights = manifest.at("config").at("report_weights").get<std::vector<int>>();

    const auto exact_vals = load_correlator_csv((exact / "exact.csv").string());
    const auto est_raw = load_correlator_csv((run / "correlators_raw.csv").string());
    const auto est_scaled = load_correlator_csv((run / "correlators_rescaled.csv").string());

    const fs::path out_dir = run / "compare";
    fs::create_directories(out_dir);

    CompareOutcome out;
    out.out_dir = out_dir.string();
    const double exact_energy = meta.at("energy").get<double>();
    const double est_energy = summary.at("final_energy").get<double>();
    const double f = summary.at("f").get<double>();
    out.energy_density_error = std::abs(est_energy - exact_energy) / sites;
    out.energy_density_error_rescaled = std::abs(f * est_energy - exact_energy) / sites;

    std::ofstream per_op(out_dir / "per_operator.csv");
    per_op << "op,weight,exact,estimated,rescaled,abs_error\n";
    auto lookup = [&](const std::map<std::string, double>& m, const std::string& key,
                      const std::string& which) {
        auto it = m.find(key);
        if (it == m.end())
            throw ValidationError("compare: operator " + key + " missing from " + which);
        return it->second;
    };
    for (int k : weights) {
        double ss = 0.0;
        const auto family = enumerate_contiguous(sites, k);
        for (const auto& p : family) {
            const std::string op = p.str();
            const double ex = lookup(exact_vals, op, "exact table");
            const double raw = lookup(est_raw, op, "run correlators");
            const double sc = lookup(est_scaled, op, "run correlators");
            ss += (sc - ex) * (sc - ex);
            per_op << op << "," << k << "," << format_double(ex) << "," << format_double(raw)
                   << "," << format_double(sc) << "," << format_double(std::abs(sc - ex))
                   << "\n";
        }
        out.rms_by_weight[k] = std::sqrt(ss / static_cast<double>(family.size()));
        out.shadow_reference_error[k] =
            std::sqrt(std::pow(3.0, k) * std::log(static_cast<double>(family.size())) /
                      static_cast<double>(snapshots));
    }
    per_op.close();

    // <Z_0 Z_r> and <X_0 X_r> series, r = 1..L-1, from the rescaled values
    std::ofstream zz(out_dir / "zz_xx.csv");
    zz << "r,zz_exact,zz_estimated,xx_exact,xx_estimated\n";
    for (int r = 1; r < sites; ++r) {
        PauliString pz = PauliString::identity(sites);
        pz.set(0, Axis::Z);
        pz.set(r, Axis::Z);
        PauliString px = PauliString::identity(sites);
        px.set(0, Axis::X);
        px.set(r, Axis::X);
        zz << r << "," << format_double(lookup(exact_vals, pz.str(), "exact table")) << ","
           << format_double(lookup(est_scaled, pz.str(), "run correlators")) << ","
           << format_double(lookup(exact_vals, px.str(), "exact table")) << ","
           << format_double(lookup(est_scaled, px.str(), "run correlators")) << "\n";
    }
    zz.close();

    json report;
    report["energy_density_error"] = out.energy_density_error;
    report["energy_density_error_rescaled"] = out.energy_density_error_rescaled;
    report["f"] = f;
    for (const auto& [k, v] : out.rms_by_weight)
        report["rms_error"][std::to_string(k)] = v;
    for (const auto& [k, v] : out.shadow_reference_error)
        report["shadow_reference_error"][std::to_string(k)] = v;
    report["exact_degenerate"] = meta.at("degenerate");
    write_text((out_dir / "error_report.json").string(), report.dump(2) + "\n");
    return out;
}

FloorFitOutcome run_floor_fit(const std::vector<int>& site_list,
                              const std::vector<int>& snapshot_list, std::uint64_t seed,
                              const std::string& out_dir, int threads) {
    if (site_list.empty() || snapshot_list.empty())
        throw ValidationError("floor fit: L and N lists must be non-empty");
    fs::create_directories(out_dir);

    FloorFitOutcome out;
    out.out_dir = out_dir;
    RngStream seeds(seed, "floor");
    for (int sites : site_list) {
        auto cache = build_product_cache(enumerate_basis(sites, 2));
        for (int count : snapshot_list) {
            const std::uint64_t bag_seed = seeds.raw();
            const SnapshotBag bag =
                born_sample(ProductState::all_zeros(sites), bag_seed, count, sites);
            const CorrelationMatrix m = assemble(bag, cache, threads);
            const EighResult eig = eigh(m.entries);
            out.samples.push_back({count, sites, eig.eigenvalues(0)});
        }
    }
    out.floor = fit_eigen_floor(out.samples);
    out.residual_sigma = fit_residual_sigma(out.samples, out.floor);

    std::ofstream csv(fs::path(out_dir) / "floor_samples.csv");
    csv << "L,N,lambda_min,lambda_min_sqrtN\n";
    for (const auto& s : out.samples)
        csv << s.sites << "," << s.count << "," << format_double(s.lambda_min) << ","
            << format_double(s.lambda_min * std::sqrt(static_cast<double>(s.count))) << "\n";
    csv.close();

    json j;
    j["alpha0"] = out.floor.alpha0;
    j["b0"] = out.floor.b0;
    j["residual_sigma"] = out.residual_sigma;
    j["seed"] = seed;
    write_text((fs::path(out_dir) / "floor.json").string(), j.dump(2) + "\n");
    return out;
}

SweepOutcome run_sweep(const RunConfig& base, const std::vector<int>& snapshot_list,
                       const std::vector<std::uint64_t>& seeds, int workers) {
    if (snapshot_list.empty() || seeds.empty())
        throw ValidationError("sweep: N list and seed list must be non-empty");
    if (workers < 1) workers = 1;
    base.validate();
    const ExactOutcome exact = run_exact(base);

    struct Job {
        RunConfig config;
        std::string run_dir;
        CompareOutcome compare;
        double f = 1.0;
    };
    std::vector<Job> jobs;
    for (int n : snapshot_list)
        for (std::uint64_t s : seeds) {
            Job j;
            j.config = base;
            j.config.snapshots = n;
            j.config.seed = s;
            jobs.push_back(std::move(j));
        }

    std::counting_semaphore<64> slots(std::min(workers, 64));
    std::vector<std::future<void>> futures;
    futures.reserve(jobs.size());
    for (auto& job : jobs)
        futures.push_back(std::async(std::launch::async, [&job, &exact, &slots] {
            slots.acquire();
            try {
                const OptimizeOutcome run = run_optimize(job.config);
                job.run_dir = run.run_dir;
                job.f = run.f;
                job.compare = run_compare(run.run_dir, exact.out_dir);
            } catch (...) {
                slots.release();
                throw;
            }
            slots.release();
        }));
    for (auto& f : futures) f.get();

    SweepOutcome out;
    const fs::path summary_path = fs::path(base.out_dir) / "sweep_summary.csv";
    std::ofstream csv(summary_path);
    csv << "N,seed,run_dir,f,energy_density_error_rescaled";
    for (int k : base.report_weights) csv << ",rms_k" << k << ",ref_k" << k;
    csv << "\n";
    for (const auto& job : jobs) {
        out.run_dirs.push_back(job.run_dir);
        csv << job.config.snapshots << "," << job.config.seed << "," << job.run_dir << ","
            << format_double(job.f) << ","
            << format_double(job.compare.energy_density_error_rescaled);
        for (int k : base.report_weights) {
            csv << "," << format_double(job.compare.rms_by_weight.at(k)) << ","
                << format_double(job.compare.shadow_reference_error.at(k));
        }
        csv << "\n";
    }
    out.summary_csv = summary_path.string();
    return out;
}

} // namespace shadow
