#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shadow/errors.hpp"
#include "shadow/runner.hpp"
#include "shadow/version.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
    std::string config_path;
    std::string model;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int sites = 0, snapshots = 0, epochs = 0, threads = -1;
    double x_eps = 0.0, lr0 = 0.0;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "JSON run configuration");
        app->add_option("--model", model, "builtin model name (main, H1, H2, H3) or model file");
        app->add_option("--out", out_dir, "output directory");
        app->add_option("--seed", seed, "master RNG seed")->each([this](const std::string&) {
            seed_set = true;
        });
        app->add_option("-L,--sites", sites, "chain length");
        app->add_option("-N,--snapshots", snapshots, "snapshot count");
        app->add_option("-T,--epochs", epochs, "main-phase epochs");
        app->add_option("--x-eps", x_eps, "target constraint relaxation scale");
        app->add_option("--lr", lr0, "initial learning rate");
        app->add_option("--workers,--threads", threads, "worker threads (0 = all cores)");
    }

    shadow::RunConfig resolve() const {
        shadow::RunConfig c;
        if (!config_path.empty()) c = shadow::load_config(config_path);
        if (!model.empty()) c.model = model;
        if (!out_dir.empty()) c.out_dir = out_dir;
        if (seed_set) c.seed = seed;
        if (sites > 0) c.sites = sites;
        if (snapshots > 0) c.snapshots = snapshots;
        if (epochs > 0) c.epochs = epochs;
        if (x_eps > 0.0) c.x_eps_target = x_eps;
        if (lr0 > 0.0) c.lr0 = lr0;
        if (threads >= 0) c.threads = threads;
        return c;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"variational classical-shadow ground-state solver"};
    app.set_version_flag("--version", shadow::kVersion);
    app.require_subcommand(1);

    CommonFlags opt_flags, exact_flags, sweep_flags;

    auto* cmd_optimize = app.add_subcommand("optimize", "run the two-phase optimization");
    opt_flags.attach(cmd_optimize);

    auto* cmd_exact = app.add_subcommand("exact", "exact ground-state correlators (L <= 14)");
    exact_flags.attach(cmd_exact);

    auto* cmd_compare = app.add_subcommand("compare", "compare a run against an exact table");
    std::string compare_run, compare_exact;
    cmd_compare->add_option("--run", compare_run, "run directory")->required();
    cmd_compare->add_option("--exact", compare_exact, "exact directory or exact.csv")->required();

    auto* cmd_floor = app.add_subcommand("floor-fit", "fit the eigenvalue-floor ansatz");
    std::vector<int> floor_sites{4, 6, 8};
    std::vector<int> floor_snapshots{4096, 16384};
    std::uint64_t floor_seed = 1;
    std::string floor_out = "runs/floor-fit";
    int floor_threads = 0;
    cmd_floor->add_option("-L,--sites", floor_sites, "chain lengths");
    cmd_floor->add_option("-N,--snapshots", floor_snapshots, "snapshot counts");
    cmd_floor->add_option("--seed", floor_seed, "master RNG seed");
    cmd_floor->add_option("--out", floor_out, "output directory");
    cmd_floor->add_option("--workers,--threads", floor_threads, "worker threads");

    auto* cmd_sweep = app.add_subcommand("sweep", "optimize+compare over N and seed lists");
    sweep_flags.attach(cmd_sweep);
    std::vector<int> sweep_snapshots;
    std::vector<std::uint64_t> sweep_seeds{1};
    int sweep_workers = 1;
    cmd_sweep->add_option("--N-list", sweep_snapshots, "snapshot counts")->required();
    cmd_sweep->add_option("--seed-list", sweep_seeds, "seeds");
    cmd_sweep->add_option("--run-workers", sweep_workers, "concurrent runs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_optimize->parsed()) {
            const auto out = shadow::run_optimize(opt_flags.resolve());
            std::cout << "run directory: " << out.run_dir << "\n"
                      << "preopt steps: " << out.preopt_steps << "\n"
                      << "final energy: " << out.final_energy << "\n"
                      << "final lambda_min: " << out.final_lambda_min << " (floor -" << out.eps
                      << ")\n"
                      << "amplitude factor f: " << out.f << "\n";
        } else if (cmd_exact->parsed()) {
            const auto out = shadow::run_exact(exact_flags.resolve());
            std::cout << "exact directory: " << out.out_dir << "\n"
                      << "ground energy: " << out.energy
                      << (out.degenerate ? " (degenerate)" : "") << "\n";
        } else if (cmd_compare->parsed()) {
            const auto out = shadow::run_compare(compare_run, compare_exact);
            std::cout << "report directory: " << out.out_dir << "\n"
                      << "energy density error (rescaled): " << out.energy_density_error_rescaled
                      << "\n";
            for (const auto& [k, v] : out.rms_by_weight)
                std::cout << "rms error, contiguous weight " << k << ": " << v
                          << " (shadow reference " << out.shadow_reference_error.at(k) << ")\n";
        } else if (cmd_floor->parsed()) {
            const auto out =
                shadow::run_floor_fit(floor_sites, floor_snapshots, floor_seed, floor_out,
                                      floor_threads);
            std::cout << "alpha0 = " << out.floor.alpha0 << ", b0 = " << out.floor.b0
                      << " (residual sigma " << out.residual_sigma << ")\n"
                      << "wrote " << out.out_dir << "/floor.json\n";
        } else if (cmd_sweep->parsed()) {
            const auto out = shadow::run_sweep(sweep_flags.resolve(), sweep_snapshots,
                                               sweep_seeds, sweep_workers);
            std::cout << "sweep summary: " << out.summary_csv << "\n";
        }
    } catch (const shadow::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const shadow::BarrierDomainError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const shadow::StalledOptimizationError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const shadow::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
