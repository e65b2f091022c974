#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "dfc/analysis.hpp"
#include "dfc/case_study.hpp"
#include "dfc/config.hpp"
#include "dfc/reproduce.hpp"
#include "dfc/simulator.hpp"
#include "dfc/spectrum.hpp"
#include "dfc/svg.hpp"
#include "dfc/tuner.hpp"

namespace {

// exit codes: 0 ok, 1 config error, 2 unstable, 3 divergence, 4 tune failure
enum ExitCode { kOk = 0, kConfigError = 1, kUnstable = 2, kDivergence = 3, kTuneFailure = 4 };

namespace fs = std::filesystem;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    bool plots = false;
    std::optional<unsigned long long> seed;
};

dfc::ExperimentConfig load(const CommonArgs& args) {
    dfc::ExperimentConfig cfg = dfc::load_config(args.config_path);
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.plots) cfg.plots = true;
    if (args.seed && cfg.tune) cfg.tune->seed = *args.seed;
    return cfg;
}

void require(bool condition, const std::string& message) {
    if (!condition) throw std::runtime_error(message);
}

int cmd_spectrum(const CommonArgs& args) {
    const dfc::ExperimentConfig cfg = load(args);
    require(cfg.plant.has_value(), "config: spectrum needs a plant section");
    require(cfg.controller.has_value(), "config: spectrum needs a controller section");
    const dfc::ClosedLoopDDE cl = dfc::build_closed_loop(*cfg.plant, *cfg.controller);
    const dfc::SpectrumResult spec = dfc::rightmost_roots(cl, dfc::kDefaultRootCount);
    fs::create_directories(cfg.out_dir);
    dfc::write_roots_csv(cfg.out_dir + "/roots.csv", spec);
    std::cout << "abscissa " << spec.abscissa << " (" << spec.roots.size()
              << " validated roots, N=" << spec.discretization_order << ")\n";
    return spec.abscissa < 0.0 ? kOk : kUnstable;
}

int cmd_simulate(const CommonArgs& args) {
    const dfc::ExperimentConfig cfg = load(args);
    require(cfg.plant.has_value(), "config: simulate needs a plant section");
    require(cfg.controller.has_value(), "config: simulate needs a controller section");
    const dfc::ClosedLoopDDE cl = dfc::build_closed_loop(*cfg.plant, *cfg.controller);
    const dfc::Trajectory traj =
        dfc::simulate(cl, *cfg.controller, cfg.r, cfg.d1, cfg.d2, cfg.horizon, cfg.step);
    fs::create_directories(cfg.out_dir);
    dfc::write_trajectory_csv(cfg.out_dir + "/trajectory.csv", traj);
    if (cfg.plots && traj.samples() > 1) {
        auto cols = [&](const dfc::Matrix& M, const char* base) {
            std::vector<dfc::PlotSeries> out;
            for (int j = 0; j < M.cols(); ++j)
                out.push_back({std::string(base) + std::to_string(j + 1), M.col(j)});
            return out;
        };
        dfc::write_svg_plot(cfg.out_dir + "/y.svg", "output", traj.times, cols(traj.Y, "y"));
        dfc::write_svg_plot(cfg.out_dir + "/u.svg", "control", traj.times, cols(traj.U, "u"));
        dfc::write_svg_plot(cfg.out_dir + "/e.svg", "tracking error", traj.times, cols(traj.E, "e"));
    }
    const dfc::SteadyState ss = dfc::steady_state_error(traj);
    if (traj.diverged) {
        std::cout << "diverged after " << traj.samples() << " samples (t = "
                  << (traj.samples() ? traj.times[traj.samples() - 1] : 0.0) << ")\n";
        return kDivergence;
    }
    std::cout << "simulated " << traj.samples() << " samples; steady-state error ";
    if (ss.settled) std::cout << ss.error.transpose() << "\n";
    else std::cout << "not settled\n";
    return kOk;
}

int cmd_tune(const CommonArgs& args) {
    const dfc::ExperimentConfig cfg = load(args);
    require(cfg.plant.has_value(), "config: tune needs a plant section");
    require(cfg.controller.has_value(), "config: tune needs a controller template");
    require(cfg.tune.has_value(), "config: tune needs a tune section");
    const dfc::AnnealResult result = dfc::anneal(*cfg.tune, *cfg.plant, *cfg.controller);
    fs::create_directories(cfg.out_dir);
    dfc::write_trace_csv(cfg.out_dir + "/tune_trace.csv", result.trace);
    {
        std::ofstream best(cfg.out_dir + "/best_controller.json.tmp");
        best << dfc::controller_json(result.best) << "\n";
    }
    fs::rename(cfg.out_dir + "/best_controller.json.tmp", cfg.out_dir + "/best_controller.json");
    std::cout << "best abscissa " << result.trace.best_cost << " after "
              << result.trace.records.size() << " iterations\n"
              << dfc::controller_json(result.best) << "\n";
    return result.success ? kOk : kTuneFailure;
}

int cmd_predict(const CommonArgs& args) {
    const dfc::ExperimentConfig cfg = load(args);
    require(cfg.plant.has_value(), "config: predict needs a plant section");
    require(cfg.controller.has_value(), "config: predict needs a controller section");
    const dfc::SpectrumResult spec =
        dfc::rightmost_roots(dfc::build_closed_loop(*cfg.plant, *cfg.controller), 5);
    if (!(spec.abscissa < 0.0)) {
        std::cout << "closed loop unstable (abscissa " << spec.abscissa
                  << "); predictions need a stable loop\n";
        return kUnstable;
    }
    const dfc::PredictionReport rep = dfc::predict(*cfg.plant, *cfg.controller);
    std::cout << "det(I + K2 tau_q) = " << rep.condition_det
              << (rep.condition_full ? " (I + K2 tau_q = 0)" : "") << "\n"
              << "d1 rejected up to Laplace order " << rep.d1_max_rejected_laplace_order << "\n"
              << "d2 step rejected: " << (rep.d2_step_rejected ? "yes" : "no")
              << ", ramp rejected: " << (rep.d2_ramp_rejected ? "yes" : "no") << "\n"
              << "ramp reference tracked: " << (rep.ramp_reference_tracked ? "yes" : "no") << "\n";
    if (rep.d1_ss_error)
        std::cout << "d1 order " << rep.d1_max_rejected_laplace_order + 1
                  << " settles at e = " << rep.d1_ss_error->transpose() << "\n";
    if (rep.d2_ramp_ss_error)
        std::cout << "d2 ramp settles at e = " << rep.d2_ramp_ss_error->transpose() << "\n";
    if (rep.ramp_tracking_error)
        std::cout << "ramp reference error settles at e = " << rep.ramp_tracking_error->transpose()
                  << "\n";
    return kOk;
}

int cmd_reproduce(const CommonArgs& args) {
    dfc::ReproduceOptions opt;
    opt.out_dir = args.out_dir.empty() ? "out" : args.out_dir;
    opt.plots = args.plots;
    const dfc::ReproduceReport report = dfc::run_acceptance(opt);
    std::cout << report.table.formatted() << "\n" << report.summary();
    std::cout << "artifacts written to " << opt.out_dir << "\n";
    return report.all_pass() ? kOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"delayed-feedback tracking controller toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    auto add_common = [&](CLI::App* sub, bool needs_config) {
        if (needs_config)
            sub->add_option("--config", args.config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", args.out_dir, "output directory (overrides config)");
        sub->add_flag("--plots", args.plots, "emit SVG line plots");
        sub->add_option("--seed", [&args](const CLI::results_t& res) {
            args.seed = std::stoull(res[0]);
            return true;
        }, "override the tuning seed");
    };

    auto* spectrum = app.add_subcommand("spectrum", "rightmost characteristic roots");
    add_common(spectrum, true);
    auto* simulate = app.add_subcommand("simulate", "integrate the closed loop");
    add_common(simulate, true);
    auto* tune = app.add_subcommand("tune", "simulated-annealing parameter search");
    add_common(tune, true);
    auto* predict = app.add_subcommand("predict", "analytic rejection/tracking report");
    add_common(predict, true);
    auto* reproduce = app.add_subcommand("reproduce", "run the bundled case study end to end");
    add_common(reproduce, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (spectrum->parsed()) return cmd_spectrum(args);
        if (simulate->parsed()) return cmd_simulate(args);
        if (tune->parsed()) return cmd_tune(args);
        if (predict->parsed()) return cmd_predict(args);
        if (reproduce->parsed()) return cmd_reproduce(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
    return kConfigError;
}
