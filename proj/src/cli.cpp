#include "covband/cli.hpp"

#include "covband/analysis.hpp"
#include "covband/config.hpp"
#include "covband/env.hpp"
#include "covband/errors.hpp"
#include "covband/schedule.hpp"
#include "covband/sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace covband {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

unsigned default_workers() {
    if (const char* env = std::getenv("COVBAND_WORKERS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
        throw ValidationError("COVBAND_WORKERS must be a positive integer");
    }
    return 1;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open config file '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
    out << contents;
    if (!out) {
        throw Error("failed writing '" + path.string() + "'");
    }
}

template <class Fn>
std::string render(Fn&& fn) {
    std::ostringstream ss;
    fn(ss);
    return ss.str();
}

json nullable(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

struct RunOutputs {
    fs::path dir;
    std::vector<std::string> files;

    void put(const std::string& name, const std::string& contents) {
        write_file(dir / name, contents);
        files.push_back(name);
    }
};

void finish_run(RunOutputs& outputs, const ExperimentConfig& cfg,
                std::chrono::steady_clock::time_point start) {
    RunManifest manifest;
    manifest.config_digest = config_digest(cfg);
    manifest.tool_version = kToolVersion;
    manifest.master_seed = cfg.master_seed;
    manifest.outputs = outputs.files;
    manifest.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_file(outputs.dir / "manifest.json", to_json(manifest));
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::optional<unsigned> workers, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    const ExperimentConfig cfg = parse_config(read_file(config_path));
    const ExperimentResult result =
        run_experiment(cfg, RunOptions{workers.value_or(default_workers())});
    RunOutputs outputs{out_dir, {}};
    fs::create_directories(outputs.dir);
    outputs.put("aggregate.csv",
                render([&](std::ostream& o) { write_aggregate_csv(o, result.aggregate); }));
    if (cfg.record_trajectories) {
        outputs.put("replications.csv",
                    render([&](std::ostream& o) { write_replication_csv(o, result); }));
    }
    finish_run(outputs, cfg, start);
    err << "covband: wrote " << outputs.files.size() << " data file(s) to " << out_dir << '\n';
    return kExitOk;
}

int cmd_replicate(const std::string& setup, std::uint64_t reps, std::uint64_t seed,
                  const std::string& out_dir, std::optional<unsigned> workers,
                  std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    if (reps < 1) {
        throw ValidationError("--reps must be >= 1");
    }
    const ExperimentConfig cfg = reference_setup(setup, reps, seed);
    const ExperimentResult result =
        run_experiment(cfg, RunOptions{workers.value_or(default_workers())});
    RunOutputs outputs{out_dir, {}};
    fs::create_directories(outputs.dir);
    outputs.put("aggregate.csv",
                render([&](std::ostream& o) { write_aggregate_csv(o, result.aggregate); }));
    outputs.put("plot_regret.csv", render([&](std::ostream& o) {
                    write_plot_csv(o, result.aggregate, Metric::regret);
                }));
    outputs.put("plot_tinf.csv", render([&](std::ostream& o) {
                    write_plot_csv(o, result.aggregate, Metric::t_inf);
                }));
    finish_run(outputs, cfg, start);
    err << "covband: setup (" << setup << "), " << reps << " replications -> " << out_dir << '\n';
    return kExitOk;
}

int cmd_schedule(double q, std::uint64_t horizon, std::ostream& out) {
    const ForcedSchedule schedule = build_schedule(q, horizon);
    const ScheduleThresholds th = thresholds(q);
    out << "index,tau,count,upper_bound,lower_bound\n";
    std::size_t index = 1;
    for (std::uint64_t tau : schedule.times()) {
        out << index++ << ',' << tau << ',' << schedule.count_through(tau) << ','
            << format_real(count_upper_bound(q, tau)) << ',';
        if (static_cast<double>(tau) > th.nu) {
            out << format_real(count_lower_bound(q, th.nu, tau));
        }
        out << '\n';
    }
    return kExitOk;
}

json rate_json(double alpha) {
    json out;
    for (auto [name, kind] : {std::pair{"nearly_myopic", PolicyKind::nearly_myopic},
                              std::pair{"forced", PolicyKind::forced_sampling}}) {
        out[name] = {
            {"isr", rate_descriptor(kind, MetricKind::inferior_sampling, alpha).to_string()},
            {"regret", rate_descriptor(kind, MetricKind::regret, alpha).to_string()}};
    }
    return out;
}

int cmd_bounds(double alpha, double c_star, double sigma, std::optional<double> x0,
               const std::vector<std::uint64_t>& ns, std::ostream& out) {
    if (!(alpha > 0.0) || !(c_star > 0.0) || !(sigma >= 0.0)) {
        throw ValidationError("bounds: alpha and c-star must be positive, sigma nonnegative");
    }
    for (std::uint64_t n : ns) {
        const double nd = static_cast<double>(n);
        std::optional<double> isr;
        std::optional<double> regret;
        if (alpha <= 2.0) {
            isr = isr_lower_bound(alpha, c_star, sigma, nd);
        }
        if (alpha <= 1.0 && x0) {
            regret = regret_lower_bound(alpha, c_star, sigma, *x0, nd);
        }
        json rec{{"alpha", alpha},
                 {"c_star", c_star},
                 {"sigma", sigma},
                 {"x0", nullable(x0)},
                 {"n", n},
                 {"isr_lower_bound", nullable(isr)},
                 {"regret_lower_bound", nullable(regret)},
                 {"upper_rates", rate_json(alpha)}};
        out << rec.dump() << '\n';
    }
    return kExitOk;
}

struct MarginArgs {
    std::string family;
    double theta = 0.0;
    std::optional<double> lo, hi, x_minus, x_plus, prob_plus, alpha, center, half_width, c_star,
        x0, delta;
};

double need(const std::optional<double>& v, const char* flag) {
    if (!v) {
        throw ValidationError(std::string("margin: missing ") + flag);
    }
    return *v;
}

int cmd_margin(const MarginArgs& a, std::ostream& out) {
    CovariateDistribution dist;
    if (a.family == "uniform") {
        dist = Uniform{need(a.lo, "--lo"), need(a.hi, "--hi")};
    } else if (a.family == "two_point") {
        dist = TwoPoint{need(a.x_minus, "--x-minus"), need(a.x_plus, "--x-plus"),
                        need(a.prob_plus, "--prob-plus")};
    } else if (a.family == "power_margin") {
        dist = PowerMargin{need(a.alpha, "--alpha"), a.center.value_or(0.0),
                           need(a.half_width, "--half-width")};
    } else if (a.family == "adversarial_margin") {
        AdversarialMargin d;
        d.alpha = need(a.alpha, "--alpha");
        d.c_star = need(a.c_star, "--c-star");
        d.x0 = need(a.x0, "--x0");
        d.delta = need(a.delta, "--delta");
        d.atom_left = -(d.x0 + 1.0);
        d.atom_right = d.delta + d.x0 + 1.0;
        dist = d;
    } else {
        throw ValidationError("margin: unknown family '" + a.family + "'");
    }
    validate(dist);
    const MarginParams m = margin_params(dist, a.theta);
    json rec{{"family", family_name(dist)},
             {"theta", a.theta},
             {"alpha", std::isinf(m.alpha) ? json("inf") : json(m.alpha)},
             {"c_star", m.c_star},
             {"x0", m.x0},
             {"p", m.p},
             {"p1", m.p1},
             {"mu", nullable(m.mu)}};
    out << rec.dump() << '\n';
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"covband: covariate one-armed bandit simulator and bound calculator"};
    app.require_subcommand(1);

    std::optional<unsigned> workers;

    auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
    std::string config_path;
    std::string run_out = "covband_run";
    run->add_option("config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--out", run_out, "Output directory");
    run->add_option("--workers", workers, "Worker threads (default: COVBAND_WORKERS or 1)")
        ->check(CLI::PositiveNumber);

    auto* rep = app.add_subcommand("replicate-paper", "Run a built-in reference setup end to end");
    std::string setup;
    std::uint64_t reps = 500;
    std::uint64_t seed = 2009;
    std::string rep_out;
    rep->add_option("setup", setup, "Setup: i (uniform covariate) or ii (two-point covariate)")
        ->required()
        ->check(CLI::IsMember({"i", "ii"}));
    rep->add_option("--reps", reps, "Replications");
    rep->add_option("--seed", seed, "Master seed");
    rep->add_option("--out", rep_out, "Output directory (default: setup_<i|ii>)");
    rep->add_option("--workers", workers, "Worker threads (default: COVBAND_WORKERS or 1)")
        ->check(CLI::PositiveNumber);

    auto* sch = app.add_subcommand("schedule", "Print the forced-sampling schedule as CSV");
    double q = 0.0;
    std::uint64_t horizon = 0;
    sch->add_option("--q", q, "Schedule rate q")->required()->check(CLI::PositiveNumber);
    sch->add_option("--horizon", horizon, "Horizon")->required()->check(CLI::PositiveNumber);

    auto* bnd = app.add_subcommand("bounds", "Print lower bounds and upper rates as JSON lines");
    double alpha = 0.0, c_star = 0.0, sigma = 0.0;
    std::optional<double> x0;
    std::vector<std::uint64_t> ns;
    bnd->add_option("--alpha", alpha, "Margin exponent")->required();
    bnd->add_option("--c-star", c_star, "Margin constant")->required();
    bnd->add_option("--sigma", sigma, "Noise standard deviation")->required();
    bnd->add_option("--x0", x0, "Margin radius x0");
    bnd->add_option("--n", ns, "Horizon(s)")->required()->delimiter(',');

    auto* mrg = app.add_subcommand("margin", "Certify a covariate law around theta");
    MarginArgs margin;
    mrg->add_option("--family", margin.family, "uniform|two_point|power_margin|adversarial_margin")
        ->required();
    mrg->add_option("--theta", margin.theta, "Decision boundary")->required();
    mrg->add_option("--lo", margin.lo);
    mrg->add_option("--hi", margin.hi);
    mrg->add_option("--x-minus", margin.x_minus);
    mrg->add_option("--x-plus", margin.x_plus);
    mrg->add_option("--prob-plus", margin.prob_plus);
    mrg->add_option("--alpha", margin.alpha);
    mrg->add_option("--center", margin.center);
    mrg->add_option("--half-width", margin.half_width);
    mrg->add_option("--c-star", margin.c_star);
    mrg->add_option("--x0", margin.x0);
    mrg->add_option("--delta", margin.delta);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run) {
            return cmd_run(config_path, run_out, workers, err);
        }
        if (*rep) {
            return cmd_replicate(setup, reps, seed, rep_out.empty() ? "setup_" + setup : rep_out,
                                 workers, err);
        }
        if (*sch) {
            return cmd_schedule(q, horizon, out);
        }
        if (*bnd) {
            return cmd_bounds(alpha, c_star, sigma, x0, ns, out);
        }
        if (*mrg) {
            return cmd_margin(margin, out);
        }
    } catch (const ParseError& e) {
        err << "covband: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ValidationError& e) {
        err << "covband: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        err << "covband: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NotCertifiable& e) {
        err << "covband: " << e.what() << '\n';
        return kExitUsage;
    } catch (const OutOfRange& e) {
        err << "covband: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "covband: internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}

} // namespace covband
