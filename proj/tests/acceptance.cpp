// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "covband/analysis.hpp"
#include "covband/config.hpp"
#include "covband/env.hpp"
#include "covband/errors.hpp"
#include "covband/schedule.hpp"
#include "covband/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace covband;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("violated: ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

unsigned workers() {
    return std::max(1U, std::thread::hardware_concurrency());
}

const std::string kMyopic = "myopic";
const std::string kNearly = "nearly_myopic(c=1)";
const std::string kForced = "forced(q=0.0833333)";
constexpr std::uint64_t kReps = 500;
constexpr std::uint64_t kSeed = 2009;

// Setup (ii) with two extra policies so the identity covers everything implemented.
const ExperimentResult& setup_ii() {
    static const ExperimentResult result = [] {
        ExperimentConfig cfg = reference_setup("ii", kReps, kSeed);
        cfg.policies.push_back(OraclePolicy{cfg.instance.theta});
        cfg.policies.push_back(theory_nearly_myopic(cfg.instance.sigma));
        return run_experiment(cfg, {workers()});
    }();
    return result;
}

const ExperimentResult& setup_i() {
    static const ExperimentResult result =
        run_experiment(reference_setup("i", kReps, kSeed), {workers()});
    return result;
}

Verdict two_point_identity() {
    Verdict v;
    const ExperimentResult& res = setup_ii();
    std::uint64_t compared = 0;
    std::uint64_t mismatched = 0;
    for (const auto& per_policy : res.metrics) {
        for (const auto& ep : per_policy) {
            for (const auto& cp : ep) {
                ++compared;
                mismatched += cp.cum_regret == static_cast<double>(cp.t_inf) ? 0 : 1;
            }
        }
    }
    v.check(mismatched == 0, std::to_string(mismatched) + " checkpoints differ");
    v.note(std::to_string(compared) + " checkpoints over " +
           std::to_string(res.policy_labels.size()) + " policies compared exactly");
    return v;
}

// a < b with the gap exceeding two combined standard errors.
bool separated(double a, double se_a, double b, double se_b) {
    return b - a > 2.0 * std::hypot(se_a, se_b);
}

Verdict uniform_ordering() {
    Verdict v;
    const AggregateStats& agg = setup_i().aggregate;
    for (std::uint64_t n : {2000u, 5000u}) {
        const AggregateRow& f = agg.at(kForced, n);
        const AggregateRow& nm = agg.at(kNearly, n);
        const AggregateRow& my = agg.at(kMyopic, n);
        const std::string at = " at n=" + std::to_string(n);
        v.check(separated(f.mean_tinf, f.se_tinf, nm.mean_tinf, nm.se_tinf),
                "ISR forced < nearly_myopic" + at + fmt(" (%.2f", f.mean_tinf) +
                    fmt(" vs %.2f)", nm.mean_tinf));
        v.check(separated(nm.mean_tinf, nm.se_tinf, my.mean_tinf, my.se_tinf),
                "ISR nearly_myopic < myopic" + at + fmt(" (%.2f", nm.mean_tinf) +
                    fmt(" vs %.2f)", my.mean_tinf));
        v.check(separated(f.mean_regret, f.se_regret, nm.mean_regret, nm.se_regret),
                "regret forced < nearly_myopic" + at + fmt(" (%.2f", f.mean_regret) +
                    fmt(" vs %.2f)", nm.mean_regret));
        v.check(separated(nm.mean_regret, nm.se_regret, my.mean_regret, my.se_regret),
                "regret nearly_myopic < myopic" + at + fmt(" (%.2f", nm.mean_regret) +
                    fmt(" vs %.2f)", my.mean_regret));
    }
    const AggregateRow& f = agg.at(kForced, 5000);
    const AggregateRow& nm = agg.at(kNearly, 5000);
    const AggregateRow& my = agg.at(kMyopic, 5000);
    v.note(fmt("n=5000 regret forced %.2f", f.mean_regret) + fmt(" nm %.2f", nm.mean_regret) +
           fmt(" myopic %.2f", my.mean_regret) + fmt("; ISR forced %.1f", f.mean_tinf) +
           fmt(" nm %.1f", nm.mean_tinf) + fmt(" myopic %.1f", my.mean_tinf));
    return v;
}

Verdict two_point_regimes() {
    Verdict v;
    const AggregateStats& agg = setup_ii().aggregate;
    const AggregateRow& nm1 = agg.at(kNearly, 1000);
    const AggregateRow& nm5 = agg.at(kNearly, 5000);
    const AggregateRow& f1 = agg.at(kForced, 1000);
    const AggregateRow& f5 = agg.at(kForced, 5000);
    // Every point inside the +-2se boxes must satisfy the claim.
    const double plateau_gap = (nm5.mean_regret + 2.0 * nm5.se_regret) -
                               (nm1.mean_regret - 2.0 * nm1.se_regret);
    const double plateau_cap = 0.25 * (nm1.mean_regret - 2.0 * nm1.se_regret);
    v.check(plateau_gap < plateau_cap, "nearly_myopic plateau" + fmt(" (growth %.3f", plateau_gap) +
                                           fmt(" vs cap %.3f)", plateau_cap));
    const double growth = (f5.mean_regret - 2.0 * f5.se_regret) /
                          (f1.mean_regret + 2.0 * f1.se_regret);
    v.check(growth > 1.3, "forced growth factor > 1.3" + fmt(" (worst case %.4f)", growth));
    v.note(fmt("nm regret %.3f", nm1.mean_regret) + fmt("+-%.3f", nm1.se_regret) +
           fmt(" -> %.3f", nm5.mean_regret) + fmt("+-%.3f", nm5.se_regret) +
           fmt("; forced %.2f", f1.mean_regret) + fmt("+-%.2f", f1.se_regret) +
           fmt(" -> %.2f", f5.mean_regret) + fmt("+-%.2f", f5.se_regret) +
           fmt(" (mean ratio %.4f)", f5.mean_regret / f1.mean_regret));
    return v;
}

std::vector<GrowthPoint> isr_curve(const AggregateStats& agg, const std::string& policy,
                                   const std::vector<std::uint64_t>& horizons) {
    std::vector<GrowthPoint> pts;
    for (std::uint64_t n : horizons) {
        pts.push_back({static_cast<double>(n), agg.at(policy, n).mean_tinf});
    }
    return pts;
}

Verdict growth_fits() {
    Verdict v;
    const auto uniform = isr_curve(setup_i().aggregate, kForced, setup_i().horizons);
    const GrowthFit power = fit_model(uniform, GrowthModel::power_times_polylog);
    v.check(power.exponent() >= 0.35 && power.exponent() <= 0.65,
            "setup (i) exponent in [0.35, 0.65]" + fmt(" (%.4f)", power.exponent()));
    v.check(power.r_squared >= 0.9, "setup (i) r^2 >= 0.9" + fmt(" (%.5f)", power.r_squared));
    const auto two_point = isr_curve(setup_ii().aggregate, kForced, setup_ii().horizons);
    const GrowthFit best = fit_growth(two_point);
    v.check(best.model == GrowthModel::log,
            "setup (ii) selects log (selected " + to_string(best.model) + ")");
    v.note(fmt("setup (i) exponent %.4f", power.exponent()) + fmt(" r^2 %.5f", power.r_squared) +
           "; setup (ii) selected " + to_string(best.model) + fmt(" r^2 %.5f", best.r_squared));
    return v;
}

Verdict estimator_concentration() {
    Verdict v;
    const BanditInstance inst = reference_setup("i", 1, kSeed).instance;
    const PolicySpec policy = NearlyMyopicPolicy{1.0, inst.sigma};
    constexpr std::uint64_t kEpisodes = 100'000;
    const std::uint64_t checkpoint[] = {200};
    std::vector<double> err(kEpisodes);
    std::vector<std::uint64_t> pulls(kEpisodes);
    // Chunked over threads; each episode has its own deterministic stream.
    const unsigned w = workers();
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < w; ++k) {
        pool.emplace_back([&, k] {
            for (std::uint64_t r = k; r < kEpisodes; r += w) {
                UniformStream stream(kSeed + 1, r);
                const Checkpoint cp =
                    run_episode(inst, policy, checkpoint, stream).checkpoints[0];
                err[r] = std::abs(*cp.theta_hat - inst.theta);
                pulls[r] = cp.pulls;
            }
        });
    }
    for (auto& t : pool) t.join();

    double worst_margin = INFINITY;
    for (double x : {0.25, 0.5, 1.0}) {
        for (double tau : {25.0, 50.0, 100.0}) {
            std::uint64_t hits = 0;
            for (std::uint64_t r = 0; r < kEpisodes; ++r) {
                hits += (err[r] > x && static_cast<double>(pulls[r]) > tau) ? 1 : 0;
            }
            const double p = static_cast<double>(hits) / kEpisodes;
            const double allowed =
                concentration_bound(x, tau, inst.sigma) + 3.0 * std::sqrt(p * (1.0 - p) / kEpisodes);
            worst_margin = std::min(worst_margin, allowed - p);
            v.check(p <= allowed, fmt("x=%.2f", x) + fmt(" tau=%.0f", tau) + fmt(": %.5f", p) +
                                      fmt(" > %.5f", allowed));
        }
    }
    v.note("1e5 episodes at t=200, 9 (x, tau) pairs" + fmt(", smallest slack %.3g", worst_margin));
    return v;
}

Verdict schedule_bounds() {
    Verdict v;
    const std::uint64_t horizon = 5000;
    for (auto [name, q] : {std::pair{"1/12", 1.0 / 12.0}, std::pair{"1", 1.0},
                           std::pair{"ln 2", std::numbers::ln2}}) {
        const ForcedSchedule s = build_schedule(q, horizon);
        const double nu = thresholds(q).nu;
        std::vector<std::uint64_t> upper_bad;
        std::vector<std::uint64_t> lower_bad;
        for (std::uint64_t t = 1; t <= horizon; ++t) {
            const double count = static_cast<double>(s.count_through(t));
            if (count > count_upper_bound(q, t)) upper_bad.push_back(t);
            if (static_cast<double>(t) > nu && count < count_lower_bound(q, nu, t)) {
                lower_bad.push_back(t);
            }
        }
        auto list = [](const std::vector<std::uint64_t>& ts) {
            std::string out;
            for (std::size_t i = 0; i < std::min<std::size_t>(ts.size(), 5); ++i) {
                out += (i ? "," : "") + std::to_string(ts[i]);
            }
            return out + (ts.size() > 5 ? ",..." : "");
        };
        v.check(upper_bad.empty(), std::string("q=") + name + " upper bound fails at t=" +
                                       list(upper_bad) + " (N(t) = 1 from tau_1 = 1)");
        v.check(lower_bad.empty(), std::string("q=") + name + " lower bound fails at t=" +
                                       list(lower_bad));
    }
    const ForcedSchedule unit_rate = build_schedule(1.0, horizon);
    const auto times = unit_rate.times();
    const std::vector<std::uint64_t> prefix{1, 7, 20, 54, 148};
    v.check(times.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), times.begin()),
            "times(q=1) prefix {1,7,20,54,148}");
    v.note("exhaustive over t in [1, 5000] for q in {1/12, 1, ln 2}");
    return v;
}

// Policies that learn theta from data; the oracle is given theta and is excluded.
std::vector<PolicySpec> learning_policies(std::uint64_t horizon, double sigma) {
    return {MyopicPolicy{}, NearlyMyopicPolicy{1.0, sigma}, theory_nearly_myopic(sigma),
            ForcedSamplingPolicy{build_schedule(1.0 / 12.0, horizon)}};
}

struct AdversarialRuns {
    AdversarialPair pair;
    ExperimentResult null_result;
    ExperimentResult alternative_result;
};

constexpr double kAdvAlpha = 1.0;
constexpr double kAdvCStar = 1.0;
constexpr double kAdvX0 = 0.45;
constexpr double kAdvSigma = 1.0;
constexpr std::uint64_t kAdvN = 400;

const AdversarialRuns& adversarial() {
    static const AdversarialRuns runs = [] {
        AdversarialRuns out;
        out.pair = adversarial_pair(kAdvAlpha, kAdvCStar, kAdvX0, kAdvSigma, kAdvN);
        ExperimentConfig cfg;
        cfg.policies = learning_policies(kAdvN, kAdvSigma);
        cfg.horizons = {kAdvN};
        cfg.replications = 2000;
        cfg.master_seed = kSeed + 7;
        cfg.instance = out.pair.null_instance;
        out.null_result = run_experiment(cfg, {workers()});
        cfg.instance = out.pair.alternative_instance;
        out.alternative_result = run_experiment(cfg, {workers()});
        return out;
    }();
    return runs;
}

Verdict minimax_floor() {
    Verdict v;
    const AdversarialRuns& runs = adversarial();
    const double bound = isr_lower_bound(kAdvAlpha, kAdvCStar, kAdvSigma, double(kAdvN));
    for (const std::string& label : runs.null_result.policy_labels) {
        const AggregateRow& a = runs.null_result.aggregate.at(label, kAdvN);
        const AggregateRow& b = runs.alternative_result.aggregate.at(label, kAdvN);
        const AggregateRow& worst = a.mean_tinf >= b.mean_tinf ? a : b;
        v.check(worst.mean_tinf + 3.0 * worst.se_tinf >= bound,
                label + fmt(" worst ISR %.3f", worst.mean_tinf) + fmt(" + 3se < %.4f", bound));
        v.note(label + fmt(" worst mean ISR %.2f", worst.mean_tinf));
    }
    v.note(fmt("bound isr_lower_bound(1,1,1,400) = %.6f", bound) +
           fmt(", delta* = %.4f", runs.pair.delta_star));
    return v;
}

void check_regret_floor(Verdict& v, const AggregateStats& agg, const MarginParams& m,
                  const std::string& where, int& checked) {
    for (const AggregateRow& row : agg.rows) {
        const double s = std::max(0.0, row.mean_tinf - 3.0 * row.se_tinf);
        const double floor = regret_floor(s, double(row.horizon), m.alpha, m.c_star, m.x0);
        ++checked;
        v.check(row.mean_regret + 3.0 * row.se_regret >= floor,
                where + " " + row.policy + " n=" + std::to_string(row.horizon) +
                    fmt(": regret %.4f", row.mean_regret) + fmt(" < floor %.4f", floor));
    }
}

Verdict regret_floor_check() {
    Verdict v;
    int checked = 0;
    const ExperimentConfig i = reference_setup("i", 1, kSeed);
    check_regret_floor(v, setup_i().aggregate, margin_params(i.instance.covariate, i.instance.theta),
                 "setup (i)", checked);
    const AdversarialRuns& runs = adversarial();
    check_regret_floor(v, runs.null_result.aggregate,
                 margin_params(runs.pair.null_instance.covariate, runs.pair.null_instance.theta),
                 "adversarial null", checked);
    check_regret_floor(v, runs.alternative_result.aggregate,
                 margin_params(runs.pair.alternative_instance.covariate,
                               runs.pair.alternative_instance.theta),
                 "adversarial alternative", checked);
    v.note(std::to_string(checked) + " (policy, horizon) rows checked");
    return v;
}

std::string all_csv(const ExperimentResult& r) {
    std::ostringstream out;
    write_aggregate_csv(out, r.aggregate);
    write_replication_csv(out, r);
    write_plot_csv(out, r.aggregate, Metric::regret);
    write_plot_csv(out, r.aggregate, Metric::t_inf);
    return out.str();
}

Verdict determinism() {
    Verdict v;
    for (const char* setup : {"i", "ii"}) {
        ExperimentConfig cfg = reference_setup(setup, 64, kSeed);
        cfg.policies.push_back(OraclePolicy{cfg.instance.theta});
        const std::string base = all_csv(run_experiment(cfg, {1}));
        for (unsigned w : {4u, 16u}) {
            v.check(all_csv(run_experiment(cfg, {w})) == base,
                    std::string("setup (") + setup + ") workers=" + std::to_string(w) +
                        " output differs from workers=1");
        }
    }
    std::uint64_t decisions = 0;
    for (const char* setup : {"i", "ii"}) {
        const BanditInstance inst = reference_setup(setup, 1, kSeed).instance;
        const std::uint64_t horizon[] = {5000};
        for (std::uint64_t r = 0; r < 100; ++r) {
            UniformStream a(kSeed, r);
            UniformStream b(kSeed, r);
            const auto zero = run_episode(inst, NearlyMyopicPolicy{0.0, inst.sigma}, horizon, a,
                                          {true});
            const auto myopic = run_episode(inst, MyopicPolicy{}, horizon, b, {true});
            decisions += zero.decisions.size();
            if (zero.decisions != myopic.decisions) {
                v.check(false, std::string("c=0 differs from myopic in setup (") + setup +
                                   ") replication " + std::to_string(r));
                break;
            }
        }
    }
    v.note("CSV byte-identical for workers {1,4,16}; " + std::to_string(decisions) +
           " c=0 vs myopic decisions compared");
    return v;
}

Verdict evaluator_values() {
    Verdict v;
    auto near = [&](double got, double want, double tol, const std::string& what) {
        v.check(std::abs(got - want) <= tol, what + fmt(" = %.17g", got) + fmt(" (want %.17g)", want));
    };
    auto equal = [&](double got, double want, const std::string& what) {
        v.check(got == want, what + fmt(" = %.17g", got) + fmt(" (want %.17g)", want));
    };
    near(isr_lower_bound(2.0, 1.0, 1.0, 50.0), 1.0 / (8.0 * std::numbers::e), 1e-12,
         "isr_lower_bound(2,1,1,n)");
    near(concentration_bound(1.0, 4.0, 1.0), 2.0 / std::numbers::e, 1e-12,
         "concentration_bound(1,4,1)");
    equal(thresholds(std::numbers::ln2).nu, 2.0, "nu(ln 2)");

    // Values recomputed by the high-precision oracle script.
    near(isr_lower_bound(2.0, 1.0, 1.0, 1.0), 0.045984930146430290199, 1e-12, "isr_lb(2,1,1)");
    near(isr_lower_bound(1.0, 1.0, 1.0, 100.0), 0.5361024281004417478, 1e-12, "isr_lb(1,1,1,100)");
    near(isr_lower_bound(1.0, 1.0, 1.0, 400.0), 1.0722048562008834956, 1e-12, "isr_lb(1,1,1,400)");
    near(regret_lower_bound(1.0, 1.0, 1.0, 0.5, 100.0), 0.00071851453353797328437, 1e-15,
         "regret_lb(1,1,1,1/2)");
    near(regret_lower_bound(0.5, 1.0, 1.0, 0.5, 16.0) / regret_lower_bound(0.5, 1.0, 1.0, 0.5, 1.0),
         2.0, 1e-12, "regret_lb ratio n=16 vs 1 at alpha=1/2");
    near(concentration_bound(2.0, 4.0, 1.0), 0.036631277777468360587, 1e-15, "conc(2,4,1)");
    near(nearly_myopic_constant(0.5), 131.70259176149886006, 1e-9, "K(1/2)");
    near(count_upper_bound(1.0, 20), 3.0445224377234229965, 1e-15, "ln(21)");
    equal(thresholds(2.0).nu, 1.0, "nu(2)");
    near(thresholds(1.0 / 12.0).nu, 38.633173942869764768, 1e-12, "nu(1/12)");
    equal(thresholds(1.0 / 12.0).nu0, 114.0, "nu0(1/12)");
    equal(thresholds(1.0).nu0, 3.0, "nu0(1)");
    equal(thresholds(std::numbers::ln2).nu0, 6.0, "nu0(ln 2)");
    equal(double(nearly_myopic_t0(0.5, 1.0, 0.5)), 14744.0, "t0(1/2,1,1/2)");
    equal(double(nearly_myopic_t0(0.5, 1e-3, 0.25)), 1.0, "t0(1/2,1e-3,1/4)");
    equal(double(nearly_myopic_t_alpha(1.0, 0.01, 4.0)), 1.0, "t_alpha(p=1,sigma=.01,alpha=4)");
    equal(double(nearly_myopic_t_alpha(0.5, 0.1, 6.0)), 82022.0, "t_alpha(p=1/2,sigma=.1,alpha=6)");
    equal(double(nearly_myopic_t_alpha(0.5, 0.1, INFINITY)), 605.0, "t_inf(p=1/2,sigma=.1)");
    near(adversarial_pair(1.0, 1.0, 0.45, 1.0, 100).delta_star, 0.1, 1e-16, "delta*(1,1,100)");
    near(adversarial_pair(2.0, 1.0, 0.45, 1.0, 400).delta_star, 0.070710678118654752, 1e-16,
         "delta*(2,1,400)");
    const AdversarialMargin law{1.0, 1.0, 0.45, 0.1, -1.45, 1.55};
    near(law.interval_mass(), 0.5, 1e-15, "adversarial interval mass");
    near(law.atom_mass(), 0.25, 1e-15, "adversarial atom mass");
    near(cdf(law, 0.0), 0.475, 1e-14, "adversarial cdf(0)");
    near(*margin_params(PowerMargin{2.0, 0.0, 1.0}, 0.0).mu, 2.0 / 3.0, 1e-12, "power mu");
    const ForcedSchedule short_grid = build_schedule(1.0, 150);
    const auto t1 = short_grid.times();
    v.check(std::vector<std::uint64_t>(t1.begin(), t1.end()) ==
                std::vector<std::uint64_t>{1, 7, 20, 54, 148},
            "times(q=1, 150)");
    v.check(build_schedule(1.0 / 12.0, 1).times().size() == 1, "times(q=1/12, 1)");
    v.note("exact values plus 27 frozen high-precision constants");
    return v;
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Verdict()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "two-point setup: regret equals inferior-sampling count", two_point_identity},
        {2, "uniform setup: forced < nearly-myopic < myopic at n=2000,5000", uniform_ordering},
        {3, "two-point setup: nearly-myopic plateau, forced growth > 1.3x", two_point_regimes},
        {4, "forced ISR growth: power exponent on (i), log model on (ii)", growth_fits},
        {5, "nearly-myopic estimator tail frequencies under concentration bound",
         estimator_concentration},
        {6, "forced schedule counting bounds, exhaustive", schedule_bounds},
        {7, "adversarial pair: worst-case ISR not below minimax bound", minimax_floor},
        {8, "regret not below floor implied by ISR", regret_floor_check},
        {9, "determinism across workers; c=0 matches myopic", determinism},
        {10, "bound evaluator values", evaluator_values},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] criterion %d: %s (%.1fs) -- %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name,
                    secs, v.detail.c_str());
        std::fflush(stdout);
        failed += v.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
                criteria.size());
    return failed == 0 ? 0 : 1;
}
