#include "covband/sim.hpp"

#include "covband/errors.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

namespace covband {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv_mix(std::uint64_t h, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xffU;
        h *= kFnvPrime;
    }
    return h;
}

std::uint64_t max_horizon(std::span<const std::uint64_t> horizons) {
    return horizons.empty() ? 0 : horizons.back();
}

} // namespace

void validate(const ExperimentConfig& config) {
    try {
        validate(config.instance);
    } catch (const InvalidArgument& e) {
        throw ValidationError(e.what());
    }
    if (config.policies.empty()) {
        throw ValidationError("policies must be nonempty");
    }
    if (config.horizons.empty()) {
        throw ValidationError("horizons must be nonempty");
    }
    if (config.horizons.front() < 1) {
        throw ValidationError("horizons must be positive");
    }
    for (std::size_t i = 1; i < config.horizons.size(); ++i) {
        if (config.horizons[i] <= config.horizons[i - 1]) {
            throw ValidationError("horizons must be strictly increasing");
        }
    }
    if (config.replications < 1) {
        throw ValidationError("replications must be >= 1");
    }
    std::set<std::string> labels;
    for (const auto& spec : config.policies) {
        if (const auto* nm = std::get_if<NearlyMyopicPolicy>(&spec)) {
            if (!(nm->c >= 0.0) || !std::isfinite(nm->c)) {
                throw ValidationError("nearly_myopic: c must be finite and nonnegative");
            }
        }
        if (const auto* fs = std::get_if<ForcedSamplingPolicy>(&spec)) {
            if (fs->schedule.horizon() < config.horizons.back()) {
                throw ValidationError("forced: schedule must cover the largest horizon");
            }
        }
        if (!labels.insert(policy_label(spec)).second) {
            throw ValidationError("duplicate policy: " + policy_label(spec));
        }
    }
}

EpisodeMetrics run_episode(const BanditInstance& instance, const PolicySpec& spec,
                           std::span<const std::uint64_t> horizons, UniformStream& stream,
                           const EpisodeOptions& options) {
    EpisodeMetrics out;
    out.checkpoints.reserve(horizons.size());
    const std::uint64_t n = max_horizon(horizons);
    if (options.record_decisions) {
        out.decisions.reserve(n);
    }

    PolicyState state;
    double regret = 0.0;
    std::uint64_t t_inf = 0;
    std::uint64_t digest = kFnvOffset;
    std::size_t next_checkpoint = 0;

    for (std::uint64_t t = 1; t <= n; ++t) {
        const double x = sample_covariate(instance.covariate, stream.next());
        const double u1 = stream.next();
        const double u2 = stream.next();
        const double eps = instance.sigma * standard_normal(u1, u2);
        digest = fnv_mix(fnv_mix(digest, x), eps);

        const Arm arm = decide(spec, state, x);
        if (arm == Arm::one) {
            state = update(state, x, arm, reward_arm1(instance, x, eps));
        } else {
            state = update(state, x, arm, std::nullopt);
        }
        if (options.record_decisions) {
            out.decisions.push_back(arm);
        }

        const Arm best = arm_if(x >= instance.theta);
        if (arm != best) {
            regret += std::abs(x - instance.theta);
            ++t_inf;
        }

        while (next_checkpoint < horizons.size() && horizons[next_checkpoint] == t) {
            Checkpoint cp;
            cp.horizon = t;
            cp.cum_regret = regret;
            cp.t_inf = t_inf;
            cp.pulls = state.pulls;
            if (state.pulls > 0) {
                cp.theta_hat = theta_hat(state);
            }
            out.checkpoints.push_back(cp);
            ++next_checkpoint;
        }
    }
    out.stream_digest = digest;
    return out;
}

const AggregateRow& AggregateStats::at(const std::string& policy, std::uint64_t horizon) const {
    for (const auto& row : rows) {
        if (row.policy == policy && row.horizon == horizon) {
            return row;
        }
    }
    throw InvalidArgument("no aggregate row for " + policy + " at n=" + std::to_string(horizon));
}

SummaryStats summarize(std::span<const double> values) {
    SummaryStats s;
    if (values.empty()) {
        return s;
    }
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / (n - 1.0));
    }
    s.se = s.sd / std::sqrt(n);
    return s;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    validate(config);

    ExperimentResult result;
    result.horizons = config.horizons;
    result.replications = config.replications;
    for (const auto& spec : config.policies) {
        result.policy_labels.push_back(policy_label(spec));
    }
    const std::size_t num_policies = config.policies.size();
    result.metrics.assign(num_policies,
                          std::vector<std::vector<Checkpoint>>(config.replications));

    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            const std::uint64_t r = next.fetch_add(1);
            if (r >= config.replications) {
                return;
            }
            try {
                for (std::size_t p = 0; p < num_policies; ++p) {
                    // Same stream for every policy: common random numbers.
                    UniformStream stream(config.master_seed, r);
                    auto episode = run_episode(config.instance, config.policies[p],
                                               config.horizons, stream);
                    result.metrics[p][r] = std::move(episode.checkpoints);
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(config.replications);
                return;
            }
        }
    };

    const unsigned workers = std::max(1U, options.workers);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    std::vector<double> regret(config.replications);
    std::vector<double> tinf(config.replications);
    for (std::size_t p = 0; p < num_policies; ++p) {
        for (std::size_t h = 0; h < config.horizons.size(); ++h) {
            for (std::uint64_t r = 0; r < config.replications; ++r) {
                const Checkpoint& cp = result.metrics[p][r][h];
                regret[r] = cp.cum_regret;
                tinf[r] = static_cast<double>(cp.t_inf);
            }
            const SummaryStats sr = summarize(regret);
            const SummaryStats st = summarize(tinf);
            result.aggregate.rows.push_back(AggregateRow{
                result.policy_labels[p], config.horizons[h], sr.mean, sr.sd, sr.se, st.mean,
                st.sd, st.se, config.replications});
        }
    }
    return result;
}

std::string format_real(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_replication_csv(std::ostream& out, const ExperimentResult& result) {
    out << "policy,horizon,replication,regret,t_inf,pulls\n";
    for (std::size_t p = 0; p < result.policy_labels.size(); ++p) {
        for (std::size_t h = 0; h < result.horizons.size(); ++h) {
            for (std::uint64_t r = 0; r < result.replications; ++r) {
                const Checkpoint& cp = result.metrics[p][r][h];
                out << result.policy_labels[p] << ',' << cp.horizon << ',' << r << ','
                    << format_real(cp.cum_regret) << ',' << cp.t_inf << ',' << cp.pulls << '\n';
            }
        }
    }
}

void write_aggregate_csv(std::ostream& out, const AggregateStats& stats) {
    out << "policy,horizon,mean_regret,sd_regret,se_regret,mean_tinf,sd_tinf,se_tinf,reps\n";
    for (const auto& row : stats.rows) {
        out << row.policy << ',' << row.horizon << ',' << format_real(row.mean_regret) << ','
            << format_real(row.sd_regret) << ',' << format_real(row.se_regret) << ','
            << format_real(row.mean_tinf) << ',' << format_real(row.sd_tinf) << ','
            << format_real(row.se_tinf) << ',' << row.reps << '\n';
    }
}

void write_plot_csv(std::ostream& out, const AggregateStats& stats, Metric metric) {
    out << "policy,n,mean,lower,upper\n";
    for (const auto& row : stats.rows) {
        const double mean = metric == Metric::regret ? row.mean_regret : row.mean_tinf;
        const double se = metric == Metric::regret ? row.se_regret : row.se_tinf;
        out << row.policy << ',' << row.horizon << ',' << format_real(mean) << ','
            << format_real(mean - 1.96 * se) << ',' << format_real(mean + 1.96 * se) << '\n';
    }
}

} // namespace covband
