#pragma once

#include "covband/env.hpp"
#include "covband/policy.hpp"
#include "covband/stream.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace covband {

struct ExperimentConfig {
    BanditInstance instance;
    std::vector<PolicySpec> policies;
    std::vector<std::uint64_t> horizons; // strictly increasing checkpoints
    std::uint64_t replications = 1;
    std::uint64_t master_seed = 0;
    bool record_trajectories = false; // keep the per-replication table
};

// Throws ValidationError naming the violated invariant.
void validate(const ExperimentConfig& config);

struct Checkpoint {
    std::uint64_t horizon = 0;
    double cum_regret = 0.0;  // sum |X_t - theta| over oracle mismatches
    std::uint64_t t_inf = 0;  // number of oracle mismatches
    std::uint64_t pulls = 0;  // arm-one samples
    std::optional<double> theta_hat;
};

struct EpisodeMetrics {
    std::vector<Checkpoint> checkpoints;
    // FNV-1a digest of the realized (X_t, eps_t) bit patterns.
    std::uint64_t stream_digest = 0;
    std::vector<Arm> decisions; // filled only when requested
};

struct EpisodeOptions {
    bool record_decisions = false;
};

// Each step consumes exactly three uniforms: one covariate, two for the noise,
// whether or not arm one is pulled.
inline constexpr std::uint64_t kUniformsPerStep = 3;

EpisodeMetrics run_episode(const BanditInstance& instance, const PolicySpec& spec,
                           std::span<const std::uint64_t> horizons, UniformStream& stream,
                           const EpisodeOptions& options = {});

struct ReplicationRecord {
    std::size_t policy = 0;
    std::uint64_t replication = 0;
    Checkpoint checkpoint;
};

struct AggregateRow {
    std::string policy;
    std::uint64_t horizon = 0;
    double mean_regret = 0.0;
    double sd_regret = 0.0;
    double se_regret = 0.0;
    double mean_tinf = 0.0;
    double sd_tinf = 0.0;
    double se_tinf = 0.0;
    std::uint64_t reps = 0;
};

struct AggregateStats {
    std::vector<AggregateRow> rows; // policy-major, then horizon

    const AggregateRow& at(const std::string& policy, std::uint64_t horizon) const;
};

struct ExperimentResult {
    std::vector<std::string> policy_labels;
    std::vector<std::uint64_t> horizons;
    std::uint64_t replications = 0;
    // metrics[policy][replication][checkpoint]
    std::vector<std::vector<std::vector<Checkpoint>>> metrics;
    AggregateStats aggregate;

    const std::vector<Checkpoint>& episode(std::size_t policy, std::uint64_t replication) const {
        return metrics.at(policy).at(replication);
    }
};

struct RunOptions {
    unsigned workers = 1;
};

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

struct SummaryStats {
    double mean = 0.0;
    double sd = 0.0; // sample standard deviation (n - 1); 0 for a single value
    double se = 0.0;
};

SummaryStats summarize(std::span<const double> values);

// 17 significant digits.
std::string format_real(double value);

void write_replication_csv(std::ostream& out, const ExperimentResult& result);
void write_aggregate_csv(std::ostream& out, const AggregateStats& stats);

enum class Metric { regret, t_inf };

// policy,n,mean,lower,upper with a 1.96 standard error band.
void write_plot_csv(std::ostream& out, const AggregateStats& stats, Metric metric);

} // namespace covband
