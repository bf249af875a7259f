#include "covband/cli.hpp"

#include <json.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace covband {
namespace {

namespace fs = std::filesystem;

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("covband_cli_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

TEST(Cli, ScheduleCsv) {
    const Outcome o = cli({"schedule", "--q", "1", "--horizon", "150"});
    ASSERT_EQ(o.code, 0) << o.err;
    const auto rows = lines(o.out);
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_EQ(rows[0], "index,tau,count,upper_bound,lower_bound");
    EXPECT_EQ(rows[1].substr(0, 6), "1,1,1,");
    EXPECT_EQ(rows[5].substr(0, 8), "5,148,5,");
}

TEST(Cli, BoundsJsonLines) {
    const Outcome o =
        cli({"bounds", "--alpha", "1", "--c-star", "1", "--sigma", "1", "--x0", "0.5", "--n",
             "100,400"});
    ASSERT_EQ(o.code, 0) << o.err;
    const auto rows = lines(o.out);
    ASSERT_EQ(rows.size(), 2u);
    const auto rec = nlohmann::json::parse(rows[1]);
    EXPECT_NEAR(rec["isr_lower_bound"].get<double>(), 1.0722048562008834956, 1e-12);
    EXPECT_NEAR(rec["regret_lower_bound"].get<double>(), 0.00071851453353797328437, 1e-15);
    EXPECT_EQ(rec["n"].get<int>(), 400);
}

TEST(Cli, BoundsOutsideRangeAreNull) {
    const Outcome o = cli({"bounds", "--alpha", "3", "--c-star", "1", "--sigma", "1", "--n", "10"});
    ASSERT_EQ(o.code, 0) << o.err;
    const auto rec = nlohmann::json::parse(lines(o.out).at(0));
    EXPECT_TRUE(rec["isr_lower_bound"].is_null());
    EXPECT_TRUE(rec["regret_lower_bound"].is_null());
}

TEST(Cli, MarginCertificate) {
    const Outcome o =
        cli({"margin", "--family", "uniform", "--lo", "-1", "--hi", "1", "--theta", "0"});
    ASSERT_EQ(o.code, 0) << o.err;
    const auto rec = nlohmann::json::parse(o.out);
    EXPECT_EQ(rec["alpha"].get<double>(), 1.0);
    EXPECT_EQ(rec["x0"].get<double>(), 0.25);
    EXPECT_EQ(rec["p1"].get<double>(), 0.25);

    const Outcome two = cli({"margin", "--family", "two_point", "--x-minus", "-1", "--x-plus", "1",
                             "--prob-plus", "0.5", "--theta", "0"});
    ASSERT_EQ(two.code, 0) << two.err;
    EXPECT_EQ(nlohmann::json::parse(two.out)["alpha"], "inf");
}

TEST(Cli, UsageErrorsExitTwoAndWriteOnlyToStderr) {
    for (const auto& args : std::vector<std::vector<std::string>>{
             {},
             {"frobnicate"},
             {"schedule", "--q", "1"},
             {"margin", "--family", "uniform", "--theta", "0"},
             {"margin", "--family", "uniform", "--lo", "-1", "--hi", "1", "--theta", "5"},
             {"replicate-paper", "iii"},
             {"run", "/nonexistent/config.json"}}) {
        const Outcome o = cli(args);
        EXPECT_EQ(o.code, 2) << (args.empty() ? "" : args[0]);
        EXPECT_TRUE(o.out.empty());
        EXPECT_FALSE(o.err.empty());
    }
}

TEST(Cli, RunWritesOutputsAndOneManifest) {
    const fs::path dir = scratch("run");
    fs::create_directories(dir);
    const fs::path config = dir / "config.json";
    std::ofstream(config) << R"({
      "instance": {"theta": 0, "sigma": 1, "covariate": {"family": "two_point",
                   "x_minus": -1, "x_plus": 1, "prob_plus": 0.5}},
      "policies": ["myopic", {"type": "forced", "q": 0.5}],
      "horizons": [10, 100], "replications": 5, "seed": 3, "record_trajectories": true})";
    const fs::path out = dir / "out";
    const Outcome o = cli({"run", config.string(), "--out", out.string(), "--workers", "2"});
    ASSERT_EQ(o.code, 0) << o.err;
    EXPECT_TRUE(o.out.empty());
    EXPECT_TRUE(fs::exists(out / "aggregate.csv"));
    EXPECT_TRUE(fs::exists(out / "replications.csv"));
    int manifests = 0;
    for (const auto& entry : fs::directory_iterator(out)) {
        manifests += entry.path().filename() == "manifest.json" ? 1 : 0;
    }
    EXPECT_EQ(manifests, 1);
    const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    EXPECT_EQ(manifest["master_seed"], 3);
    EXPECT_EQ(manifest["outputs"].size(), 2u);
    EXPECT_EQ(manifest["config_digest"].get<std::string>().size(), 16u);
    fs::remove_all(dir);
}

TEST(Cli, InvalidConfigExitsTwo) {
    const fs::path dir = scratch("bad");
    fs::create_directories(dir);
    std::ofstream(dir / "bad.json") << "{\"instance\": }";
    const Outcome o = cli({"run", (dir / "bad.json").string(), "--out", (dir / "o").string()});
    EXPECT_EQ(o.code, 2);
    EXPECT_NE(o.err.find("line 1"), std::string::npos) << o.err;
    EXPECT_FALSE(fs::exists(dir / "o"));
    fs::remove_all(dir);
}

TEST(Cli, ReplicateIsDeterministicAcrossWorkers) {
    const fs::path a = scratch("rep_a");
    const fs::path b = scratch("rep_b");
    ASSERT_EQ(cli({"replicate-paper", "ii", "--reps", "20", "--out", a.string(), "--workers", "1"})
                  .code,
              0);
    ASSERT_EQ(cli({"replicate-paper", "ii", "--reps", "20", "--out", b.string(), "--workers", "3"})
                  .code,
              0);
    for (const char* f : {"aggregate.csv", "plot_regret.csv", "plot_tinf.csv"}) {
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
        EXPECT_FALSE(slurp(a / f).empty());
    }
    const auto plot = lines(slurp(a / "plot_regret.csv"));
    EXPECT_EQ(plot[0], "policy,n,mean,lower,upper");
    EXPECT_EQ(plot.size(), 1u + 3u * 9u);
    fs::remove_all(a);
    fs::remove_all(b);
}

} // namespace
} // namespace covband
