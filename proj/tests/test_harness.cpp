#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "geogns/errors.hpp"
#include "geogns/harness.hpp"

using namespace geogns;
using namespace geogns::harness;

namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(
problem = noisy_quadratic
dim = 8
noise_std = 2
optimizer = signsgd
lr = 0.05
initial_batch = 8
batch_cap = 256
sample_budget = 4096
ranks = 4
frequency = 2
warmup_steps = 3
theta = 0.5
)";

RunTrace scripted(const std::vector<std::optional<double>>& evals) {
    RunTrace t;
    std::uint64_t step = 0;
    for (const auto& e : evals) {
        TraceRecord r;
        r.step = ++step;
        r.samples = 8.0 * static_cast<double>(step);
        r.batch_size = 8;
        r.eval_loss = e;
        t.records.push_back(r);
    }
    return t;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(GEOGNS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("geogns_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST(Config, ParsesKeysAndComments) {
    const auto c = parse_config(std::string(kSmall) + "seed = 9  # trailing comment\n");
    EXPECT_EQ(c.problem.dim, 8);
    EXPECT_EQ(c.optimizer.kind, optim::OptimizerKind::SignSgd);
    EXPECT_EQ(c.schedule.initial_batch, 8);
    EXPECT_EQ(c.schedule.warmup, 3u);
    EXPECT_EQ(c.seed, 9u);
}

TEST(Config, RejectsBadInput) {
    EXPECT_THROW(parse_config("nonsense = 1\n"), ConfigError);
    EXPECT_THROW(parse_config("lr 0.1\n"), ConfigError);
    EXPECT_THROW(parse_config("lr = fast\n"), ConfigError);
    EXPECT_THROW(parse_config("lr = 0.1\nlr = 0.2\n"), ConfigError);
    EXPECT_THROW(parse_config("optimizer = lion\n"), ConfigError);
    EXPECT_THROW(parse_config("ranks = 3\ninitial_batch = 8\n"), ConfigError);
    EXPECT_THROW(parse_config("ranks = 1\n"), ConfigError);
    EXPECT_THROW(parse_config("problem = tiny_mlp\nhidden = 65\n"), ConfigError);
    EXPECT_THROW(parse_config("problem = logistic\ngns = oracle\n"), ConfigError);
    EXPECT_THROW(parse_config("optimizer = specsgd\n"), ConfigError);
    EXPECT_THROW(parse_config("problem = logistic\ngns_matrix_only = true\n"), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/geogns.cfg"), ConfigError);
}

TEST(Config, WarmupDefaultsToLrWarmupSpan) {
    const auto c = parse_config("sample_budget = 1000\ninitial_batch = 8\nwarmup_fraction = 0.2\n");
    EXPECT_EQ(c.schedule.warmup, 25u);
}

TEST(Config, RenderRoundTrips) {
    const auto c = parse_config(std::string(kSmall) + "vector_optimizer = signsgd\n");
    const auto text = render_config(c);
    EXPECT_EQ(render_config(parse_config(text)), text);
    for (const auto& key : config_keys()) {
        EXPECT_NE(text.find(std::string(key.name) + " = "), std::string::npos) << key.name;
    }
}

TEST(LrSchedule, WarmupThenCosine) {
    LrSchedule s;
    s.warmup_fraction = 0.1;
    EXPECT_DOUBLE_EQ(s.factor(50, 1000), 0.5);
    EXPECT_DOUBLE_EQ(s.factor(100, 1000), 1.0);
    EXPECT_NEAR(s.factor(550, 1000), 0.5, 1e-12);
    EXPECT_NEAR(s.factor(1000, 1000), 0.0, 1e-12);
    s.kind = LrScheduleKind::Constant;
    EXPECT_EQ(s.factor(700, 1000), 1.0);
}

TEST(Run, ConstantBatchSpendsBudget) {
    auto c = parse_config(std::string(kSmall) + "adaptive = false\n");
    const auto t = run_experiment(c);
    ASSERT_EQ(t.records.size(), 4096u / 8u);
    for (const auto& r : t.records) {
        EXPECT_EQ(r.batch_size, 8);
        EXPECT_EQ(r.lr_multiplier, 1.0);
        EXPECT_FALSE(r.gns_ema.has_value());
        EXPECT_TRUE(r.eval_loss.has_value());
    }
    EXPECT_EQ(t.records.back().samples, 4096.0);
    EXPECT_LT(*final_eval_loss(t), t.records.front().eval_loss.value());
}

TEST(Run, AdaptiveMultiplierFollowsBatch) {
    const auto t = run_experiment(parse_config(kSmall));
    Index prev = 0;
    bool grew = false;
    for (const auto& r : t.records) {
        EXPECT_GE(r.batch_size, prev);
        EXPECT_EQ(r.batch_size % 4, 0);
        EXPECT_NEAR(r.lr_multiplier, std::sqrt(r.batch_size / 8.0), 1e-12);
        grew = grew || r.batch_size > 8;
        prev = r.batch_size;
    }
    EXPECT_TRUE(grew);
    EXPECT_TRUE(t.records.front().gns_ema.has_value());
}

TEST(Run, CsvIsByteIdenticalAcrossRuns) {
    const auto c = parse_config(kSmall);
    std::ostringstream a, b;
    run_experiment(c, &a);
    run_experiment(c, &b);
    EXPECT_EQ(a.str(), b.str());
    std::istringstream in(a.str());
    const auto back = read_trace(in);
    std::ostringstream again;
    write_trace(again, back);
    EXPECT_EQ(again.str(), a.str());
}

TEST(Run, EvalEverySkipsRows) {
    const auto t = run_experiment(parse_config(std::string(kSmall) + "adaptive = false\neval_every = 64\n"));
    std::size_t evals = 0;
    for (const auto& r : t.records) evals += r.eval_loss.has_value();
    EXPECT_EQ(evals, 4096u / 64u);
    EXPECT_TRUE(t.records.back().eval_loss.has_value());
}

TEST(Run, DivergenceNamesStep) {
    const auto c = parse_config(
        "optimizer = sgd\nlr = 1e200\nlr_schedule = constant\nadaptive = false\nsample_budget = 4096\n");
    try {
        run_experiment(c);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("at step"), std::string::npos);
    }
}

TEST(Run, MatrixOnlyOnMlp) {
    const auto c = parse_config(
        "problem = tiny_mlp\nhidden = 8\ntrain_size = 256\neval_size = 64\noptimizer = specsgd\n"
        "vector_optimizer = signsgd\ngns = nuclear\ngns_matrix_only = true\nlr = 0.02\n"
        "initial_batch = 16\nbatch_cap = 128\nsample_budget = 2048\nranks = 4\nfrequency = 1\n");
    const auto t = run_experiment(c);
    EXPECT_FALSE(t.records.empty());
    EXPECT_TRUE(t.records.back().gns_ema.has_value());
}

TEST(Trace, ReadRejectsBadHeader) {
    std::istringstream in("step,samples\n1,2\n");
    EXPECT_THROW(read_trace(in), InvalidArgument);
    std::istringstream cols(std::string(kTraceHeader) + "\n1,2,3\n");
    EXPECT_THROW(read_trace(cols), InvalidArgument);
}

TEST(Trace, OptionalFieldsWrittenEmpty) {
    std::ostringstream out;
    TraceRecord r;
    r.step = 1;
    r.samples = 8;
    r.batch_size = 8;
    write_trace_record(out, r);
    EXPECT_EQ(out.str(), "1,8,0,,8,,0,1,0\n");
}

TEST(Compare, StepsToTarget) {
    const auto t = scripted({5.0, std::nullopt, 3.0, 2.0, 2.5});
    EXPECT_EQ(steps_to_target(t, 3.0), 3u);
    EXPECT_EQ(steps_to_target(t, 1.0), std::nullopt);
    EXPECT_EQ(min_eval_loss(t), 2.0);
    EXPECT_EQ(final_eval_loss(t), 2.5);
}

TEST(Compare, MedianReduction) {
    // Baseline reaches its minimum at step 4; candidates at 2, 3 and 1.
    const std::vector<RunTrace> base(3, scripted({4, 3, 2, 1}));
    const std::vector<RunTrace> cand = {scripted({3, 1, 1, 1}), scripted({3, 2, 1, 1}),
                                        scripted({1, 1, 1, 1})};
    const auto s = compare_runs(base, cand);
    ASSERT_EQ(s.per_seed_reduction.size(), 3u);
    EXPECT_EQ(s.per_seed_reduction[0], 50.0);
    EXPECT_EQ(s.per_seed_reduction[1], 25.0);
    EXPECT_EQ(s.per_seed_reduction[2], 75.0);
    EXPECT_EQ(s.median_steps_reduction, 50.0);
    EXPECT_EQ(s.baseline_final_mean, 1.0);
    EXPECT_EQ(s.baseline_final_std, 0.0);
}

TEST(Compare, UnreachedTargetRanksLowest) {
    const std::vector<RunTrace> base(3, scripted({4, 3, 2, 1}));
    const std::vector<RunTrace> cand = {scripted({3, 1, 1, 1}), scripted({3, 2, 2, 2}),
                                        scripted({3, 2, 2, 2})};
    const auto s = compare_runs(base, cand);
    EXPECT_FALSE(s.median_steps_reduction.has_value());
    std::ostringstream out;
    write_summary_csv(out, s);
    EXPECT_NE(out.str().find("median_steps_reduction_pct,—\n"), std::string::npos);
    EXPECT_NE(out.str().find("seed_0_steps_reduction_pct,50\n"), std::string::npos);
}

TEST(Compare, Validation) {
    const std::vector<RunTrace> one(1, scripted({1}));
    const std::vector<RunTrace> two(2, scripted({1}));
    EXPECT_THROW(compare_runs(one, two), InvalidArgument);
    const std::vector<RunTrace> none(1, scripted({std::nullopt}));
    EXPECT_THROW(compare_runs(none, none), InvalidArgument);
}

TEST(Report, SummaryAndSvg) {
    const auto c = parse_config(kSmall);
    const auto t = run_experiment(c);
    const auto text = summarize_run(c, t);
    EXPECT_NE(text.find("optimizer: signsgd"), std::string::npos);
    const auto svg = render_svg(t);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("cli");
    write_file(dir / "good.cfg", kSmall);
    write_file(dir / "bad.cfg", "nonsense = 1\n");
    write_file(dir / "diverge.cfg",
               "optimizer = sgd\nlr = 1e200\nlr_schedule = constant\nadaptive = false\nsample_budget = 4096\n");
    const std::string d = dir.string();
    EXPECT_EQ(run_cli("run --config " + d + "/good.cfg --out " + d + "/a"), 0);
    EXPECT_TRUE(fs::exists(dir / "a" / "trace.csv"));
    EXPECT_TRUE(fs::exists(dir / "a" / "summary.txt"));
    EXPECT_EQ(run_cli("run --config " + d + "/bad.cfg --out " + d + "/b"), 2);
    EXPECT_EQ(run_cli("run --config " + d + "/missing.cfg"), 2);
    EXPECT_EQ(run_cli("run --config " + d + "/diverge.cfg --out " + d + "/c"), 3);
    EXPECT_EQ(run_cli("frobnicate"), 2);
    EXPECT_EQ(run_cli("run --config " + d + "/good.cfg --seed 4 --out " + d + "/s4"), 0);
    EXPECT_EQ(run_cli("compare --baseline " + d + "/a/trace.csv --candidate " + d +
                      "/s4/trace.csv --out " + d),
              0);
    EXPECT_TRUE(fs::exists(dir / "comparison.csv"));
    EXPECT_EQ(run_cli("plot " + d + "/a/trace.csv --out " + d), 0);
    EXPECT_TRUE(fs::exists(dir / "trace.svg"));
    EXPECT_EQ(run_cli("analyze --geometry sign --grad-norm 4 --noise 2 --dimension 2 --out " + d), 0);
    EXPECT_TRUE(fs::exists(dir / "analysis.csv"));
    EXPECT_EQ(run_cli("analyze --geometry euclid --grad-norm 4 --noise 2"), 2);
    EXPECT_EQ(run_cli("check --seed 3"), 0);
}
