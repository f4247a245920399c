#pragma once

// Experiment driver: builds a problem, optimizer, rank simulator, GNS
// measurement and batch controller from a flat config and runs them until the
// sample budget is spent, streaming one CSV row per optimizer step.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geogns/gns.hpp"
#include "geogns/optimizers.hpp"
#include "geogns/problems.hpp"
#include "geogns/scheduler.hpp"

namespace geogns::harness {

enum class LrScheduleKind { Cosine, Constant };

// Base learning-rate factor as a function of samples consumed: linear warmup
// over the first warmup_fraction of the budget, then cosine decay down to
// min_fraction.
struct LrSchedule {
    LrScheduleKind kind = LrScheduleKind::Cosine;
    double warmup_fraction = 0.15;
    double min_fraction = 0.0;

    double factor(double samples, double budget) const;
};

enum class GnsSource { L1, L2, Nuclear, Oracle };

std::string_view to_string(GnsSource source);

struct RunConfig {
    problems::ProblemConfig problem;
    optim::OptimizerConfig optimizer;
    std::optional<optim::OptimizerConfig> vector_optimizer;
    sched::ScheduleConfig schedule;
    bool adaptive = true;
    GnsSource gns = GnsSource::L1;
    bool gns_matrix_only = false;
    int ranks = 4;
    std::uint64_t seed = 0;
    Index eval_every = 0;  // samples; 0 = evaluate after every step
    LrSchedule lr_schedule;

    void validate() const;
};

struct ConfigKey {
    std::string_view name;
    std::string_view description;
};

// Documented keys accepted by parse_config.
std::span<const ConfigKey> config_keys();

// `key = value` lines, `#` comments. Unknown keys and malformed values throw
// ConfigError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);
std::string render_config(const RunConfig& config);

struct TraceRecord {
    std::uint64_t step = 0;     // optimizer updates applied so far (1-based)
    double samples = 0.0;       // cumulative samples consumed
    double train_loss = 0.0;    // mean per-sample loss of this step's batch
    std::optional<double> eval_loss;
    Index batch_size = 0;       // batch used at this step
    std::optional<double> gns_ema;  // N/M after this step's controller update
    double lr = 0.0;            // scheduled base learning rate
    double lr_multiplier = 1.0; // omega used at this step
    double grad_dual_norm = 0.0;
};

struct RunTrace {
    std::vector<TraceRecord> records;
};

inline constexpr std::string_view kTraceHeader =
    "step,samples,train_loss,eval_loss,batch_size,gns_ema,lr,lr_multiplier,grad_dual_norm";

// Shortest round-trip decimal, independent of the global locale.
std::string format_double(double value);

void write_trace_header(std::ostream& out);
void write_trace_record(std::ostream& out, const TraceRecord& record);
void write_trace(std::ostream& out, const RunTrace& trace);
RunTrace read_trace(std::istream& in);

// Runs the full loop. When `csv` is non-null the header and each record are
// written as soon as they are produced. Non-finite parameters or losses throw
// NumericalError naming the step.
RunTrace run_experiment(const RunConfig& config, std::ostream* csv = nullptr);

// First record step whose eval loss is <= target.
std::optional<std::uint64_t> steps_to_target(const RunTrace& trace, double target);

std::optional<double> min_eval_loss(const RunTrace& trace);
std::optional<double> final_eval_loss(const RunTrace& trace);

struct ComparisonSummary {
    double baseline_final_mean = 0.0;
    double baseline_final_std = 0.0;
    double candidate_final_mean = 0.0;
    double candidate_final_std = 0.0;
    // Median per-seed percent reduction in steps to reach the baseline's
    // minimum eval loss; empty when the median seed never reached it.
    std::optional<double> median_steps_reduction;
    std::vector<std::optional<double>> per_seed_reduction;
};

// Traces are paired by position (seed i of baseline with seed i of candidate).
ComparisonSummary compare_runs(std::span<const RunTrace> baseline,
                               std::span<const RunTrace> candidate);

void write_summary_csv(std::ostream& out, const ComparisonSummary& summary);

// Flat key: value text summary of one run.
std::string summarize_run(const RunConfig& config, const RunTrace& trace);

// Minimal SVG line chart of eval loss, batch size and GNS EMA against step.
std::string render_svg(const RunTrace& trace);

}  // namespace geogns::harness
