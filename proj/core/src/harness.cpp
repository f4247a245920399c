#include "geogns/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "geogns/errors.hpp"
#include "geogns/parallel_sim.hpp"

namespace geogns::harness {

namespace {

constexpr std::string_view kNotReached = "—";

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw ConfigError("key '" + std::string(key) + "': expected a number, got '" +
                          std::string(text) + "'");
    }
    return v;
}

std::int64_t parse_int(std::string_view key, std::string_view text) {
    std::int64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("key '" + std::string(key) + "': expected an integer, got '" +
                          std::string(text) + "'");
    }
    return v;
}

std::uint64_t parse_uint(std::string_view key, std::string_view text) {
    const auto v = parse_int(key, text);
    if (v < 0) throw ConfigError("key '" + std::string(key) + "' must be nonnegative");
    return static_cast<std::uint64_t>(v);
}

bool parse_bool(std::string_view key, std::string_view text) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ConfigError("key '" + std::string(key) + "': expected a boolean, got '" +
                      std::string(text) + "'");
}

GnsSource parse_gns_source(std::string_view text) {
    if (text == "l1") return GnsSource::L1;
    if (text == "l2") return GnsSource::L2;
    if (text == "nuclear") return GnsSource::Nuclear;
    if (text == "oracle") return GnsSource::Oracle;
    throw ConfigError("unknown gns source '" + std::string(text) + "'");
}

std::string_view to_string(problems::NoiseDistribution d) {
    return d == problems::NoiseDistribution::Gaussian ? "gaussian" : "student_t";
}

std::string_view to_string(problems::MatrixNoise n) {
    return n == problems::MatrixNoise::RowGaussian ? "row_gaussian" : "spectral_aligned";
}

std::string_view to_string(LrScheduleKind k) {
    return k == LrScheduleKind::Cosine ? "cosine" : "constant";
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

// Parsing state that only resolves once every line has been read.
struct Pending {
    RunConfig config;
    std::optional<optim::OptimizerKind> vector_kind;
};

using Setter = std::function<void(Pending&, std::string_view key, std::string_view value)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Entry {
    ConfigKey key;
    Setter set;
    Getter get;
};

template <typename F>
decltype(auto) rethrow_as_config(std::string_view key, F&& f) {
    try {
        return f();
    } catch (const InvalidArgument& e) {
        throw ConfigError("key '" + std::string(key) + "': " + e.what());
    }
}

#define GEOGNS_DOUBLE(name, desc, field)                                                  \
    Entry {                                                                               \
        {name, desc},                                                                     \
            [](Pending& p, std::string_view k, std::string_view v) {                      \
                p.config.field = parse_double(k, v);                                      \
            },                                                                            \
            [](const RunConfig& c) { return format_double(c.field); }                     \
    }

#define GEOGNS_INT(name, desc, field)                                                     \
    Entry {                                                                               \
        {name, desc},                                                                     \
            [](Pending& p, std::string_view k, std::string_view v) {                      \
                p.config.field = static_cast<decltype(p.config.field)>(parse_int(k, v));  \
            },                                                                            \
            [](const RunConfig& c) { return std::to_string(c.field); }                    \
    }

#define GEOGNS_UINT(name, desc, field)                                                    \
    Entry {                                                                               \
        {name, desc},                                                                     \
            [](Pending& p, std::string_view k, std::string_view v) {                      \
                p.config.field = static_cast<decltype(p.config.field)>(parse_uint(k, v)); \
            },                                                                            \
            [](const RunConfig& c) { return std::to_string(c.field); }                    \
    }

#define GEOGNS_BOOL(name, desc, field)                                                    \
    Entry {                                                                               \
        {name, desc},                                                                     \
            [](Pending& p, std::string_view k, std::string_view v) {                      \
                p.config.field = parse_bool(k, v);                                        \
            },                                                                            \
            [](const RunConfig& c) { return bool_text(c.field); }                         \
    }

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = {
        // problem
        Entry{{"problem", "noisy_quadratic | matrix_quadratic | logistic | tiny_mlp"},
              [](Pending& p, std::string_view k, std::string_view v) {
                  p.config.problem.kind =
                      rethrow_as_config(k, [&] { return problems::parse_problem_kind(v); });
              },
              [](const RunConfig& c) { return std::string(problems::to_string(c.problem.kind)); }},
        GEOGNS_INT("dim", "noisy_quadratic dimension d", problem.dim),
        GEOGNS_DOUBLE("curvature_min", "smallest diagonal curvature a_i", problem.curvature_min),
        GEOGNS_DOUBLE("curvature_max", "largest diagonal curvature a_i", problem.curvature_max),
        GEOGNS_DOUBLE("noise_std", "per-coordinate noise standard deviation", problem.noise_std),
        Entry{{"noise_dist", "gaussian | student_t (df 5, unit variance)"},
              [](Pending& p, std::string_view k, std::string_view v) {
                  p.config.problem.noise_dist =
                      rethrow_as_config(k, [&] { return problems::parse_noise_distribution(v); });
              },
              [](const RunConfig& c) { return std::string(to_string(c.problem.noise_dist)); }},
        GEOGNS_INT("rows", "matrix_quadratic rows m", problem.rows),
        GEOGNS_INT("cols", "matrix_quadratic columns n", problem.cols),
        GEOGNS_DOUBLE("row_noise_min", "smallest row-noise standard deviation", problem.row_noise_min),
        GEOGNS_DOUBLE("row_noise_max", "largest row-noise standard deviation", problem.row_noise_max),
        Entry{{"matrix_noise", "row_gaussian | spectral_aligned"},
              [](Pending& p, std::string_view k, std::string_view v) {
                  p.config.problem.matrix_noise =
                      rethrow_as_config(k, [&] { return problems::parse_matrix_noise(v); });
              },
              [](const RunConfig& c) { return std::string(to_string(c.problem.matrix_noise)); }},
        GEOGNS_INT("features", "input features (logistic, tiny_mlp)", problem.features),
        GEOGNS_INT("hidden", "tiny_mlp hidden units (<= 64)", problem.hidden),
        GEOGNS_INT("train_size", "training examples", problem.train_size),
        GEOGNS_INT("eval_size", "held-out examples", problem.eval_size),
        GEOGNS_DOUBLE("separation", "logistic cluster separation", problem.separation),
        GEOGNS_DOUBLE("label_noise", "tiny_mlp label noise standard deviation", problem.label_noise),
        GEOGNS_UINT("problem_seed", "seed fixing targets, bases and datasets", problem.problem_seed),
        // optimizer
        Entry{{"optimizer", "sgd | msgd | signsgd | signum | specsgd | muon | adamw"},
              [](Pending& p, std::string_view k, std::string_view v) {
                  p.config.optimizer.kind =
                      rethrow_as_config(k, [&] { return optim::parse_optimizer(v); });
              },
              [](const RunConfig& c) { return std::string(optim::to_string(c.optimizer.kind)); }},
        Entry{{"vector_optimizer", "optimizer for vector groups, or none to reuse optimizer"},
              [](Pending& p, std::string_view k, std::string_view v) {
                  if (v == "none") {
                      p.vector_kind.reset();
                  } else {
                      p.vector_kind = rethrow_as_config(k, [&] { return optim::parse_optimizer(v); });
                  }
              },
              [](const RunConfig& c) {
                  return c.vector_optimizer ? std::string(optim::to_string(c.vector_optimizer->kind))
                                            : std::string("none");
              }},
        GEOGNS_DOUBLE("lr", "peak learning rate", optimizer.lr),
        GEOGNS_DOUBLE("momentum", "momentum / EMA beta (msgd, signum, muon)", optimizer.momentum),
        GEOGNS_DOUBLE("beta1", "adamw first-moment beta", optimizer.beta1),
        GEOGNS_DOUBLE("beta2", "adamw second-moment beta", optimizer.beta2),
        GEOGNS_DOUBLE("epsilon", "adamw epsilon", optimizer.epsilon),
        GEOGNS_DOUBLE("weight_decay", "decoupled weight decay", optimizer.weight_decay),
        GEOGNS_INT("ns_iterations", "Newton-Schulz iterations (muon)", optimizer.ns_iterations),
        // schedule
        GEOGNS_BOOL("adaptive", "grow the batch from GNS measurements", adaptive),
        GEOGNS_DOUBLE("theta", "noise tolerance; batch = gns / theta^2", schedule.theta),
        GEOGNS_UINT("frequency", "measure every F steps", schedule.frequency),
        GEOGNS_UINT("warmup_steps", "steps before the batch may grow", schedule.warmup),
        GEOGNS_DOUBLE("beta_n", "EMA beta for the noise term", schedule.beta_noise),
        GEOGNS_DOUBLE("beta_m", "EMA beta for the signal term", schedule.beta_signal),
        GEOGNS_INT("initial_batch", "starting global batch", schedule.initial_batch),
        GEOGNS_INT("batch_cap", "largest global batch", schedule.batch_cap),
        GEOGNS_BOOL("lr_scaling", "scale lr by sqrt(B / B0)", schedule.lr_scaling),
        GEOGNS_DOUBLE("sample_budget", "total samples to consume", schedule.sample_budget),
        // measurement and run
        Entry{{"gns", "l1 | l2 | nuclear | oracle"},
              [](Pending& p, std::string_view, std::string_view v) {
                  p.config.gns = parse_gns_source(v);
              },
              [](const RunConfig& c) { return std::string(to_string(c.gns)); }},
        GEOGNS_BOOL("gns_matrix_only", "measure GNS on matrix groups only", gns_matrix_only),
        GEOGNS_INT("ranks", "simulated data-parallel ranks", ranks),
        GEOGNS_UINT("seed", "sampling seed", seed),
        GEOGNS_INT("eval_every", "evaluate every N samples (0 = every step)", eval_every),
        Entry{{"lr_schedule", "cosine | constant"},
              [](Pending& p, std::string_view, std::string_view v) {
                  if (v == "cosine") {
                      p.config.lr_schedule.kind = LrScheduleKind::Cosine;
                  } else if (v == "constant") {
                      p.config.lr_schedule.kind = LrScheduleKind::Constant;
                  } else {
                      throw ConfigError("unknown lr schedule '" + std::string(v) + "'");
                  }
              },
              [](const RunConfig& c) { return std::string(to_string(c.lr_schedule.kind)); }},
        GEOGNS_DOUBLE("warmup_fraction", "fraction of the budget spent in lr warmup",
                      lr_schedule.warmup_fraction),
        GEOGNS_DOUBLE("min_lr_fraction", "final lr as a fraction of the peak", lr_schedule.min_fraction),
    };
    return entries;
}

#undef GEOGNS_DOUBLE
#undef GEOGNS_INT
#undef GEOGNS_UINT
#undef GEOGNS_BOOL

gns::GnsNorm norm_for(GnsSource source, optim::OptimizerKind kind) {
    switch (source) {
        case GnsSource::L1: return gns::GnsNorm::L1;
        case GnsSource::L2: return gns::GnsNorm::L2;
        case GnsSource::Nuclear: return gns::GnsNorm::Nuclear;
        case GnsSource::Oracle: break;
    }
    switch (optim::natural_geometry(kind)) {
        case geometry::GeometryKind::SignLinf: return gns::GnsNorm::L1;
        case geometry::GeometryKind::SpectralSinf: return gns::GnsNorm::Nuclear;
        case geometry::GeometryKind::Euclidean: break;
    }
    return gns::GnsNorm::L2;
}

optim::OptimizerAssignment assignment_for(const RunConfig& config) {
    optim::OptimizerAssignment a;
    a.matrix = config.optimizer;
    a.vector = config.vector_optimizer ? config.vector_optimizer : config.optimizer;
    return a;
}

std::string step_error(std::uint64_t step, std::string_view what) {
    return "non-finite " + std::string(what) + " at step " + std::to_string(step);
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::optional<double> optional_field(std::string_view key, std::string_view text) {
    if (text.empty()) return std::nullopt;
    return parse_double(key, text);
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string optional_text(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

}  // namespace

double LrSchedule::factor(double samples, double budget) const {
    if (kind == LrScheduleKind::Constant) return 1.0;
    if (!(budget > 0.0)) return 1.0;
    const double t = std::clamp(samples / budget, 0.0, 1.0);
    if (warmup_fraction > 0.0 && t < warmup_fraction) return t / warmup_fraction;
    const double span = 1.0 - warmup_fraction;
    const double progress = span > 0.0 ? (t - warmup_fraction) / span : 1.0;
    return min_fraction +
           (1.0 - min_fraction) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

std::string_view to_string(GnsSource source) {
    switch (source) {
        case GnsSource::L1: return "l1";
        case GnsSource::L2: return "l2";
        case GnsSource::Nuclear: return "nuclear";
        case GnsSource::Oracle: return "oracle";
    }
    return "unknown";
}

void RunConfig::validate() const {
    try {
        optimizer.validate();
        if (vector_optimizer) vector_optimizer->validate();
        schedule.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (ranks < 1) throw ConfigError("ranks must be >= 1");
    const bool estimating = adaptive && gns != GnsSource::Oracle;
    if (estimating && ranks < 2) throw ConfigError("GNS estimation needs ranks >= 2");
    if (schedule.initial_batch % ranks != 0) {
        throw ConfigError("initial_batch must be a multiple of ranks");
    }
    if (schedule.batch_cap % ranks != 0) throw ConfigError("batch_cap must be a multiple of ranks");
    if (!(schedule.sample_budget > 0.0)) throw ConfigError("sample_budget must be positive");
    if (eval_every < 0) throw ConfigError("eval_every must be >= 0");
    if (!(lr_schedule.warmup_fraction >= 0.0 && lr_schedule.warmup_fraction < 1.0)) {
        throw ConfigError("warmup_fraction must lie in [0, 1)");
    }
    if (!(lr_schedule.min_fraction >= 0.0 && lr_schedule.min_fraction <= 1.0)) {
        throw ConfigError("min_lr_fraction must lie in [0, 1]");
    }
    if (problem.hidden > 64) throw ConfigError("hidden must be <= 64");
    try {
        const auto p = problems::make_problem(problem);
        if (gns == GnsSource::Oracle && adaptive && !p->is_synthetic()) {
            throw ConfigError("gns = oracle needs a synthetic problem");
        }
        const Params params = p->initial_params(seed);
        if (gns_matrix_only && std::none_of(params.begin(), params.end(), [](const ParamGroup& g) {
                return g.shape == ParamShape::Matrix;
            })) {
            throw ConfigError("gns_matrix_only set but the problem has no matrix parameters");
        }
        optim::CompositeOptimizer check(params, assignment_for(*this));
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

std::span<const ConfigKey> config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> out;
        for (const auto& e : registry()) out.push_back(e.key);
        return out;
    }();
    return keys;
}

RunConfig parse_config(std::string_view text) {
    Pending pending;
    std::set<std::string, std::less<>> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError("line " + std::to_string(line_no) + ": empty key or value");
        }
        const auto& entries = registry();
        const auto it = std::find_if(entries.begin(), entries.end(),
                                     [&](const Entry& e) { return e.key.name == key; });
        if (it == entries.end()) throw ConfigError("unknown key '" + std::string(key) + "'");
        if (!seen.emplace(key).second) {
            throw ConfigError("duplicate key '" + std::string(key) + "'");
        }
        it->set(pending, key, value);
    }
    RunConfig config = pending.config;
    // Without an explicit warmup_steps the batch stays fixed through the lr warmup.
    if (!seen.contains("warmup_steps") && config.lr_schedule.kind == LrScheduleKind::Cosine &&
        config.schedule.initial_batch > 0 && config.schedule.sample_budget > 0.0) {
        config.schedule.warmup = static_cast<std::uint64_t>(
            std::ceil(config.lr_schedule.warmup_fraction * config.schedule.sample_budget /
                      static_cast<double>(config.schedule.initial_batch)));
    }
    if (pending.vector_kind) {
        config.vector_optimizer = config.optimizer;
        config.vector_optimizer->kind = *pending.vector_kind;
    }
    config.validate();
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string render_config(const RunConfig& config) {
    std::string out;
    for (const auto& e : registry()) {
        out += e.key.name;
        out += " = ";
        out += e.get(config);
        out += '\n';
    }
    return out;
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw NumericalError("format_double: conversion failed");
    return std::string(buf, ptr);
}

void write_trace_header(std::ostream& out) { out << kTraceHeader << '\n'; }

void write_trace_record(std::ostream& out, const TraceRecord& r) {
    out << r.step << ',' << format_double(r.samples) << ',' << format_double(r.train_loss) << ','
        << optional_text(r.eval_loss) << ',' << r.batch_size << ',' << optional_text(r.gns_ema)
        << ',' << format_double(r.lr) << ',' << format_double(r.lr_multiplier) << ','
        << format_double(r.grad_dual_norm) << '\n';
}

void write_trace(std::ostream& out, const RunTrace& trace) {
    write_trace_header(out);
    for (const auto& r : trace.records) write_trace_record(out, r);
}

RunTrace read_trace(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != kTraceHeader) {
        throw InvalidArgument("read_trace: missing or unexpected header");
    }
    RunTrace trace;
    while (std::getline(in, line)) {
        const auto body = trim(line);
        if (body.empty()) continue;
        const auto f = split_csv(body);
        if (f.size() != 9) throw InvalidArgument("read_trace: expected 9 columns");
        try {
            TraceRecord r;
            r.step = parse_uint("step", f[0]);
            r.samples = parse_double("samples", f[1]);
            r.train_loss = parse_double("train_loss", f[2]);
            r.eval_loss = optional_field("eval_loss", f[3]);
            r.batch_size = static_cast<Index>(parse_int("batch_size", f[4]));
            r.gns_ema = optional_field("gns_ema", f[5]);
            r.lr = parse_double("lr", f[6]);
            r.lr_multiplier = parse_double("lr_multiplier", f[7]);
            r.grad_dual_norm = parse_double("grad_dual_norm", f[8]);
            trace.records.push_back(r);
        } catch (const ConfigError& e) {
            throw InvalidArgument(std::string("read_trace: ") + e.what());
        }
    }
    return trace;
}

RunTrace run_experiment(const RunConfig& config, std::ostream* csv) {
    config.validate();
    const auto problem = problems::make_problem(config.problem);
    Params params = problem->initial_params(config.seed);
    optim::CompositeOptimizer optimizer(params, assignment_for(config));
    const gns::GnsNorm norm = norm_for(config.gns, config.optimizer.kind);
    const bool oracle = config.gns == GnsSource::Oracle;

    std::vector<geometry::GeometryKind> group_geometry;
    for (std::size_t i = 0; i < optimizer.size(); ++i) {
        group_geometry.push_back(optim::natural_geometry(optimizer.config_for(i).kind));
    }

    sched::ScheduleState state = sched::initial_state(config.schedule);
    const double budget = config.schedule.sample_budget;
    const auto eval_every = static_cast<double>(config.eval_every);
    double samples = 0.0;
    double next_eval = eval_every;

    if (csv) write_trace_header(*csv);
    RunTrace trace;
    while (samples < budget) {
        const std::uint64_t k = state.step;
        const Index batch = state.batch;
        const bool measuring = config.adaptive && sched::should_measure(k, config.schedule);

        const parallel::RankLayout layout{config.ranks, batch};
        const parallel::StepSample sample = parallel::simulate_step(
            *problem, params, layout, config.seed, k, measuring && !oracle);
        if (!std::isfinite(sample.train_loss) || !all_finite(sample.bundle.global)) {
            throw NumericalError(step_error(k + 1, "gradient or loss"));
        }

        std::optional<sched::Measurement> measurement;
        if (measuring) {
            gns::NoiseSignal ns;
            if (oracle) {
                const auto stats = problem->true_noise_stats(params);
                ns = gns::measure_exact(stats, problem->true_gradient(params)[0], norm);
            } else {
                ns = gns::measure(sample, params, norm, config.gns_matrix_only);
            }
            if (!std::isfinite(ns.noise) || !std::isfinite(ns.signal)) {
                throw NumericalError(step_error(k + 1, "GNS measurement"));
            }
            if (ns.signal > 0.0) measurement = sched::Measurement{ns.noise, ns.signal};
        }

        const double factor =
            config.lr_schedule.factor(samples + 0.5 * static_cast<double>(batch), budget);
        const double omega = state.lr_multiplier;
        optimizer.step(params, sample.bundle.global, factor, omega);
        for (const auto& g : params) {
            if (!all_finite(g.value)) throw NumericalError(step_error(k + 1, "parameters"));
        }

        state = sched::controller_step(state, config.schedule, measurement, config.ranks);
        samples += static_cast<double>(batch);

        TraceRecord r;
        r.step = k + 1;
        r.samples = samples;
        r.train_loss = sample.train_loss;
        r.batch_size = batch;
        if (state.ema.initialized) r.gns_ema = state.ema.ratio();
        r.lr = config.optimizer.lr * factor;
        r.lr_multiplier = omega;
        for (std::size_t i = 0; i < params.size(); ++i) {
            r.grad_dual_norm += geometry::dual_norm(sample.bundle.global[i], group_geometry[i]);
        }
        const bool last = samples >= budget;
        if (config.eval_every == 0 || samples >= next_eval || last) {
            const double e = problem->eval_loss(params);
            if (!std::isfinite(e)) throw NumericalError(step_error(k + 1, "eval loss"));
            r.eval_loss = e;
            if (eval_every > 0.0) {
                while (next_eval <= samples) next_eval += eval_every;
            }
        }
        if (csv) write_trace_record(*csv, r);
        trace.records.push_back(r);
    }
    return trace;
}

std::optional<std::uint64_t> steps_to_target(const RunTrace& trace, double target) {
    for (const auto& r : trace.records) {
        if (r.eval_loss && *r.eval_loss <= target) return r.step;
    }
    return std::nullopt;
}

std::optional<double> min_eval_loss(const RunTrace& trace) {
    std::optional<double> best;
    for (const auto& r : trace.records) {
        if (r.eval_loss && (!best || *r.eval_loss < *best)) best = r.eval_loss;
    }
    return best;
}

std::optional<double> final_eval_loss(const RunTrace& trace) {
    for (auto it = trace.records.rbegin(); it != trace.records.rend(); ++it) {
        if (it->eval_loss) return it->eval_loss;
    }
    return std::nullopt;
}

ComparisonSummary compare_runs(std::span<const RunTrace> baseline,
                               std::span<const RunTrace> candidate) {
    if (baseline.empty() || candidate.empty()) {
        throw InvalidArgument("compare_runs: need at least one trace per side");
    }
    if (baseline.size() != candidate.size()) {
        throw InvalidArgument("compare_runs: baseline and candidate seed counts differ");
    }
    auto finals = [](std::span<const RunTrace> traces) {
        std::vector<double> out;
        for (const auto& t : traces) {
            const auto f = final_eval_loss(t);
            if (!f) throw InvalidArgument("compare_runs: trace without eval loss");
            out.push_back(*f);
        }
        return out;
    };
    const auto b = finals(baseline);
    const auto c = finals(candidate);

    ComparisonSummary s;
    s.baseline_final_mean = mean_of(b);
    s.baseline_final_std = std_of(b);
    s.candidate_final_mean = mean_of(c);
    s.candidate_final_std = std_of(c);

    for (std::size_t i = 0; i < baseline.size(); ++i) {
        const double target = *min_eval_loss(baseline[i]);
        const auto base_steps = steps_to_target(baseline[i], target);
        const auto cand_steps = steps_to_target(candidate[i], target);
        if (!cand_steps) {
            s.per_seed_reduction.push_back(std::nullopt);
        } else {
            const auto bs = static_cast<double>(*base_steps);
            s.per_seed_reduction.push_back(100.0 * (bs - static_cast<double>(*cand_steps)) / bs);
        }
    }

    // Seeds that never reached the target rank below every finite reduction.
    auto ordered = s.per_seed_reduction;
    std::sort(ordered.begin(), ordered.end(), [](const auto& x, const auto& y) {
        if (!x) return static_cast<bool>(y);
        if (!y) return false;
        return *x < *y;
    });
    const std::size_t n = ordered.size();
    const auto& hi = ordered[n / 2];
    if (n % 2 == 1) {
        s.median_steps_reduction = hi;
    } else {
        const auto& lo = ordered[n / 2 - 1];
        if (lo && hi) s.median_steps_reduction = 0.5 * (*lo + *hi);
    }
    return s;
}

void write_summary_csv(std::ostream& out, const ComparisonSummary& s) {
    out << "metric,value\n";
    out << "baseline_final_mean," << format_double(s.baseline_final_mean) << '\n';
    out << "baseline_final_std," << format_double(s.baseline_final_std) << '\n';
    out << "candidate_final_mean," << format_double(s.candidate_final_mean) << '\n';
    out << "candidate_final_std," << format_double(s.candidate_final_std) << '\n';
    out << "median_steps_reduction_pct,"
        << (s.median_steps_reduction ? format_double(*s.median_steps_reduction)
                                     : std::string(kNotReached))
        << '\n';
    for (std::size_t i = 0; i < s.per_seed_reduction.size(); ++i) {
        const auto& v = s.per_seed_reduction[i];
        out << "seed_" << i << "_steps_reduction_pct,"
            << (v ? format_double(*v) : std::string(kNotReached)) << '\n';
    }
}

std::string summarize_run(const RunConfig& config, const RunTrace& trace) {
    std::ostringstream out;
    out << "problem: " << problems::to_string(config.problem.kind) << '\n';
    out << "optimizer: " << optim::to_string(config.optimizer.kind) << '\n';
    if (config.vector_optimizer) {
        out << "vector_optimizer: " << optim::to_string(config.vector_optimizer->kind) << '\n';
    }
    out << "adaptive: " << bool_text(config.adaptive) << '\n';
    out << "gns: " << to_string(config.gns) << '\n';
    out << "seed: " << config.seed << '\n';
    out << "steps: " << trace.records.size() << '\n';
    if (trace.records.empty()) return out.str();
    const auto& last = trace.records.back();
    out << "samples: " << format_double(last.samples) << '\n';
    out << "final_train_loss: " << format_double(last.train_loss) << '\n';
    const auto fin = final_eval_loss(trace);
    const auto best = min_eval_loss(trace);
    out << "final_eval_loss: " << (fin ? format_double(*fin) : std::string(kNotReached)) << '\n';
    out << "min_eval_loss: " << (best ? format_double(*best) : std::string(kNotReached)) << '\n';
    out << "final_batch_size: " << last.batch_size << '\n';
    out << "final_lr_multiplier: " << format_double(last.lr_multiplier) << '\n';
    out << "final_gns_ema: " << (last.gns_ema ? format_double(*last.gns_ema) : std::string(kNotReached))
        << '\n';
    return out.str();
}

std::string render_svg(const RunTrace& trace) {
    constexpr double width = 640.0;
    constexpr double panel = 180.0;
    constexpr double margin = 40.0;
    struct Series {
        std::string title;
        std::vector<std::pair<double, double>> points;
    };
    std::vector<Series> series(3);
    series[0].title = "eval loss";
    series[1].title = "batch size";
    series[2].title = "gns ema";
    for (const auto& r : trace.records) {
        const auto x = static_cast<double>(r.step);
        if (r.eval_loss) series[0].points.emplace_back(x, *r.eval_loss);
        series[1].points.emplace_back(x, static_cast<double>(r.batch_size));
        if (r.gns_ema) series[2].points.emplace_back(x, *r.gns_ema);
    }
    const double x_max =
        trace.records.empty() ? 1.0 : std::max(1.0, static_cast<double>(trace.records.back().step));
    const double height = 3.0 * (panel + margin) + margin;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_double(width)
        << "\" height=\"" << format_double(height) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    for (std::size_t p = 0; p < series.size(); ++p) {
        const double top = margin + static_cast<double>(p) * (panel + margin);
        const double left = margin;
        const double plot_w = width - 2.0 * margin;
        svg << "<text x=\"" << format_double(left) << "\" y=\"" << format_double(top - 8.0) << "\">"
            << series[p].title << "</text>\n";
        svg << "<rect x=\"" << format_double(left) << "\" y=\"" << format_double(top)
            << "\" width=\"" << format_double(plot_w) << "\" height=\"" << format_double(panel)
            << "\" fill=\"none\" stroke=\"#888\"/>\n";
        const auto& pts = series[p].points;
        if (pts.empty()) continue;
        double lo = pts.front().second;
        double hi = lo;
        for (const auto& [x, y] : pts) {
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
        const double span = hi > lo ? hi - lo : 1.0;
        svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double px = left + plot_w * pts[i].first / x_max;
            const double py = top + panel - panel * (pts[i].second - lo) / span;
            if (i) svg << ' ';
            svg << format_double(px) << ',' << format_double(py);
        }
        svg << "\"/>\n";
        svg << "<text x=\"" << format_double(left + plot_w - 4.0) << "\" y=\""
            << format_double(top + 14.0) << "\" text-anchor=\"end\">max " << format_double(hi)
            << "</text>\n";
        svg << "<text x=\"" << format_double(left + plot_w - 4.0) << "\" y=\""
            << format_double(top + panel - 4.0) << "\" text-anchor=\"end\">min " << format_double(lo)
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace geogns::harness
