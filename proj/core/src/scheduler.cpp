#include "geogns/scheduler.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "geogns/errors.hpp"

namespace geogns::sched {

namespace {

constexpr Index kMaxBatch = std::numeric_limits<Index>::max() / 4;

}  // namespace

void ScheduleConfig::validate() const {
    if (!(theta > 0.0 && theta < 1.0)) throw InvalidArgument("theta must lie in (0, 1)");
    if (frequency < 1) throw InvalidArgument("frequency must be >= 1");
    if (total_steps != 0 && warmup > total_steps) {
        throw InvalidArgument("warmup must not exceed the total step count");
    }
    if (!(beta_noise >= 0.0 && beta_noise < 1.0) || !(beta_signal >= 0.0 && beta_signal < 1.0)) {
        throw InvalidArgument("EMA betas must lie in [0, 1)");
    }
    if (initial_batch < 1) throw InvalidArgument("initial_batch must be >= 1");
    if (batch_cap < initial_batch) throw InvalidArgument("batch_cap must be >= initial_batch");
    if (sample_budget < 0.0) throw InvalidArgument("sample_budget must be >= 0");
}

ScheduleState initial_state(const ScheduleConfig& config) {
    config.validate();
    ScheduleState s;
    s.ema.beta_noise = config.beta_noise;
    s.ema.beta_signal = config.beta_signal;
    s.batch = config.initial_batch;
    s.lr_multiplier = 1.0;
    s.step = 0;
    return s;
}

bool should_measure(std::uint64_t step, const ScheduleConfig& config) {
    return step % config.frequency == 0;
}

Index propose_batch(double noise, double signal, double theta, Index current) {
    if (!(signal > 0.0)) throw InvalidArgument("propose_batch: signal must be positive");
    if (!(noise >= 0.0)) throw InvalidArgument("propose_batch: noise must be nonnegative");
    if (!(theta > 0.0 && theta < 1.0)) throw InvalidArgument("propose_batch: theta outside (0, 1)");
    double ratio = noise / (theta * theta * signal);
    // Ratios that are integral up to roundoff must not round up past the integer.
    const double nearest = std::round(ratio);
    if (std::abs(ratio - nearest) <= 1e-12 * std::max(1.0, nearest)) ratio = nearest;
    const double ceiled = std::ceil(ratio);
    const Index proposed =
        ceiled >= static_cast<double>(kMaxBatch) ? kMaxBatch : static_cast<Index>(ceiled);
    return std::max(proposed, current);
}

double lr_multiplier_update(double omega, Index new_batch, Index old_batch) {
    if (old_batch < 1) throw InvalidArgument("lr_multiplier_update: batch must be >= 1");
    if (new_batch < old_batch) {
        throw InvalidArgument("lr_multiplier_update: batch size may not decrease");
    }
    if (new_batch == old_batch) return omega;
    return omega * std::sqrt(static_cast<double>(new_batch) / static_cast<double>(old_batch));
}

Index round_up_to_multiple(Index value, Index multiple) {
    if (multiple < 1) throw InvalidArgument("round_up_to_multiple: multiple must be >= 1");
    return ((value + multiple - 1) / multiple) * multiple;
}

ScheduleState controller_step(const ScheduleState& state, const ScheduleConfig& config,
                              const std::optional<Measurement>& measurement, Index granularity) {
    ScheduleState next = state;
    next.step = state.step + 1;
    if (!should_measure(state.step, config) || !measurement) return next;

    next.ema = gns::ema_update(state.ema, measurement->noise, measurement->signal);
    if (state.step < config.warmup) return next;

    Index proposed = propose_batch(next.ema.noise, next.ema.signal, config.theta, state.batch);
    proposed = std::min(proposed, config.batch_cap);
    proposed = std::max(round_up_to_multiple(proposed, granularity), state.batch);
    if (config.lr_scaling) {
        next.lr_multiplier = lr_multiplier_update(state.lr_multiplier, proposed, state.batch);
    }
    next.batch = proposed;
    return next;
}

}  // namespace geogns::sched
