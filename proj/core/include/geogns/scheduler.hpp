#pragma once

// Adaptive batch-size controller.
//
// At every step k with k mod F == 0 the noise/signal EMAs absorb the latest
// measurement. Once k >= I (warmup) the batch becomes
//     B_{k+1} = max(ceil(N_k / (theta^2 M_k)), B_k)
// and the learning-rate multiplier follows omega_{k+1} = omega_k sqrt(B_{k+1}/B_k),
// which telescopes to sqrt(B_k / B_0).

#include <cstdint>
#include <optional>

#include "geogns/gns.hpp"

namespace geogns::sched {

struct ScheduleConfig {
    double theta = 0.6;
    std::uint64_t frequency = 100;  // F
    std::uint64_t warmup = 0;       // I
    std::uint64_t total_steps = 0;  // K; 0 when the run is bounded by samples instead
    double beta_noise = 0.9;
    double beta_signal = 0.9;
    Index initial_batch = 16;
    Index batch_cap = 4096;
    bool lr_scaling = true;
    double sample_budget = 0.0;

    void validate() const;
};

struct ScheduleState {
    gns::EmaPair ema;
    Index batch = 1;
    double lr_multiplier = 1.0;
    std::uint64_t step = 0;
};

ScheduleState initial_state(const ScheduleConfig& config);

bool should_measure(std::uint64_t step, const ScheduleConfig& config);

// max(ceil(noise / (theta^2 signal)), current). Throws InvalidArgument when
// signal <= 0. Saturates instead of overflowing.
Index propose_batch(double noise, double signal, double theta, Index current);

// omega * sqrt(new / old). Throws InvalidArgument when new < old.
double lr_multiplier_update(double omega, Index new_batch, Index old_batch);

struct Measurement {
    double noise = 0.0;
    double signal = 0.0;
};

// One pass of the controller for step state.step. A measurement passed on a
// non-measurement step is ignored. Proposals are clamped to batch_cap and then
// rounded up to a multiple of `granularity` (the rank count).
ScheduleState controller_step(const ScheduleState& state, const ScheduleConfig& config,
                              const std::optional<Measurement>& measurement,
                              Index granularity = 1);

Index round_up_to_multiple(Index value, Index multiple);

}  // namespace geogns::sched
