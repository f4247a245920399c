#pragma once

// In-process stand-in for data-parallel training. A global batch of B samples
// is split into R contiguous shards; each "rank" averages its shard's
// per-sample gradients, and the local results are reduced in ascending rank
// order. Sample keys depend on (seed, step, global index) only, so the drawn
// sample set is the same for every R.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "geogns/problems.hpp"
#include "geogns/tensor.hpp"

namespace geogns::parallel {

struct RankLayout {
    int ranks = 1;
    Index global_batch = 1;

    Index local_batch() const { return global_batch / ranks; }
    // B > 0, R >= 1, B mod R == 0, and R >= 2 when noise statistics are wanted.
    void validate(bool for_noise_estimation) const;
};

// Shard j receives ids [j*B/R, (j+1)*B/R).
std::vector<std::vector<std::uint64_t>> partition_batch(std::span<const std::uint64_t> ids,
                                                        const RankLayout& layout);

// Elementwise mean, accumulated in list order then divided by the count.
Matrix all_reduce_mean(std::span<const Matrix> locals);
Tensors all_reduce_mean(std::span<const Tensors> locals);

struct GradientBundle {
    std::vector<Tensors> locals;  // one per rank
    Tensors global;
    RankLayout layout;
    std::uint64_t step = 0;
};

enum class GramSide { Row, Column };

// Row side (G G^T) when rows <= cols, column side (G^T G) otherwise.
GramSide smaller_side(Index rows, Index cols);
Matrix gram(const Matrix& g, GramSide side);

// Reduced second moments of the local gradients, one entry per group:
//   squares_mean[i] = (1/R) sum_j (g_i^j)^2          (elementwise)
//   gram_mean[i]    = (1/R) sum_j gram(G_i^j, side)  (smaller side)
struct SecondMoments {
    Tensors squares_mean;
    Tensors gram_mean;
    std::vector<GramSide> gram_sides;
};

SecondMoments reduce_second_moments(const GradientBundle& bundle);

struct StepSample {
    GradientBundle bundle;
    std::optional<SecondMoments> moments;
    double train_loss = 0.0;  // mean per-sample loss over the global batch
};

StepSample simulate_step(const problems::Problem& problem, const Params& params,
                         const RankLayout& layout, std::uint64_t seed, std::uint64_t step,
                         bool want_stats);

}  // namespace geogns::parallel
