#include "geogns/parallel_sim.hpp"

#include <string>

#include "geogns/errors.hpp"
#include "geogns/rng.hpp"

namespace geogns::parallel {

void RankLayout::validate(bool for_noise_estimation) const {
    if (ranks < 1) throw InvalidArgument("rank count must be >= 1");
    if (global_batch < 1) throw InvalidArgument("global batch must be >= 1");
    if (global_batch % ranks != 0) {
        throw InvalidArgument("global batch " + std::to_string(global_batch) +
                              " is not divisible by " + std::to_string(ranks) + " ranks");
    }
    if (for_noise_estimation && ranks < 2) {
        throw InvalidArgument("noise estimation needs at least 2 ranks");
    }
}

std::vector<std::vector<std::uint64_t>> partition_batch(std::span<const std::uint64_t> ids,
                                                        const RankLayout& layout) {
    if (static_cast<Index>(ids.size()) != layout.global_batch) {
        throw InvalidArgument("partition_batch: id count differs from the global batch");
    }
    layout.validate(false);
    const auto local = static_cast<std::size_t>(layout.local_batch());
    std::vector<std::vector<std::uint64_t>> shards(static_cast<std::size_t>(layout.ranks));
    for (std::size_t j = 0; j < shards.size(); ++j) {
        shards[j].assign(ids.begin() + static_cast<std::ptrdiff_t>(j * local),
                         ids.begin() + static_cast<std::ptrdiff_t>((j + 1) * local));
    }
    return shards;
}

Matrix all_reduce_mean(std::span<const Matrix> locals) {
    if (locals.empty()) throw InvalidArgument("all_reduce_mean: no inputs");
    Matrix sum = locals.front();
    for (std::size_t j = 1; j < locals.size(); ++j) {
        if (locals[j].rows() != sum.rows() || locals[j].cols() != sum.cols()) {
            throw InvalidArgument("all_reduce_mean: shape mismatch at rank " + std::to_string(j));
        }
        sum += locals[j];
    }
    return sum / static_cast<double>(locals.size());
}

Tensors all_reduce_mean(std::span<const Tensors> locals) {
    if (locals.empty()) throw InvalidArgument("all_reduce_mean: no inputs");
    Tensors sum = locals.front();
    for (std::size_t j = 1; j < locals.size(); ++j) {
        require_same_shapes(sum, locals[j], "all_reduce_mean");
        for (std::size_t g = 0; g < sum.size(); ++g) sum[g] += locals[j][g];
    }
    for (auto& t : sum) t /= static_cast<double>(locals.size());
    return sum;
}

GramSide smaller_side(Index rows, Index cols) {
    return rows <= cols ? GramSide::Row : GramSide::Column;
}

Matrix gram(const Matrix& g, GramSide side) {
    return side == GramSide::Row ? Matrix(g * g.transpose()) : Matrix(g.transpose() * g);
}

SecondMoments reduce_second_moments(const GradientBundle& bundle) {
    if (bundle.locals.empty()) throw InvalidArgument("reduce_second_moments: empty bundle");
    const std::size_t groups = bundle.global.size();
    SecondMoments m;
    m.squares_mean.resize(groups);
    m.gram_mean.resize(groups);
    m.gram_sides.resize(groups);
    for (std::size_t g = 0; g < groups; ++g) {
        const Matrix& ref = bundle.global[g];
        const GramSide side = smaller_side(ref.rows(), ref.cols());
        const Index k = side == GramSide::Row ? ref.rows() : ref.cols();
        Matrix squares = Matrix::Zero(ref.rows(), ref.cols());
        Matrix grams = Matrix::Zero(k, k);
        for (const auto& local : bundle.locals) {
            squares += local[g].cwiseAbs2();
            grams += gram(local[g], side);
        }
        const auto r = static_cast<double>(bundle.locals.size());
        m.squares_mean[g] = squares / r;
        m.gram_mean[g] = grams / r;
        m.gram_sides[g] = side;
    }
    return m;
}

StepSample simulate_step(const problems::Problem& problem, const Params& params,
                         const RankLayout& layout, std::uint64_t seed, std::uint64_t step,
                         bool want_stats) {
    layout.validate(want_stats);
    const Index local = layout.local_batch();

    StepSample out;
    out.bundle.layout = layout;
    out.bundle.step = step;
    out.bundle.locals.reserve(static_cast<std::size_t>(layout.ranks));

    double loss_sum = 0.0;
    for (int j = 0; j < layout.ranks; ++j) {
        Tensors acc = zeros_like(params);
        for (Index i = 0; i < local; ++i) {
            const auto index = static_cast<std::uint64_t>(j * local + i);
            const problems::SampleEval eval =
                problem.evaluate_sample(params, sample_key(seed, step, index));
            loss_sum += eval.loss;
            for (std::size_t g = 0; g < acc.size(); ++g) acc[g] += eval.gradient[g];
        }
        for (auto& t : acc) t /= static_cast<double>(local);
        out.bundle.locals.push_back(std::move(acc));
    }
    out.bundle.global = all_reduce_mean(std::span<const Tensors>(out.bundle.locals));
    out.train_loss = loss_sum / static_cast<double>(layout.global_batch);
    if (want_stats) out.moments = reduce_second_moments(out.bundle);
    return out;
}

}  // namespace geogns::parallel
