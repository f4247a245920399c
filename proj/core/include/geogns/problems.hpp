#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>

#include "geogns/tensor.hpp"

namespace geogns::problems {

enum class ProblemKind { NoisyQuadratic, MatrixQuadratic, Logistic, TinyMlp };
enum class NoiseDistribution { Gaussian, StudentT };

// How MatrixQuadratic draws its per-sample noise E with E[E E^T] = Sigma_row.
//   RowGaussian      E = Sigma_row^{1/2} Z / sqrt(n), Z i.i.d. N(0,1)
//   SpectralAligned  E = U diag(sqrt(lambda) * z) V^T, Sigma_row = U diag(lambda) U^T
//                    and V a fixed orthonormal basis; row- and column-side
//                    covariances then share the same spectrum.
enum class MatrixNoise { RowGaussian, SpectralAligned };

std::string_view to_string(ProblemKind kind);
ProblemKind parse_problem_kind(std::string_view name);
NoiseDistribution parse_noise_distribution(std::string_view name);
MatrixNoise parse_matrix_noise(std::string_view name);

struct SampleEval {
    double loss = 0.0;
    Tensors gradient;
};

// Exact per-sample noise statistics at a point (synthetic problems only).
struct NoiseStats {
    Matrix sigma;              // componentwise standard deviations, parameter-shaped
    Matrix row_covariance;     // E[E E^T]
    Matrix column_covariance;  // E[E^T E]

    double sigma_l1() const;        // ||sigma||_1
    double trace() const;           // tr(C) = ||sigma||_2^2
    // ||C^{1/2}||_S1 on the smaller side, the side the estimators use.
    double sqrt_nuclear() const;
};

class Problem {
public:
    virtual ~Problem() = default;

    virtual ProblemKind kind() const = 0;
    virtual bool is_synthetic() const = 0;

    // Starting point. Dataset problems draw weights from `seed`.
    virtual Params initial_params(std::uint64_t seed) const = 0;

    // Loss and gradient of one sample, fully determined by (params, key).
    virtual SampleEval evaluate_sample(const Params& params, std::uint64_t key) const = 0;

    // Expected risk for synthetic problems, full training loss otherwise.
    virtual double loss(const Params& params) const = 0;
    virtual Tensors true_gradient(const Params& params) const = 0;

    // Held-out loss; synthetic problems report the expected risk.
    virtual double eval_loss(const Params& params) const { return loss(params); }

    virtual std::optional<double> optimal_loss() const { return std::nullopt; }

    // Throws InvalidArgument for non-synthetic problems.
    virtual NoiseStats true_noise_stats(const Params& params) const;
};

// Gradient of sample `sample_id` under `seed`.
Tensors per_sample_gradient(const Problem& problem, const Params& params,
                            std::uint64_t sample_id, std::uint64_t seed);

// Max relative error between the analytic per-sample gradient and a central
// difference of the per-sample loss, over every coordinate of every group.
// Relative error is |fd - an| / max(|fd|, |an|, 1).
double finite_difference_check(const Problem& problem, const Params& params,
                               std::uint64_t sample_key, double step = 1e-5);

// ---------------------------------------------------------------------------

// l(x; xi) = sum_i (a_i x_i^2 / 2 - b_i x_i + xi_i x_i), Cov(xi) = diag(noise_var).
class NoisyQuadratic final : public Problem {
public:
    NoisyQuadratic(Matrix curvature, Matrix offset, Matrix noise_var,
                   NoiseDistribution dist = NoiseDistribution::Gaussian,
                   double student_df = 5.0, Matrix start = {});

    ProblemKind kind() const override { return ProblemKind::NoisyQuadratic; }
    bool is_synthetic() const override { return true; }
    Params initial_params(std::uint64_t seed) const override;
    SampleEval evaluate_sample(const Params& params, std::uint64_t key) const override;
    double loss(const Params& params) const override;
    Tensors true_gradient(const Params& params) const override;
    std::optional<double> optimal_loss() const override;
    NoiseStats true_noise_stats(const Params& params) const override;

    Index dimension() const { return curvature_.rows(); }
    const Matrix& curvature() const { return curvature_; }
    const Matrix& offset() const { return offset_; }
    Matrix minimizer() const;
    // L_inf = sum a_i and mu_inf = min a_i.
    double smoothness_linf() const;
    double strong_convexity_linf() const;

private:
    Matrix curvature_;
    Matrix offset_;
    Matrix noise_var_;
    NoiseDistribution dist_;
    double student_df_;
    Matrix start_;
};

// l(X; E) = ||X - X*||_F^2 / 2 + <E, X>.
class MatrixQuadratic final : public Problem {
public:
    MatrixQuadratic(Matrix target, Matrix row_covariance,
                    MatrixNoise noise = MatrixNoise::RowGaussian,
                    std::uint64_t basis_seed = 0, Matrix start = {});

    ProblemKind kind() const override { return ProblemKind::MatrixQuadratic; }
    bool is_synthetic() const override { return true; }
    Params initial_params(std::uint64_t seed) const override;
    SampleEval evaluate_sample(const Params& params, std::uint64_t key) const override;
    double loss(const Params& params) const override;
    Tensors true_gradient(const Params& params) const override;
    std::optional<double> optimal_loss() const override { return 0.0; }
    NoiseStats true_noise_stats(const Params& params) const override;

    Index rows() const { return target_.rows(); }
    Index cols() const { return target_.cols(); }
    const Matrix& target() const { return target_; }
    // Descent-lemma constants with respect to the spectral norm:
    // ||D||_F^2 <= min(m,n) ||D||_Sinf^2 gives L = min(m,n); mu = 1.
    double smoothness_spectral() const;
    double strong_convexity_spectral() const { return 1.0; }

private:
    Matrix target_;
    Matrix row_cov_;
    MatrixNoise noise_;
    Matrix row_sqrt_;      // Sigma_row^{1/2} (RowGaussian)
    Matrix left_basis_;    // U (SpectralAligned)
    Matrix right_basis_;   // V (SpectralAligned)
    Matrix mode_std_;      // sqrt(lambda)
    Matrix start_;
};

// Binary logistic regression on two Gaussian clusters. One vector group
// "w" of size features + 1 (last entry is the bias).
class Logistic final : public Problem {
public:
    struct Options {
        Index features = 8;
        Index train_size = 2048;
        Index eval_size = 512;
        double separation = 1.0;
        std::uint64_t data_seed = 7;
    };

    explicit Logistic(const Options& options);

    ProblemKind kind() const override { return ProblemKind::Logistic; }
    bool is_synthetic() const override { return false; }
    Params initial_params(std::uint64_t seed) const override;
    SampleEval evaluate_sample(const Params& params, std::uint64_t key) const override;
    double loss(const Params& params) const override;
    Tensors true_gradient(const Params& params) const override;
    double eval_loss(const Params& params) const override;

    // Throws std::out_of_range for index >= train_size.
    SampleEval evaluate_example(const Params& params, Index index) const;
    Index train_size() const { return train_x_.rows(); }

private:
    SampleEval evaluate_row(const Params& params, const Matrix& x, const Matrix& y,
                            Index row) const;
    double mean_loss(const Params& params, const Matrix& x, const Matrix& y) const;

    Options options_;
    Matrix train_x_, train_y_, eval_x_, eval_y_;
};

// One hidden tanh layer, squared loss, fitted to a noisy random teacher.
// Groups: "w1" (hidden x in, matrix), "b1" (hidden, vector),
//         "w2" (out x hidden, matrix), "b2" (out, vector).
class TinyMlp final : public Problem {
public:
    struct Options {
        Index inputs = 8;
        Index hidden = 32;
        Index outputs = 1;
        Index train_size = 2048;
        Index eval_size = 512;
        double label_noise = 0.1;
        std::uint64_t data_seed = 11;
    };

    explicit TinyMlp(const Options& options);

    ProblemKind kind() const override { return ProblemKind::TinyMlp; }
    bool is_synthetic() const override { return false; }
    Params initial_params(std::uint64_t seed) const override;
    SampleEval evaluate_sample(const Params& params, std::uint64_t key) const override;
    double loss(const Params& params) const override;
    Tensors true_gradient(const Params& params) const override;
    double eval_loss(const Params& params) const override;

    SampleEval evaluate_example(const Params& params, Index index) const;
    Index train_size() const { return train_x_.rows(); }

private:
    SampleEval evaluate_row(const Params& params, const Matrix& x, const Matrix& y,
                            Index row) const;
    double mean_loss(const Params& params, const Matrix& x, const Matrix& y) const;

    Options options_;
    Matrix train_x_, train_y_, eval_x_, eval_y_;
};

// Flat description used by the harness to build a problem.
struct ProblemConfig {
    ProblemKind kind = ProblemKind::NoisyQuadratic;
    // NoisyQuadratic
    Index dim = 16;
    double curvature_min = 1.0;
    double curvature_max = 1.0;
    double noise_std = 1.0;
    NoiseDistribution noise_dist = NoiseDistribution::Gaussian;
    // MatrixQuadratic
    Index rows = 4;
    Index cols = 8;
    double row_noise_min = 0.25;
    double row_noise_max = 1.0;
    MatrixNoise matrix_noise = MatrixNoise::RowGaussian;
    // Logistic / TinyMlp
    Index features = 8;
    Index hidden = 32;
    Index train_size = 2048;
    Index eval_size = 512;
    double separation = 1.0;
    double label_noise = 0.1;
    // Shared: fixes targets, bases and datasets.
    std::uint64_t problem_seed = 7;
};

std::unique_ptr<Problem> make_problem(const ProblemConfig& config);

}  // namespace geogns::problems
