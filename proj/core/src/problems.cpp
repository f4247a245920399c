#include "geogns/problems.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "geogns/errors.hpp"
#include "geogns/geometry.hpp"
#include "geogns/rng.hpp"

namespace geogns::problems {

namespace {

constexpr std::uint64_t kTrainTag = 0x747261696eULL;
constexpr std::uint64_t kEvalTag = 0x6576616cULL;
constexpr std::uint64_t kTeacherTag = 0x746561636865ULL;
constexpr std::uint64_t kInitTag = 0x696e6974ULL;

Matrix gaussian_matrix(Index rows, Index cols, std::uint64_t key, double scale = 1.0) {
    CounterRng rng(key);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) m(i, j) = scale * rng.normal();
    }
    return m;
}

// Orthonormal columns from the QR of a Gaussian matrix.
Matrix random_orthonormal(Index rows, Index cols, std::uint64_t key) {
    const Matrix a = gaussian_matrix(rows, cols, key);
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
    // Fix column signs so the basis is a deterministic function of the key.
    const Matrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
    for (Index j = 0; j < cols; ++j) {
        if (r(j, j) < 0.0) q.col(j) *= -1.0;
    }
    return q;
}

Matrix linspace(Index n, double lo, double hi) {
    Matrix out(n, 1);
    for (Index i = 0; i < n; ++i) {
        out(i, 0) = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return out;
}

Index example_index(std::uint64_t key, Index n) {
    return static_cast<Index>(mix64(key ^ 0xa5a5a5a5ULL) % static_cast<std::uint64_t>(n));
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double logistic_sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void require_group_count(const Params& params, std::size_t n, const char* what) {
    if (params.size() != n) {
        throw InvalidArgument(std::string(what) + ": unexpected parameter group count");
    }
}

}  // namespace

std::string_view to_string(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::NoisyQuadratic: return "noisy_quadratic";
        case ProblemKind::MatrixQuadratic: return "matrix_quadratic";
        case ProblemKind::Logistic: return "logistic";
        case ProblemKind::TinyMlp: return "tiny_mlp";
    }
    return "unknown";
}

ProblemKind parse_problem_kind(std::string_view name) {
    if (name == "noisy_quadratic") return ProblemKind::NoisyQuadratic;
    if (name == "matrix_quadratic") return ProblemKind::MatrixQuadratic;
    if (name == "logistic") return ProblemKind::Logistic;
    if (name == "tiny_mlp") return ProblemKind::TinyMlp;
    throw InvalidArgument("unknown problem '" + std::string(name) + "'");
}

NoiseDistribution parse_noise_distribution(std::string_view name) {
    if (name == "gaussian") return NoiseDistribution::Gaussian;
    if (name == "student_t") return NoiseDistribution::StudentT;
    throw InvalidArgument("unknown noise distribution '" + std::string(name) + "'");
}

MatrixNoise parse_matrix_noise(std::string_view name) {
    if (name == "row_gaussian") return MatrixNoise::RowGaussian;
    if (name == "spectral_aligned") return MatrixNoise::SpectralAligned;
    throw InvalidArgument("unknown matrix noise '" + std::string(name) + "'");
}

double NoiseStats::sigma_l1() const { return sigma.cwiseAbs().sum(); }

double NoiseStats::trace() const { return sigma.squaredNorm(); }

double NoiseStats::sqrt_nuclear() const {
    const Matrix& c = row_covariance.rows() <= column_covariance.rows() ? row_covariance
                                                                         : column_covariance;
    return geometry::covariance_sqrt_nuclear(c);
}

NoiseStats Problem::true_noise_stats(const Params&) const {
    throw InvalidArgument("true_noise_stats: only synthetic problems know their noise");
}

Tensors per_sample_gradient(const Problem& problem, const Params& params,
                            std::uint64_t sample_id, std::uint64_t seed) {
    return problem.evaluate_sample(params, combine_keys(seed, sample_id)).gradient;
}

double finite_difference_check(const Problem& problem, const Params& params,
                               std::uint64_t sample_key, double step) {
    const Tensors analytic = problem.evaluate_sample(params, sample_key).gradient;
    Params probe = params;
    double worst = 0.0;
    for (std::size_t g = 0; g < params.size(); ++g) {
        Matrix& value = probe[g].value;
        for (Index i = 0; i < value.size(); ++i) {
            const double saved = value.data()[i];
            value.data()[i] = saved + step;
            const double up = problem.evaluate_sample(probe, sample_key).loss;
            value.data()[i] = saved - step;
            const double down = problem.evaluate_sample(probe, sample_key).loss;
            value.data()[i] = saved;
            const double fd = (up - down) / (2.0 * step);
            const double an = analytic[g].data()[i];
            const double denom = std::max({std::abs(fd), std::abs(an), 1.0});
            worst = std::max(worst, std::abs(fd - an) / denom);
        }
    }
    return worst;
}

// --- NoisyQuadratic --------------------------------------------------------

NoisyQuadratic::NoisyQuadratic(Matrix curvature, Matrix offset, Matrix noise_var,
                               NoiseDistribution dist, double student_df, Matrix start)
    : curvature_(std::move(curvature)),
      offset_(std::move(offset)),
      noise_var_(std::move(noise_var)),
      dist_(dist),
      student_df_(student_df),
      start_(std::move(start)) {
    const Index d = curvature_.rows();
    if (d <= 0 || curvature_.cols() != 1 || offset_.rows() != d || offset_.cols() != 1 ||
        noise_var_.rows() != d || noise_var_.cols() != 1) {
        throw InvalidArgument("NoisyQuadratic: curvature, offset and noise must be d x 1");
    }
    if ((curvature_.array() <= 0.0).any()) {
        throw InvalidArgument("NoisyQuadratic: curvature must be positive");
    }
    if ((noise_var_.array() < 0.0).any()) {
        throw InvalidArgument("NoisyQuadratic: noise variances must be nonnegative");
    }
    if (dist_ == NoiseDistribution::StudentT && !(student_df_ > 2.0)) {
        throw InvalidArgument("NoisyQuadratic: Student-t needs df > 2 for finite variance");
    }
    if (start_.size() == 0) start_ = Matrix::Zero(d, 1);
    if (start_.rows() != d || start_.cols() != 1) {
        throw InvalidArgument("NoisyQuadratic: start must be d x 1");
    }
}

Params NoisyQuadratic::initial_params(std::uint64_t) const {
    return {ParamGroup{"x", ParamShape::Vector, start_}};
}

SampleEval NoisyQuadratic::evaluate_sample(const Params& params, std::uint64_t key) const {
    require_group_count(params, 1, "NoisyQuadratic");
    const Matrix& x = params[0].value;
    CounterRng rng(key);
    Matrix xi(x.rows(), 1);
    if (dist_ == NoiseDistribution::Gaussian) {
        for (Index i = 0; i < xi.rows(); ++i) xi(i, 0) = rng.normal();
    } else {
        std::student_t_distribution<double> t(student_df_);
        const double unit = std::sqrt((student_df_ - 2.0) / student_df_);
        for (Index i = 0; i < xi.rows(); ++i) xi(i, 0) = unit * t(rng);
    }
    xi = xi.cwiseProduct(noise_var_.cwiseSqrt());

    SampleEval out;
    out.loss = (0.5 * curvature_.cwiseProduct(x.cwiseAbs2()) - offset_.cwiseProduct(x) +
                xi.cwiseProduct(x))
                   .sum();
    out.gradient = {curvature_.cwiseProduct(x) - offset_ + xi};
    return out;
}

double NoisyQuadratic::loss(const Params& params) const {
    require_group_count(params, 1, "NoisyQuadratic");
    const Matrix& x = params[0].value;
    return (0.5 * curvature_.cwiseProduct(x.cwiseAbs2()) - offset_.cwiseProduct(x)).sum();
}

Tensors NoisyQuadratic::true_gradient(const Params& params) const {
    require_group_count(params, 1, "NoisyQuadratic");
    return {curvature_.cwiseProduct(params[0].value) - offset_};
}

std::optional<double> NoisyQuadratic::optimal_loss() const {
    return -0.5 * offset_.cwiseAbs2().cwiseQuotient(curvature_).sum();
}

NoiseStats NoisyQuadratic::true_noise_stats(const Params&) const {
    NoiseStats s;
    s.sigma = noise_var_.cwiseSqrt();
    s.row_covariance = noise_var_.asDiagonal();
    s.column_covariance = Matrix::Constant(1, 1, noise_var_.sum());
    return s;
}

Matrix NoisyQuadratic::minimizer() const { return offset_.cwiseQuotient(curvature_); }

double NoisyQuadratic::smoothness_linf() const { return curvature_.sum(); }

double NoisyQuadratic::strong_convexity_linf() const { return curvature_.minCoeff(); }

// --- MatrixQuadratic -------------------------------------------------------

MatrixQuadratic::MatrixQuadratic(Matrix target, Matrix row_covariance, MatrixNoise noise,
                                 std::uint64_t basis_seed, Matrix start)
    : target_(std::move(target)),
      row_cov_(std::move(row_covariance)),
      noise_(noise),
      start_(std::move(start)) {
    const Index m = target_.rows();
    const Index n = target_.cols();
    if (m <= 0 || n <= 0) throw InvalidArgument("MatrixQuadratic: empty target");
    if (row_cov_.rows() != m || row_cov_.cols() != m) {
        throw InvalidArgument("MatrixQuadratic: row covariance must be m x m");
    }
    if ((row_cov_ - row_cov_.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * std::max(1.0, row_cov_.cwiseAbs().maxCoeff())) {
        throw InvalidArgument("MatrixQuadratic: row covariance must be symmetric");
    }
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(row_cov_);
    const Eigen::VectorXd lambda = eig.eigenvalues();
    if (lambda.minCoeff() < -1e-12 * std::max(1.0, lambda.maxCoeff())) {
        throw InvalidArgument("MatrixQuadratic: row covariance must be PSD");
    }
    const Eigen::VectorXd root = lambda.cwiseMax(0.0).cwiseSqrt();
    row_sqrt_ = eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
    if (noise_ == MatrixNoise::SpectralAligned) {
        if (m > n) {
            throw InvalidArgument("MatrixQuadratic: spectral_aligned noise needs rows <= cols");
        }
        left_basis_ = eig.eigenvectors();
        right_basis_ = random_orthonormal(n, m, combine_keys(basis_seed, 0x7662ULL));
        mode_std_ = root;
    }
    if (start_.size() == 0) start_ = Matrix::Zero(m, n);
    if (start_.rows() != m || start_.cols() != n) {
        throw InvalidArgument("MatrixQuadratic: start must match the target shape");
    }
}

Params MatrixQuadratic::initial_params(std::uint64_t) const {
    return {ParamGroup{"X", ParamShape::Matrix, start_}};
}

SampleEval MatrixQuadratic::evaluate_sample(const Params& params, std::uint64_t key) const {
    require_group_count(params, 1, "MatrixQuadratic");
    const Matrix& x = params[0].value;
    const Index m = rows();
    const Index n = cols();
    CounterRng rng(key);
    Matrix e;
    if (noise_ == MatrixNoise::RowGaussian) {
        Matrix z(m, n);
        for (Index j = 0; j < n; ++j) {
            for (Index i = 0; i < m; ++i) z(i, j) = rng.normal();
        }
        e = row_sqrt_ * z / std::sqrt(static_cast<double>(n));
    } else {
        Eigen::VectorXd z(m);
        for (Index i = 0; i < m; ++i) z(i) = rng.normal() * mode_std_(i, 0);
        e = left_basis_ * z.asDiagonal() * right_basis_.transpose();
    }
    const Matrix diff = x - target_;
    SampleEval out;
    out.loss = 0.5 * diff.squaredNorm() + (e.array() * x.array()).sum();
    out.gradient = {diff + e};
    return out;
}

double MatrixQuadratic::loss(const Params& params) const {
    require_group_count(params, 1, "MatrixQuadratic");
    return 0.5 * (params[0].value - target_).squaredNorm();
}

Tensors MatrixQuadratic::true_gradient(const Params& params) const {
    require_group_count(params, 1, "MatrixQuadratic");
    return {params[0].value - target_};
}

NoiseStats MatrixQuadratic::true_noise_stats(const Params&) const {
    const Index n = cols();
    NoiseStats s;
    s.row_covariance = row_cov_;
    if (noise_ == MatrixNoise::RowGaussian) {
        // Var(E_ij) = Sigma_ii / n, E[E^T E] = tr(Sigma) / n * I.
        s.sigma = (row_cov_.diagonal() / static_cast<double>(n)).cwiseSqrt().replicate(1, n);
        s.column_covariance = Matrix::Identity(n, n) * (row_cov_.trace() / static_cast<double>(n));
    } else {
        const Eigen::VectorXd lambda = mode_std_.col(0).cwiseAbs2();
        // Var(E_ij) = sum_k U_ik^2 lambda_k V_jk^2.
        s.sigma = (left_basis_.cwiseAbs2() * lambda.asDiagonal() *
                   right_basis_.cwiseAbs2().transpose())
                      .cwiseSqrt();
        s.column_covariance = right_basis_ * lambda.asDiagonal() * right_basis_.transpose();
    }
    return s;
}

double MatrixQuadratic::smoothness_spectral() const {
    return static_cast<double>(std::min(rows(), cols()));
}

// --- Logistic --------------------------------------------------------------

Logistic::Logistic(const Options& options) : options_(options) {
    if (options_.features <= 0 || options_.train_size <= 0 || options_.eval_size <= 0) {
        throw InvalidArgument("Logistic: sizes must be positive");
    }
    const Index d = options_.features;
    Eigen::VectorXd direction = gaussian_matrix(d, 1, combine_keys(options_.data_seed, 1)).col(0);
    direction.normalize();
    const Eigen::VectorXd center = options_.separation * direction;

    auto make_split = [&](Index n, std::uint64_t tag, Matrix& xs, Matrix& ys) {
        CounterRng rng(combine_keys(options_.data_seed, tag));
        xs.resize(n, d + 1);
        ys.resize(n, 1);
        for (Index r = 0; r < n; ++r) {
            const double y = rng.uniform() < 0.5 ? -1.0 : 1.0;
            ys(r, 0) = y;
            for (Index c = 0; c < d; ++c) xs(r, c) = y * center(c) + rng.normal();
            xs(r, d) = 1.0;
        }
    };
    make_split(options_.train_size, kTrainTag, train_x_, train_y_);
    make_split(options_.eval_size, kEvalTag, eval_x_, eval_y_);
}

Params Logistic::initial_params(std::uint64_t seed) const {
    return {ParamGroup{"w", ParamShape::Vector,
                       gaussian_matrix(options_.features + 1, 1, combine_keys(seed, kInitTag),
                                       0.01)}};
}

SampleEval Logistic::evaluate_row(const Params& params, const Matrix& x, const Matrix& y,
                                  Index row) const {
    require_group_count(params, 1, "Logistic");
    const Matrix& w = params[0].value;
    const double label = y(row, 0);
    const double z = (x.row(row) * w)(0, 0);
    SampleEval out;
    out.loss = softplus(-label * z);
    out.gradient = {(-label * logistic_sigmoid(-label * z)) * x.row(row).transpose()};
    return out;
}

SampleEval Logistic::evaluate_sample(const Params& params, std::uint64_t key) const {
    return evaluate_row(params, train_x_, train_y_, example_index(key, train_size()));
}

SampleEval Logistic::evaluate_example(const Params& params, Index index) const {
    if (index < 0 || index >= train_size()) {
        throw std::out_of_range("Logistic: example index out of range");
    }
    return evaluate_row(params, train_x_, train_y_, index);
}

double Logistic::mean_loss(const Params& params, const Matrix& x, const Matrix& y) const {
    require_group_count(params, 1, "Logistic");
    const Eigen::VectorXd z = x * params[0].value;
    double total = 0.0;
    for (Index r = 0; r < x.rows(); ++r) total += softplus(-y(r, 0) * z(r));
    return total / static_cast<double>(x.rows());
}

double Logistic::loss(const Params& params) const { return mean_loss(params, train_x_, train_y_); }

double Logistic::eval_loss(const Params& params) const {
    return mean_loss(params, eval_x_, eval_y_);
}

Tensors Logistic::true_gradient(const Params& params) const {
    Tensors total = zeros_like(params);
    for (Index r = 0; r < train_size(); ++r) {
        total[0] += evaluate_row(params, train_x_, train_y_, r).gradient[0];
    }
    total[0] /= static_cast<double>(train_size());
    return total;
}

// --- TinyMlp ---------------------------------------------------------------

namespace {

struct MlpWeights {
    const Matrix& w1;
    const Matrix& b1;
    const Matrix& w2;
    const Matrix& b2;
};

MlpWeights unpack(const Params& params) {
    require_group_count(params, 4, "TinyMlp");
    return {params[0].value, params[1].value, params[2].value, params[3].value};
}

}  // namespace

TinyMlp::TinyMlp(const Options& options) : options_(options) {
    if (options_.inputs <= 0 || options_.hidden <= 0 || options_.outputs <= 0 ||
        options_.train_size <= 0 || options_.eval_size <= 0) {
        throw InvalidArgument("TinyMlp: sizes must be positive");
    }
    if (options_.hidden > 64) {
        throw InvalidArgument("TinyMlp: at most 64 hidden units");
    }
    const Index in = options_.inputs;
    const Index h = options_.hidden;
    const Index out = options_.outputs;
    const std::uint64_t teacher = combine_keys(options_.data_seed, kTeacherTag);
    const Matrix tw1 = gaussian_matrix(h, in, combine_keys(teacher, 1),
                                       1.5 / std::sqrt(static_cast<double>(in)));
    const Matrix tb1 = gaussian_matrix(h, 1, combine_keys(teacher, 2), 0.5);
    const Matrix tw2 = gaussian_matrix(out, h, combine_keys(teacher, 3),
                                       1.0 / std::sqrt(static_cast<double>(h)));

    auto make_split = [&](Index n, std::uint64_t tag, Matrix& xs, Matrix& ys) {
        CounterRng rng(combine_keys(options_.data_seed, tag));
        xs.resize(n, in);
        ys.resize(n, out);
        for (Index r = 0; r < n; ++r) {
            for (Index c = 0; c < in; ++c) xs(r, c) = rng.normal();
            const Matrix hidden = (tw1 * xs.row(r).transpose() + tb1).array().tanh().matrix();
            const Matrix y = tw2 * hidden;
            for (Index c = 0; c < out; ++c) ys(r, c) = y(c, 0) + options_.label_noise * rng.normal();
        }
    };
    make_split(options_.train_size, kTrainTag, train_x_, train_y_);
    make_split(options_.eval_size, kEvalTag, eval_x_, eval_y_);
}

Params TinyMlp::initial_params(std::uint64_t seed) const {
    const Index in = options_.inputs;
    const Index h = options_.hidden;
    const Index out = options_.outputs;
    const std::uint64_t key = combine_keys(seed, kInitTag);
    return {
        ParamGroup{"w1", ParamShape::Matrix,
                   gaussian_matrix(h, in, combine_keys(key, 1), 1.0 / std::sqrt(static_cast<double>(in)))},
        ParamGroup{"b1", ParamShape::Vector, Matrix::Zero(h, 1)},
        ParamGroup{"w2", ParamShape::Matrix,
                   gaussian_matrix(out, h, combine_keys(key, 2), 1.0 / std::sqrt(static_cast<double>(h)))},
        ParamGroup{"b2", ParamShape::Vector, Matrix::Zero(out, 1)},
    };
}

SampleEval TinyMlp::evaluate_row(const Params& params, const Matrix& x, const Matrix& y,
                                 Index row) const {
    const auto w = unpack(params);
    const Matrix input = x.row(row).transpose();
    const Matrix hidden = (w.w1 * input + w.b1).array().tanh().matrix();
    const Matrix residual = w.w2 * hidden + w.b2 - y.row(row).transpose();
    const Matrix d_hidden = (w.w2.transpose() * residual).cwiseProduct(
        (1.0 - hidden.array().square()).matrix());
    SampleEval out;
    out.loss = 0.5 * residual.squaredNorm();
    out.gradient = {d_hidden * input.transpose(), d_hidden, residual * hidden.transpose(), residual};
    return out;
}

SampleEval TinyMlp::evaluate_sample(const Params& params, std::uint64_t key) const {
    return evaluate_row(params, train_x_, train_y_, example_index(key, train_size()));
}

SampleEval TinyMlp::evaluate_example(const Params& params, Index index) const {
    if (index < 0 || index >= train_size()) {
        throw std::out_of_range("TinyMlp: example index out of range");
    }
    return evaluate_row(params, train_x_, train_y_, index);
}

double TinyMlp::mean_loss(const Params& params, const Matrix& x, const Matrix& y) const {
    const auto w = unpack(params);
    const Matrix hidden =
        ((w.w1 * x.transpose()).colwise() + w.b1.col(0)).array().tanh().matrix();
    const Matrix residual = ((w.w2 * hidden).colwise() + w.b2.col(0)) - y.transpose();
    return 0.5 * residual.squaredNorm() / static_cast<double>(x.rows());
}

double TinyMlp::loss(const Params& params) const { return mean_loss(params, train_x_, train_y_); }

double TinyMlp::eval_loss(const Params& params) const { return mean_loss(params, eval_x_, eval_y_); }

Tensors TinyMlp::true_gradient(const Params& params) const {
    Tensors total = zeros_like(params);
    for (Index r = 0; r < train_size(); ++r) {
        const Tensors g = evaluate_row(params, train_x_, train_y_, r).gradient;
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += g[i];
    }
    for (auto& t : total) t /= static_cast<double>(train_size());
    return total;
}

// --- factory ---------------------------------------------------------------

std::unique_ptr<Problem> make_problem(const ProblemConfig& c) {
    switch (c.kind) {
        case ProblemKind::NoisyQuadratic: {
            if (c.dim <= 0) throw InvalidArgument("dim must be positive");
            if (!(c.curvature_min > 0.0) || c.curvature_max < c.curvature_min) {
                throw InvalidArgument("need 0 < curvature_min <= curvature_max");
            }
            if (c.noise_std < 0.0) throw InvalidArgument("noise_std must be >= 0");
            const Matrix a = linspace(c.dim, c.curvature_min, c.curvature_max);
            const Matrix x_star = gaussian_matrix(c.dim, 1, combine_keys(c.problem_seed, 0x71ULL));
            const Matrix noise = Matrix::Constant(c.dim, 1, c.noise_std * c.noise_std);
            return std::make_unique<NoisyQuadratic>(a, a.cwiseProduct(x_star), noise, c.noise_dist);
        }
        case ProblemKind::MatrixQuadratic: {
            if (c.rows <= 0 || c.cols <= 0) throw InvalidArgument("rows and cols must be positive");
            if (c.row_noise_min < 0.0 || c.row_noise_max < c.row_noise_min) {
                throw InvalidArgument("need 0 <= row_noise_min <= row_noise_max");
            }
            const Matrix target =
                gaussian_matrix(c.rows, c.cols, combine_keys(c.problem_seed, 0x72ULL));
            const Matrix q = random_orthonormal(c.rows, c.rows, combine_keys(c.problem_seed, 0x73ULL));
            const Matrix stds = linspace(c.rows, c.row_noise_max, c.row_noise_min);
            const Matrix cov = q * stds.cwiseAbs2().col(0).asDiagonal() * q.transpose();
            const Matrix sym = 0.5 * (cov + cov.transpose());
            return std::make_unique<MatrixQuadratic>(target, sym, c.matrix_noise,
                                                     combine_keys(c.problem_seed, 0x74ULL));
        }
        case ProblemKind::Logistic: {
            Logistic::Options o;
            o.features = c.features;
            o.train_size = c.train_size;
            o.eval_size = c.eval_size;
            o.separation = c.separation;
            o.data_seed = c.problem_seed;
            return std::make_unique<Logistic>(o);
        }
        case ProblemKind::TinyMlp: {
            TinyMlp::Options o;
            o.inputs = c.features;
            o.hidden = c.hidden;
            o.train_size = c.train_size;
            o.eval_size = c.eval_size;
            o.label_noise = c.label_noise;
            o.data_seed = c.problem_seed;
            return std::make_unique<TinyMlp>(o);
        }
    }
    throw InvalidArgument("make_problem: unknown kind");
}

}  // namespace geogns::problems
