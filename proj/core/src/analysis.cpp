#include "geogns/analysis.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "geogns/errors.hpp"
#include "geogns/rng.hpp"

namespace geogns::analysis {

namespace {

void require_positive_batch(double batch) {
    if (!(batch > 0.0)) throw InvalidArgument("batch size must be positive");
}

void require_gns(double gns) {
    if (!(gns > 0.0) || !std::isfinite(gns)) throw InvalidArgument("gns must be positive and finite");
}

void require_non_euclidean(GeometryKind geometry, const char* what) {
    if (geometry == GeometryKind::Euclidean) {
        throw InvalidArgument(std::string(what) + " is undefined for the Euclidean geometry");
    }
}

// 1 - sqrt(gns/B), floored at 0.
double sqrt_shortfall(double gns, double batch) {
    return std::max(0.0, 1.0 - std::sqrt(gns / batch));
}

double noise_reference(const problems::NoiseStats& stats, GeometryKind geometry) {
    switch (geometry) {
        case GeometryKind::Euclidean: return std::sqrt(stats.trace());
        case GeometryKind::SignLinf: return stats.sigma_l1();
        case GeometryKind::SpectralSinf: return stats.sqrt_nuclear();
    }
    return 0.0;
}

}  // namespace

void ImprovementParams::validate() const {
    if (!(grad_dual_norm >= 0.0) || !(noise_dual >= 0.0)) {
        throw InvalidArgument("gradient and noise norms must be nonnegative");
    }
    if (geometry != GeometryKind::Euclidean && !(dimension >= 1.0)) {
        throw InvalidArgument("dimension must be >= 1");
    }
}

double ImprovementParams::gns() const {
    validate();
    if (grad_dual_norm == 0.0) throw NumericalError("gns undefined for a zero gradient");
    const double g2 = grad_dual_norm * grad_dual_norm;
    if (geometry == GeometryKind::Euclidean) return noise_dual / g2;
    return noise_dual * noise_dual / g2;
}

double ImprovementParams::max_improvement() const {
    validate();
    const double g2 = grad_dual_norm * grad_dual_norm;
    if (geometry == GeometryKind::Euclidean) return g2 / 2.0;
    return g2 / (2.0 * dimension);
}

double expected_improvement(const ImprovementParams& params, double batch) {
    require_positive_batch(batch);
    const double limit = params.max_improvement();
    if (limit == 0.0) return 0.0;
    const double b = params.gns();
    if (params.geometry == GeometryKind::Euclidean) return limit / (1.0 + b / batch);
    const double s = sqrt_shortfall(b, batch);
    return limit * s * s;
}

double optimal_lr(const ImprovementParams& params, double batch) {
    require_positive_batch(batch);
    params.validate();
    if (params.geometry == GeometryKind::Euclidean) {
        return 1.0 / (1.0 + params.gns() / batch);
    }
    if (params.grad_dual_norm == 0.0) return 0.0;
    return params.grad_dual_norm / params.dimension * sqrt_shortfall(params.gns(), batch);
}

CbsResult cbs_fraction(double kappa, double gns, GeometryKind geometry) {
    if (!(kappa > 0.0 && kappa < 1.0)) throw InvalidArgument("kappa must lie in (0, 1)");
    require_gns(gns);
    CbsResult r;
    r.kappa = kappa;
    r.definition = CbsDefinition::FractionOfMax;
    if (geometry == GeometryKind::Euclidean) {
        r.value = kappa / (1.0 - kappa) * gns;
    } else {
        const double s = 1.0 - std::sqrt(kappa);
        r.value = gns / (s * s);
    }
    return r;
}

CbsResult cbs_inflection(double gns, GeometryKind geometry) {
    require_non_euclidean(geometry, "inflection critical batch size");
    require_gns(gns);
    CbsResult r;
    r.definition = CbsDefinition::Inflection;
    r.value = 64.0 / 9.0 * gns;
    return r;
}

CbsResult cbs_max_efficiency(double gns, GeometryKind geometry) {
    require_non_euclidean(geometry, "max-efficiency critical batch size");
    require_gns(gns);
    CbsResult r;
    r.definition = CbsDefinition::MaxEfficiency;
    r.value = 4.0 * gns;
    return r;
}

double improvement_inflection_point(double gns) {
    require_gns(gns);
    return 16.0 / 9.0 * gns;
}

double theta_to_kappa(double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw InvalidArgument("theta must lie in (0, 1)");
    return (1.0 - theta) * (1.0 - theta);
}

double lemma_error_ratio(const problems::Problem& problem, const Params& params,
                         GeometryKind geometry, const ErrorRatioOptions& options) {
    if (options.batch < 1) throw InvalidArgument("batch must be >= 1");
    if (options.trials < 1) throw InvalidArgument("trials must be >= 1");
    if (params.size() != 1) throw InvalidArgument("lemma_error_ratio expects a single parameter group");
    const problems::NoiseStats stats = problem.true_noise_stats(params);
    const double reference = noise_reference(stats, geometry);
    if (reference == 0.0) return 0.0;

    const Matrix truth = problem.true_gradient(params)[0];
    const double inv_batch = 1.0 / static_cast<double>(options.batch);
    double total = 0.0;
    Matrix mean(truth.rows(), truth.cols());
    for (int t = 0; t < options.trials; ++t) {
        mean.setZero();
        for (Index i = 0; i < options.batch; ++i) {
            const auto key = sample_key(options.seed, static_cast<std::uint64_t>(t),
                                        static_cast<std::uint64_t>(i));
            mean += problem.evaluate_sample(params, key).gradient[0];
        }
        mean *= inv_batch;
        total += geometry::dual_norm(truth - mean, geometry);
    }
    const double expected = total / options.trials;
    return expected * std::sqrt(static_cast<double>(options.batch)) / reference;
}

double sublinear_bound(double smoothness, double theta, std::uint64_t steps, double initial_gap) {
    if (!(smoothness > 0.0)) throw InvalidArgument("smoothness must be positive");
    if (!(theta >= 0.0 && theta < 1.0)) throw InvalidArgument("theta must lie in [0, 1)");
    if (steps == 0) throw InvalidArgument("steps must be >= 1");
    if (!(initial_gap >= 0.0)) throw InvalidArgument("initial gap must be nonnegative");
    return std::sqrt(smoothness) / ((1.0 - theta) * std::sqrt(static_cast<double>(steps))) *
           (initial_gap + 0.5);
}

double linear_rate_factor(double theta, double strong_convexity, double smoothness) {
    if (!(theta >= 0.0 && theta < 1.0)) throw InvalidArgument("theta must lie in [0, 1)");
    if (!(strong_convexity > 0.0) || !(smoothness >= strong_convexity)) {
        throw InvalidArgument("need 0 < mu <= L");
    }
    return 1.0 - (1.0 - theta) * (1.0 - theta) * strong_convexity / smoothness;
}

RateResult empirical_linear_rate(const problems::Problem& problem, const RateExperiment& exp) {
    if (exp.seeds < 1 || exp.steps < 1) throw InvalidArgument("seeds and steps must be >= 1");
    if (!(exp.theta > 0.0 && exp.theta < 1.0)) throw InvalidArgument("theta must lie in (0, 1)");

    GeometryKind geometry;
    double smoothness = 0.0;
    double strong_convexity = 0.0;
    if (const auto* q = dynamic_cast<const problems::NoisyQuadratic*>(&problem)) {
        geometry = GeometryKind::SignLinf;
        smoothness = q->smoothness_linf();
        strong_convexity = q->strong_convexity_linf();
    } else if (const auto* mq = dynamic_cast<const problems::MatrixQuadratic*>(&problem)) {
        geometry = GeometryKind::SpectralSinf;
        smoothness = mq->smoothness_spectral();
        strong_convexity = mq->strong_convexity_spectral();
    } else {
        throw InvalidArgument("empirical_linear_rate needs a NoisyQuadratic or MatrixQuadratic");
    }
    const double optimum = problem.optimal_loss().value_or(0.0);

    std::vector<double> mean_gap(static_cast<std::size_t>(exp.steps) + 1, 0.0);
    RateResult result;
    for (int s = 0; s < exp.seeds; ++s) {
        const std::uint64_t seed = combine_keys(exp.base_seed, static_cast<std::uint64_t>(s));
        Params params = problem.initial_params(seed);
        mean_gap[0] += problem.loss(params) - optimum;
        for (int k = 0; k < exp.steps; ++k) {
            const Matrix grad = problem.true_gradient(params)[0];
            const double grad_dual = geometry::dual_norm(grad, geometry);
            if (grad_dual == 0.0) {
                for (int j = k + 1; j <= exp.steps; ++j) mean_gap[j] += problem.loss(params) - optimum;
                break;
            }
            const problems::NoiseStats stats = problem.true_noise_stats(params);
            const double noise = noise_reference(stats, geometry);
            const double ratio = noise * noise / (exp.theta * exp.theta * grad_dual * grad_dual);
            Index batch = 1;
            if (ratio >= static_cast<double>(exp.batch_cap)) {
                batch = exp.batch_cap;
            } else {
                batch = std::max<Index>(1, static_cast<Index>(std::ceil(ratio)));
            }
            result.max_batch = std::max(result.max_batch, batch);

            Matrix g = Matrix::Zero(grad.rows(), grad.cols());
            for (Index i = 0; i < batch; ++i) {
                g += problem
                         .evaluate_sample(params, sample_key(seed, static_cast<std::uint64_t>(k),
                                                             static_cast<std::uint64_t>(i)))
                         .gradient[0];
            }
            g /= static_cast<double>(batch);
            const double lr = (1.0 - exp.theta) * grad_dual / smoothness;
            const bool zero = g.cwiseAbs().maxCoeff() == 0.0;
            if (!zero) params[0].value -= lr * geometry::steepest_direction(g, geometry).values;
            mean_gap[static_cast<std::size_t>(k) + 1] += problem.loss(params) - optimum;
        }
    }
    for (double& v : mean_gap) v /= exp.seeds;

    result.initial_gap = mean_gap.front();
    result.final_gap = mean_gap.back();
    result.bound = linear_rate_factor(exp.theta, strong_convexity, smoothness);
    if (result.initial_gap <= 0.0) {
        result.contraction = 0.0;
    } else {
        result.contraction = std::pow(std::max(result.final_gap, 0.0) / result.initial_gap,
                                      1.0 / static_cast<double>(exp.steps));
    }
    return result;
}

}  // namespace geogns::analysis
