#include "geogns/gns.hpp"

#include <cmath>
#include <string>

#include "geogns/errors.hpp"

namespace geogns::gns {

namespace {

double bessel_scale(Index batch, int ranks) {
    if (ranks < 2) throw InvalidArgument("noise estimation needs at least 2 ranks");
    if (batch < 1) throw InvalidArgument("batch must be >= 1");
    return static_cast<double>(batch) / static_cast<double>(ranks - 1);
}

void require_nonzero_signal(double signal) {
    if (!(signal > 0.0)) {
        throw NumericalError("GNS undefined: gradient signal is zero");
    }
}

}  // namespace

Matrix coord_variance(const Matrix& global, const Matrix& squares_mean, Index batch, int ranks) {
    const double scale = bessel_scale(batch, ranks);
    if (global.rows() != squares_mean.rows() || global.cols() != squares_mean.cols()) {
        throw InvalidArgument("coord_variance: shape mismatch");
    }
    return (scale * (squares_mean - global.cwiseAbs2())).cwiseMax(0.0);
}

Matrix coord_variance(const parallel::GradientBundle& bundle,
                      const parallel::SecondMoments& moments, std::size_t group) {
    return coord_variance(bundle.global.at(group), moments.squares_mean.at(group),
                          bundle.layout.global_batch, bundle.layout.ranks);
}

Matrix row_covariance(const Matrix& global, const Matrix& gram_mean, Index batch, int ranks,
                      parallel::GramSide side) {
    const double scale = bessel_scale(batch, ranks);
    const Matrix outer = parallel::gram(global, side);
    if (outer.rows() != gram_mean.rows() || outer.cols() != gram_mean.cols()) {
        throw InvalidArgument("row_covariance: Gram shape mismatch");
    }
    const Matrix c = scale * (gram_mean - outer);
    return 0.5 * (c + c.transpose());
}

Matrix row_covariance(const parallel::GradientBundle& bundle,
                      const parallel::SecondMoments& moments, std::size_t group) {
    return row_covariance(bundle.global.at(group), moments.gram_mean.at(group),
                          bundle.layout.global_batch, bundle.layout.ranks,
                          moments.gram_sides.at(group));
}

NoiseEstimate gns_from_variance(const Matrix& sigma_sq, const Matrix& global, GeometryKind kind) {
    if (sigma_sq.rows() != global.rows() || sigma_sq.cols() != global.cols()) {
        throw InvalidArgument("gns_from_variance: shape mismatch");
    }
    NoiseEstimate e;
    e.geometry = kind;
    e.sigma_hat = sigma_sq.cwiseMax(0.0).cwiseSqrt();
    switch (kind) {
        case GeometryKind::SignLinf: {
            const double n = e.sigma_hat.sum();
            const double s = geometry::l1_norm(global);
            e.noise_scalar = n * n;
            e.signal_scalar = s * s;
            break;
        }
        case GeometryKind::Euclidean:
            e.noise_scalar = sigma_sq.cwiseMax(0.0).sum();
            e.signal_scalar = global.squaredNorm();
            break;
        case GeometryKind::SpectralSinf:
            throw InvalidArgument("gns_from_variance: spectral geometry needs a covariance");
    }
    require_nonzero_signal(e.signal_scalar);
    e.gns = e.noise_scalar / e.signal_scalar;
    return e;
}

NoiseEstimate gns_from_covariance(const Matrix& cov, const Matrix& global) {
    NoiseEstimate e;
    e.geometry = GeometryKind::SpectralSinf;
    e.cov_row = cov;
    const double n = geometry::covariance_sqrt_nuclear(cov);
    const double s = geometry::nuclear_norm(global);
    e.noise_scalar = n * n;
    e.signal_scalar = s * s;
    require_nonzero_signal(e.signal_scalar);
    e.gns = e.noise_scalar / e.signal_scalar;
    return e;
}

EmaPair ema_update(EmaPair state, double noise_scalar, double signal_scalar) {
    if (!(noise_scalar >= 0.0) || !(signal_scalar >= 0.0)) {
        throw InvalidArgument("ema_update: noise and signal must be nonnegative");
    }
    if (!state.initialized) {
        state.noise = noise_scalar;
        state.signal = signal_scalar;
        state.initialized = true;
        return state;
    }
    state.noise = state.beta_noise * state.noise + (1.0 - state.beta_noise) * noise_scalar;
    state.signal = state.beta_signal * state.signal + (1.0 - state.beta_signal) * signal_scalar;
    return state;
}

std::string_view to_string(GnsNorm norm) {
    switch (norm) {
        case GnsNorm::L1: return "l1";
        case GnsNorm::L2: return "l2";
        case GnsNorm::Nuclear: return "nuclear";
    }
    return "unknown";
}

GnsNorm parse_gns_norm(std::string_view name) {
    if (name == "l1") return GnsNorm::L1;
    if (name == "l2") return GnsNorm::L2;
    if (name == "nuclear") return GnsNorm::Nuclear;
    throw InvalidArgument("unknown GNS norm '" + std::string(name) + "'");
}

GeometryKind geometry_of(GnsNorm norm) {
    switch (norm) {
        case GnsNorm::L1: return GeometryKind::SignLinf;
        case GnsNorm::L2: return GeometryKind::Euclidean;
        case GnsNorm::Nuclear: return GeometryKind::SpectralSinf;
    }
    return GeometryKind::Euclidean;
}

double NoiseSignal::gns() const {
    require_nonzero_signal(signal);
    return noise / signal;
}

NoiseSignal measure(const parallel::StepSample& sample, const Params& params, GnsNorm norm,
                    bool matrix_only) {
    if (!sample.moments) {
        throw InvalidArgument("measure: step was simulated without second moments");
    }
    const auto& bundle = sample.bundle;
    const auto& moments = *sample.moments;
    NoiseSignal total;
    bool any = false;
    for (std::size_t g = 0; g < params.size(); ++g) {
        if (matrix_only && params[g].shape != ParamShape::Matrix) continue;
        any = true;
        const Matrix& grad = bundle.global[g];
        switch (norm) {
            case GnsNorm::L1: {
                const double n = coord_variance(bundle, moments, g).cwiseSqrt().sum();
                const double s = geometry::l1_norm(grad);
                total.noise += n * n;
                total.signal += s * s;
                break;
            }
            case GnsNorm::L2:
                total.noise += coord_variance(bundle, moments, g).sum();
                total.signal += grad.squaredNorm();
                break;
            case GnsNorm::Nuclear: {
                const double n =
                    geometry::covariance_sqrt_nuclear(row_covariance(bundle, moments, g));
                const double s = geometry::nuclear_norm(grad);
                total.noise += n * n;
                total.signal += s * s;
                break;
            }
        }
    }
    if (!any) {
        throw InvalidArgument("measure: no parameter group is eligible for GNS estimation");
    }
    return total;
}

NoiseSignal measure_exact(const problems::NoiseStats& stats, const Matrix& true_gradient,
                          GnsNorm norm) {
    NoiseSignal out;
    switch (norm) {
        case GnsNorm::L1: {
            const double n = stats.sigma_l1();
            const double s = geometry::l1_norm(true_gradient);
            out.noise = n * n;
            out.signal = s * s;
            break;
        }
        case GnsNorm::L2:
            out.noise = stats.trace();
            out.signal = true_gradient.squaredNorm();
            break;
        case GnsNorm::Nuclear: {
            const double n = stats.sqrt_nuclear();
            const double s = geometry::nuclear_norm(true_gradient);
            out.noise = n * n;
            out.signal = s * s;
            break;
        }
    }
    return out;
}

}  // namespace geogns::gns
