#pragma once

// Unbiased noise estimates from rank-level statistics and the GNS ratios
// they feed:
//
//   sigma_i^2 = B/(R-1) * (mean_j (g_i^j)^2 - g_i^2)
//   C_row     = B/(R-1) * (mean_j G^j G^j^T - G G^T)
//
//   l2:      tr(C) / ||g||_2^2
//   l1:      ||sigma||_1^2 / ||g||_1^2
//   nuclear: ||C^{1/2}||_S1^2 / ||G||_S1^2
//
// The B/(R-1) factor is the Bessel correction R/(R-1) times the B/R rescale
// from local-batch variance to single-sample variance.

#include <optional>
#include <string_view>

#include "geogns/geometry.hpp"
#include "geogns/parallel_sim.hpp"

namespace geogns::gns {

using geometry::GeometryKind;

// Negative components from cancellation are clamped to 0.
Matrix coord_variance(const Matrix& global, const Matrix& squares_mean, Index batch, int ranks);
Matrix coord_variance(const parallel::GradientBundle& bundle,
                      const parallel::SecondMoments& moments, std::size_t group);

// Symmetrized; `gram_mean` must be on `side`.
Matrix row_covariance(const Matrix& global, const Matrix& gram_mean, Index batch, int ranks,
                      parallel::GramSide side);
Matrix row_covariance(const parallel::GradientBundle& bundle,
                      const parallel::SecondMoments& moments, std::size_t group);

struct NoiseEstimate {
    GeometryKind geometry = GeometryKind::Euclidean;
    Matrix sigma_hat;  // vector geometries
    Matrix cov_row;    // spectral geometry
    double noise_scalar = 0.0;
    double signal_scalar = 0.0;
    double gns = 0.0;
};

// Euclidean or SignLinf from a variance estimate sigma^2.
NoiseEstimate gns_from_variance(const Matrix& sigma_sq, const Matrix& global, GeometryKind kind);
// SpectralSinf from a covariance estimate.
NoiseEstimate gns_from_covariance(const Matrix& cov, const Matrix& global);

struct EmaPair {
    double noise = 0.0;   // N
    double signal = 0.0;  // M
    double beta_noise = 0.9;
    double beta_signal = 0.9;
    bool initialized = false;

    double ratio() const { return noise / signal; }
};

// First call copies the observation; later calls blend with the betas.
EmaPair ema_update(EmaPair state, double noise_scalar, double signal_scalar);

// Which dual norm measures noise and signal.
enum class GnsNorm { L1, L2, Nuclear };

std::string_view to_string(GnsNorm norm);
GnsNorm parse_gns_norm(std::string_view name);
GeometryKind geometry_of(GnsNorm norm);

struct NoiseSignal {
    double noise = 0.0;
    double signal = 0.0;
    double gns() const;  // throws NumericalError when signal is 0
};

// Per-group noise and signal scalars summed over groups. With `matrix_only`,
// vector groups are skipped; no eligible group throws InvalidArgument.
NoiseSignal measure(const parallel::StepSample& sample, const Params& params, GnsNorm norm,
                    bool matrix_only);

// Same aggregation from exact statistics and the true gradient.
NoiseSignal measure_exact(const problems::NoiseStats& stats, const Matrix& true_gradient,
                          GnsNorm norm);

}  // namespace geogns::gns
