#pragma once

// Closed-form improvement curves, critical batch sizes and convergence
// bounds, plus Monte-Carlo checkers for the dual-norm error bounds.
//
// With gns the geometry's noise scale, the optimal one-step improvement is
//   l2:          (||grad||_2^2 / 2)  * (1 + gns/B)^-1
//   sign:        (||grad||_1^2 / 2d) * (1 - sqrt(gns/B))^2
//   spectral:    (||grad||_S1^2 / 2r) * (1 - sqrt(gns/B))^2
// The sign/spectral forms are clamped to 0 for B < gns.

#include <cstdint>
#include <optional>
#include <string_view>

#include "geogns/geometry.hpp"
#include "geogns/problems.hpp"

namespace geogns::analysis {

using geometry::GeometryKind;

struct ImprovementParams {
    GeometryKind geometry = GeometryKind::SignLinf;
    double grad_dual_norm = 0.0;  // ||grad||_*
    // ||sigma||_1 (sign), ||C^{1/2}||_S1 (spectral) or tr(C) (Euclidean).
    double noise_dual = 0.0;
    double dimension = 1.0;  // d (sign) or r (spectral); unused for Euclidean

    void validate() const;
    double gns() const;
    double max_improvement() const;  // B -> infinity
};

double expected_improvement(const ImprovementParams& params, double batch);
double optimal_lr(const ImprovementParams& params, double batch);

enum class CbsDefinition { FractionOfMax, Inflection, MaxEfficiency };

struct CbsResult {
    std::optional<double> kappa;
    double value = 0.0;
    CbsDefinition definition = CbsDefinition::FractionOfMax;
};

// Smallest B whose improvement reaches kappa times the deterministic limit.
CbsResult cbs_fraction(double kappa, double gns, GeometryKind geometry);
// (64/9) gns. Sign/spectral only: the Euclidean curve has no inflection.
CbsResult cbs_inflection(double gns, GeometryKind geometry);
// 4 gns, the maximizer of improvement per sample. Sign/spectral only.
CbsResult cbs_max_efficiency(double gns, GeometryKind geometry);
// Stationary point of d^2/dB^2 (1 - sqrt(gns/B))^2, i.e. (16/9) gns.
double improvement_inflection_point(double gns);

double theta_to_kappa(double theta);

struct ErrorRatioOptions {
    Index batch = 1;
    int trials = 10000;
    std::uint64_t seed = 1;
};

// Monte-Carlo estimate of E||grad L - g_B||_* sqrt(B) / (exact noise dual norm):
// l1 against ||sigma||_1, nuclear against ||C^{1/2}||_S1, l2 against sqrt(tr C).
// The error bounds say this never exceeds 1. Zero noise reports 0.
double lemma_error_ratio(const problems::Problem& problem, const Params& params,
                         GeometryKind geometry, const ErrorRatioOptions& options);

// sqrt(L) / ((1 - theta) sqrt(K)) * (L0 - L* + 1/2). theta in [0, 1).
double sublinear_bound(double smoothness, double theta, std::uint64_t steps,
                       double initial_gap);
// 1 - (1 - theta)^2 mu / L.
double linear_rate_factor(double theta, double strong_convexity, double smoothness);

struct RateExperiment {
    double theta = 0.5;
    int seeds = 64;
    int steps = 200;
    Index batch_cap = 1 << 20;
    std::uint64_t base_seed = 1;
};

struct RateResult {
    double contraction = 0.0;   // geometric-mean per-step contraction of E[L - L*]
    double bound = 0.0;         // linear_rate_factor(theta, mu, L)
    double initial_gap = 0.0;
    double final_gap = 0.0;
    Index max_batch = 0;
};

// Runs plain sign descent (NoisyQuadratic) or spectral descent
// (MatrixQuadratic) with the oracle batch B_k = ||noise||^2 / (theta^2 ||grad||_*^2)
// and learning rate (1 - theta) ||grad||_* / L, averaging the optimality gap
// over seeds.
RateResult empirical_linear_rate(const problems::Problem& problem, const RateExperiment& exp);

}  // namespace geogns::analysis
