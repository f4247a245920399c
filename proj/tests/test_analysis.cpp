#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "geogns/analysis.hpp"
#include "geogns/errors.hpp"
#include "geogns/problems.hpp"

using namespace geogns;
using namespace geogns::analysis;

namespace {

ImprovementParams sign_params(double g1, double sigma1, double d) {
    return ImprovementParams{GeometryKind::SignLinf, g1, sigma1, d};
}

double shape(double gns, double b) {
    const double s = 1.0 - std::sqrt(gns / b);
    return b < gns ? 0.0 : s * s;
}

}  // namespace

TEST(Improvement, SignExamples) {
    const auto p = sign_params(4, 2, 2);
    EXPECT_DOUBLE_EQ(p.gns(), 0.25);
    EXPECT_DOUBLE_EQ(p.max_improvement(), 4.0);
    EXPECT_DOUBLE_EQ(expected_improvement(p, 1.0), 4.0 * 0.25);
    EXPECT_DOUBLE_EQ(expected_improvement(p, 0.0625), 0.0);
    EXPECT_DOUBLE_EQ(optimal_lr(p, 1.0), (4.0 - 2.0) / 2.0);
    EXPECT_DOUBLE_EQ(optimal_lr(p, 0.01), 0.0);
}

TEST(Improvement, EuclideanExamples) {
    const ImprovementParams p{GeometryKind::Euclidean, 2.0, 4.0, 1.0};
    EXPECT_DOUBLE_EQ(p.gns(), 1.0);
    EXPECT_DOUBLE_EQ(p.max_improvement(), 2.0);
    EXPECT_DOUBLE_EQ(expected_improvement(p, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(expected_improvement(p, 3.0), 2.0 * 0.75);
}

TEST(Improvement, SpectralUsesRank) {
    const ImprovementParams p{GeometryKind::SpectralSinf, 6.0, 3.0, 3.0};
    EXPECT_DOUBLE_EQ(p.max_improvement(), 36.0 / 6.0);
    EXPECT_DOUBLE_EQ(expected_improvement(p, 1.0), 6.0 * shape(0.25, 1.0));
}

TEST(Improvement, ZeroGradientThrows) {
    EXPECT_THROW(sign_params(0, 1, 1).gns(), NumericalError);
}

TEST(Improvement, MatchesBruteForceOverLearningRate) {
    // Improvement of the bound g*eta - sigma*eta/sqrt(B) - d L eta^2/2 with L = 1.
    const auto p = sign_params(3.0, 1.5, 4.0);
    for (double b : {0.5, 1.0, 2.0, 7.0, 100.0}) {
        double best = 0.0;
        for (int i = 0; i <= 200000; ++i) {
            const double eta = 2.0 * i / 200000.0;
            best = std::max(best, 3.0 * eta - 1.5 * eta / std::sqrt(b) - 4.0 * eta * eta / 2.0);
        }
        EXPECT_NEAR(expected_improvement(p, b), best, 1e-8);
    }
}

TEST(Cbs, FractionExamples) {
    EXPECT_DOUBLE_EQ(cbs_fraction(0.5, 10.0, GeometryKind::Euclidean).value, 10.0);
    EXPECT_NEAR(cbs_fraction(0.25, 10.0, GeometryKind::SignLinf).value, 40.0, 1e-12);
    EXPECT_NEAR(cbs_fraction(0.25, 10.0, GeometryKind::SpectralSinf).value, 40.0, 1e-12);
    EXPECT_THROW(cbs_fraction(1.0, 10.0, GeometryKind::SignLinf), InvalidArgument);
    EXPECT_THROW(cbs_fraction(0.5, 0.0, GeometryKind::SignLinf), InvalidArgument);
}

TEST(Cbs, FractionReachesKappaOfMax) {
    for (double kappa : {0.1, 0.5, 0.9}) {
        const double b = cbs_fraction(kappa, 3.0, GeometryKind::SignLinf).value;
        EXPECT_NEAR(shape(3.0, b), kappa, 1e-12);
        const double e = cbs_fraction(kappa, 3.0, GeometryKind::Euclidean).value;
        EXPECT_NEAR(1.0 / (1.0 + 3.0 / e), kappa, 1e-12);
    }
}

TEST(Cbs, MaxEfficiencyIsArgmaxOfImprovementPerSample) {
    const double gns = 5.0;
    double best_b = 0.0, best = -1.0;
    for (int i = 1; i <= 1000000; ++i) {
        const double b = gns + i * 1e-4;
        const double v = shape(gns, b) / b;
        if (v > best) best = v, best_b = b;
    }
    EXPECT_NEAR(cbs_max_efficiency(gns, GeometryKind::SignLinf).value, best_b, 1e-3);
    EXPECT_THROW(cbs_max_efficiency(gns, GeometryKind::Euclidean), InvalidArgument);
}

TEST(Cbs, InflectionPointFromSecondDifferences) {
    const double gns = 2.0;
    const double h = 1e-3;
    double root = 0.0;
    double prev = 0.0;
    for (int i = 1; i < 200000; ++i) {
        const double b = gns + 0.01 + i * 1e-4;
        const double d2 = (shape(gns, b + h) - 2.0 * shape(gns, b) + shape(gns, b - h)) / (h * h);
        if (i > 1 && prev > 0.0 && d2 <= 0.0) {
            root = b;
            break;
        }
        prev = d2;
    }
    ASSERT_GT(root, 0.0);
    EXPECT_NEAR(improvement_inflection_point(gns), root, 1e-3);
    EXPECT_NEAR(improvement_inflection_point(gns), 16.0 / 9.0 * gns, 1e-12);
    EXPECT_THROW(cbs_inflection(gns, GeometryKind::Euclidean), InvalidArgument);
}

TEST(Cbs, ThetaToKappa) {
    EXPECT_DOUBLE_EQ(theta_to_kappa(0.5), 0.25);
    EXPECT_THROW(theta_to_kappa(0.0), InvalidArgument);
    // The sign CBS at kappa(theta) equals gns / theta^2.
    for (double theta : {0.2, 0.5, 0.8}) {
        EXPECT_NEAR(cbs_fraction(theta_to_kappa(theta), 4.0, GeometryKind::SignLinf).value,
                    4.0 / (theta * theta), 1e-9);
    }
}

TEST(Bounds, Examples) {
    EXPECT_DOUBLE_EQ(sublinear_bound(4.0, 0.5, 16, 1.5), 2.0 / (0.5 * 4.0) * 2.0);
    EXPECT_DOUBLE_EQ(linear_rate_factor(0.5, 1.0, 4.0), 1.0 - 0.25 / 4.0);
    EXPECT_THROW(linear_rate_factor(0.5, 2.0, 1.0), InvalidArgument);
    EXPECT_THROW(sublinear_bound(1.0, 1.0, 1, 0.0), InvalidArgument);
}

TEST(ErrorRatio, SignMatchesGaussianMeanAbsolute) {
    // E|z| = sqrt(2/pi) per coordinate, so the ratio is exactly that in expectation.
    const problems::NoisyQuadratic p(Matrix::Ones(8, 1), Matrix::Zero(8, 1),
                                     Matrix::Constant(8, 1, 2.0));
    ErrorRatioOptions o;
    o.batch = 16;
    o.trials = 4000;
    const double r = lemma_error_ratio(p, p.initial_params(0), GeometryKind::SignLinf, o);
    EXPECT_NEAR(r, std::sqrt(2.0 / std::numbers::pi), 0.02);
}

TEST(ErrorRatio, ZeroNoiseIsZero) {
    const problems::NoisyQuadratic p(Matrix::Ones(3, 1), Matrix::Zero(3, 1), Matrix::Zero(3, 1));
    EXPECT_EQ(lemma_error_ratio(p, p.initial_params(0), GeometryKind::SignLinf, {}), 0.0);
}

TEST(ErrorRatio, EuclideanAndSpectralBelowOne) {
    const problems::MatrixQuadratic m(Matrix::Zero(3, 5), Eigen::Vector3d(1, 2, 4).asDiagonal());
    ErrorRatioOptions o;
    o.batch = 4;
    o.trials = 2000;
    EXPECT_LE(lemma_error_ratio(m, m.initial_params(0), GeometryKind::SpectralSinf, o), 1.0);
    EXPECT_LE(lemma_error_ratio(m, m.initial_params(0), GeometryKind::Euclidean, o), 1.0);
}

TEST(LinearRate, SignDescentContractsWithinBound) {
    Matrix a(4, 1);
    a << 1, 2, 3, 4;
    const problems::NoisyQuadratic p(a, Matrix::Ones(4, 1), Matrix::Ones(4, 1));
    RateExperiment e;
    e.seeds = 16;
    e.steps = 60;
    const auto r = empirical_linear_rate(p, e);
    EXPECT_LT(r.final_gap, r.initial_gap);
    EXPECT_LE(r.contraction, r.bound);
    EXPECT_DOUBLE_EQ(r.bound, 1.0 - 0.25 * 1.0 / 10.0);
}
