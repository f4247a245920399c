#include <cmath>

#include <gtest/gtest.h>

#include "geogns/errors.hpp"
#include "geogns/gns.hpp"
#include "geogns/parallel_sim.hpp"
#include "geogns/problems.hpp"
#include "support.hpp"

using namespace geogns;
using namespace geogns::gns;
using parallel::GramSide;

namespace {

Matrix col(std::initializer_list<double> xs) {
    Matrix v(static_cast<Index>(xs.size()), 1);
    Index i = 0;
    for (double x : xs) v(i++, 0) = x;
    return v;
}

Matrix scalar(double x) { return Matrix::Constant(1, 1, x); }

// Bundle from explicit local gradients with one group.
parallel::GradientBundle bundle_of(const std::vector<Matrix>& locals, Index batch) {
    parallel::GradientBundle b;
    for (const auto& l : locals) b.locals.push_back({l});
    b.global = parallel::all_reduce_mean(std::span<const Tensors>(b.locals));
    b.layout = {static_cast<int>(locals.size()), batch};
    return b;
}

}  // namespace

TEST(CoordVariance, TwoRanks) {
    const auto b = bundle_of({scalar(1), scalar(3)}, 2);
    const auto m = parallel::reduce_second_moments(b);
    EXPECT_DOUBLE_EQ(coord_variance(b, m, 0)(0, 0), 2.0);
}

TEST(CoordVariance, FourRanks) {
    const auto b = bundle_of({scalar(0), scalar(0), scalar(2), scalar(2)}, 4);
    const auto m = parallel::reduce_second_moments(b);
    EXPECT_NEAR(coord_variance(b, m, 0)(0, 0), 4.0 / 3.0, 1e-15);
}

TEST(CoordVariance, EqualLocalsGiveZero) {
    const Matrix g = col({1.5, -2, 0.25});
    const auto b = bundle_of({g, g, g}, 6);
    const auto m = parallel::reduce_second_moments(b);
    EXPECT_TRUE(coord_variance(b, m, 0).isZero(0.0));
}

TEST(CoordVariance, NeedsTwoRanks) {
    EXPECT_THROW(coord_variance(scalar(1), scalar(1), 4, 1), InvalidArgument);
}

TEST(CoordVariance, ClampsRoundoffNegatives) {
    EXPECT_EQ(coord_variance(scalar(1.0), scalar(1.0 - 1e-16), 4, 2)(0, 0), 0.0);
}

TEST(RowCovariance, ScalarReducesToCoordVariance) {
    const auto b = bundle_of({scalar(0.5), scalar(-1), scalar(4)}, 9);
    const auto m = parallel::reduce_second_moments(b);
    EXPECT_NEAR(row_covariance(b, m, 0)(0, 0), coord_variance(b, m, 0)(0, 0), 1e-14);
}

TEST(RowCovariance, DiagonalLocals) {
    Matrix a = Matrix::Zero(2, 2);
    Matrix c = Matrix::Zero(2, 2);
    a(0, 0) = 1;
    c(0, 0) = 3;
    const auto b = bundle_of({a, c}, 2);
    const auto m = parallel::reduce_second_moments(b);
    Matrix expected = Matrix::Zero(2, 2);
    expected(0, 0) = 2;
    EXPECT_LT((row_covariance(b, m, 0) - expected).norm(), 1e-14);
}

TEST(RowCovariance, EqualLocalsGiveZero) {
    const Matrix g = testsupport::gaussian(3, 4, 8);
    const auto b = bundle_of({g, g}, 4);
    const auto m = parallel::reduce_second_moments(b);
    EXPECT_LT(row_covariance(b, m, 0).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(RowCovariance, MatchesSampleCovarianceOracle) {
    std::vector<Matrix> locals;
    for (std::uint64_t j = 0; j < 5; ++j) locals.push_back(testsupport::gaussian(3, 6, 40 + j));
    const auto b = bundle_of(locals, 20);
    const auto m = parallel::reduce_second_moments(b);
    Matrix oracle = Matrix::Zero(3, 3);
    for (const auto& l : locals) {
        const Matrix d = l - b.global[0];
        oracle += d * d.transpose();
    }
    oracle *= (20.0 / 5.0) / 4.0;
    EXPECT_LT((row_covariance(b, m, 0) - oracle).norm(), 1e-12);
}

TEST(RowCovariance, TallUsesColumnSide) {
    std::vector<Matrix> locals;
    for (std::uint64_t j = 0; j < 3; ++j) locals.push_back(testsupport::gaussian(5, 2, 70 + j));
    const auto b = bundle_of(locals, 6);
    const auto m = parallel::reduce_second_moments(b);
    EXPECT_EQ(m.gram_sides[0], GramSide::Column);
    EXPECT_EQ(row_covariance(b, m, 0).rows(), 2);
}

TEST(GnsValue, SignExample) {
    const auto e = gns_from_variance(col({9, 16}), col({2, -3}), GeometryKind::SignLinf);
    EXPECT_DOUBLE_EQ(e.gns, 49.0 / 25.0);
    EXPECT_EQ(e.sigma_hat, col({3, 4}));
}

TEST(GnsValue, EuclideanUsesTrace) {
    const auto e = gns_from_variance(col({9, 16}), col({2, -3}), GeometryKind::Euclidean);
    EXPECT_DOUBLE_EQ(e.noise_scalar, 25.0);
    EXPECT_DOUBLE_EQ(e.gns, 25.0 / 13.0);
}

TEST(GnsValue, ZeroNoise) {
    EXPECT_EQ(gns_from_variance(Matrix::Zero(3, 1), col({1, 2, 3}), GeometryKind::SignLinf).gns, 0.0);
}

TEST(GnsValue, SpectralExample) {
    const Matrix cov = Eigen::Vector2d(4, 9).asDiagonal();
    Matrix g = Matrix::Zero(2, 3);
    g(0, 0) = 2;
    g(1, 1) = -3;
    const auto e = gns_from_covariance(cov, g);
    EXPECT_NEAR(e.gns, 1.0, 1e-14);
}

TEST(GnsValue, ZeroGradientThrows) {
    EXPECT_THROW(gns_from_variance(col({1, 1}), Matrix::Zero(2, 1), GeometryKind::SignLinf),
                 NumericalError);
    EXPECT_THROW(gns_from_covariance(Matrix::Identity(2, 2), Matrix::Zero(2, 2)), NumericalError);
    EXPECT_THROW(gns_from_variance(col({1}), col({1}), GeometryKind::SpectralSinf), InvalidArgument);
}

TEST(GnsValue, ScaleInvariant) {
    std::vector<Matrix> locals;
    for (std::uint64_t j = 0; j < 4; ++j) locals.push_back(testsupport::gaussian(6, 1, 90 + j));
    std::vector<Matrix> scaled;
    for (const auto& l : locals) scaled.push_back(3.0 * l);
    const auto b1 = bundle_of(locals, 16);
    const auto b2 = bundle_of(scaled, 16);
    const auto m1 = parallel::reduce_second_moments(b1);
    const auto m2 = parallel::reduce_second_moments(b2);
    const Matrix v1 = coord_variance(b1, m1, 0);
    const Matrix v2 = coord_variance(b2, m2, 0);
    EXPECT_LT((v2 - 9.0 * v1).norm(), 1e-12 * v2.norm());
    const double g1 = gns_from_variance(v1, b1.global[0], GeometryKind::SignLinf).gns;
    const double g2 = gns_from_variance(v2, b2.global[0], GeometryKind::SignLinf).gns;
    EXPECT_NEAR(g1, g2, 1e-12 * g1);
}

TEST(Ema, FirstObservationInitializes) {
    const auto s = ema_update(EmaPair{}, 5, 7);
    EXPECT_TRUE(s.initialized);
    EXPECT_EQ(s.noise, 5);
    EXPECT_EQ(s.signal, 7);
}

TEST(Ema, Blend) {
    EmaPair s{10, 1, 0.9, 0.9, true};
    s = ema_update(s, 20, 1);
    EXPECT_NEAR(s.noise, 11.0, 1e-14);
}

TEST(Ema, ZeroBetaPassesThrough) {
    EmaPair s{3, 4, 0.0, 0.0, true};
    s = ema_update(s, 8, 9);
    EXPECT_EQ(s.noise, 8);
    EXPECT_EQ(s.signal, 9);
}

TEST(Ema, RejectsNegative) {
    EXPECT_THROW(ema_update(EmaPair{}, -1, 1), InvalidArgument);
    EXPECT_THROW(ema_update(EmaPair{}, 1, -1), InvalidArgument);
}

TEST(GnsNormNames, RoundTrip) {
    for (auto n : {GnsNorm::L1, GnsNorm::L2, GnsNorm::Nuclear}) EXPECT_EQ(parse_gns_norm(to_string(n)), n);
    EXPECT_EQ(geometry_of(GnsNorm::Nuclear), GeometryKind::SpectralSinf);
    EXPECT_THROW(parse_gns_norm("linf"), InvalidArgument);
}

TEST(Measure, MatrixOnlySkipsVectorGroups) {
    problems::TinyMlp::Options o;
    o.hidden = 8;
    o.train_size = 128;
    o.eval_size = 16;
    const problems::TinyMlp mlp(o);
    const Params x = mlp.initial_params(3);
    const auto s = parallel::simulate_step(mlp, x, {4, 32}, 1, 0, true);

    const auto all = measure(s, x, GnsNorm::Nuclear, false);
    const auto only = measure(s, x, GnsNorm::Nuclear, true);
    double noise = 0.0;
    double signal = 0.0;
    for (std::size_t g = 0; g < x.size(); ++g) {
        if (x[g].shape != ParamShape::Matrix) continue;
        const auto e = gns_from_covariance(row_covariance(s.bundle, *s.moments, g), s.bundle.global[g]);
        noise += e.noise_scalar;
        signal += e.signal_scalar;
    }
    EXPECT_NEAR(only.noise, noise, 1e-12 * noise);
    EXPECT_NEAR(only.signal, signal, 1e-12 * signal);
    EXPECT_GT(all.noise, only.noise);
    EXPECT_GT(all.signal, only.signal);
}

TEST(Measure, NoEligibleGroupThrows) {
    const problems::Logistic logit(problems::Logistic::Options{});
    const Params x = logit.initial_params(0);
    const auto s = parallel::simulate_step(logit, x, {2, 8}, 0, 0, true);
    EXPECT_THROW(measure(s, x, GnsNorm::L1, true), InvalidArgument);
    EXPECT_NO_THROW(measure(s, x, GnsNorm::L1, false));
}

TEST(Measure, RequiresMoments) {
    const problems::Logistic logit(problems::Logistic::Options{});
    const Params x = logit.initial_params(0);
    const auto s = parallel::simulate_step(logit, x, {2, 8}, 0, 0, false);
    EXPECT_THROW(measure(s, x, GnsNorm::L1, false), InvalidArgument);
}

TEST(MeasureExact, MatchesClosedForm) {
    problems::NoiseStats stats;
    stats.sigma = col({1, 2});
    stats.row_covariance = Eigen::Vector2d(1, 4).asDiagonal();
    stats.column_covariance = Matrix::Constant(1, 1, 5);
    const auto l1 = measure_exact(stats, col({1, -1}), GnsNorm::L1);
    EXPECT_DOUBLE_EQ(l1.gns(), 9.0 / 4.0);
    const auto l2 = measure_exact(stats, col({1, -1}), GnsNorm::L2);
    EXPECT_DOUBLE_EQ(l2.gns(), 5.0 / 2.0);
    EXPECT_THROW(measure_exact(stats, Matrix::Zero(2, 1), GnsNorm::L1).gns(), NumericalError);
}

TEST(Unbiasedness, ConvergesToExactL1Gns) {
    problems::ProblemConfig cfg;
    cfg.dim = 8;
    cfg.noise_std = 1.0;
    const auto p = problems::make_problem(cfg);
    const Params x = p->initial_params(0);
    const auto stats = p->true_noise_stats(x);
    const double exact = measure_exact(stats, p->true_gradient(x)[0], GnsNorm::L1).gns();
    double mean = 0.0;
    for (std::uint64_t k = 0; k < 100; ++k) {
        const auto s = parallel::simulate_step(*p, x, {8, 1024}, 5, k, true);
        mean += gns_from_variance(coord_variance(s.bundle, *s.moments, 0), s.bundle.global[0],
                                  GeometryKind::SignLinf)
                    .gns;
    }
    mean /= 100.0;
    EXPECT_NEAR(mean, exact, 0.1 * exact);
}
