#include "geogns/checks.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "geogns/analysis.hpp"
#include "geogns/errors.hpp"
#include "geogns/geometry.hpp"
#include "geogns/gns.hpp"
#include "geogns/parallel_sim.hpp"
#include "geogns/problems.hpp"
#include "geogns/rng.hpp"
#include "geogns/scheduler.hpp"

namespace geogns::checks {

namespace {

using geometry::GeometryKind;

Matrix random_matrix(Index rows, Index cols, std::uint64_t key) {
    CounterRng rng(key);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    }
    return m;
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(3);
    s << std::scientific << v;
    return s.str();
}

CheckResult direction_identity(unsigned seed) {
    double worst = 0.0;
    const GeometryKind kinds[] = {GeometryKind::Euclidean, GeometryKind::SignLinf,
                                  GeometryKind::SpectralSinf};
    for (int t = 0; t < 100; ++t) {
        const Matrix v = random_matrix(6, 4, combine_keys(seed, static_cast<std::uint64_t>(t)));
        for (auto kind : kinds) {
            const double dual = geometry::dual_norm(v, kind);
            const double inner = (v.array() * geometry::steepest_direction(v, kind).values.array()).sum();
            worst = std::max(worst, std::abs(inner - dual) / dual);
        }
    }
    return {"direction_identity", worst <= 1e-10, "max relative gap " + fmt(worst)};
}

CheckResult newton_schulz(unsigned seed) {
    const Matrix g = random_matrix(16, 8, combine_keys(seed, 0x45ULL));
    const Matrix exact = geometry::matsign_exact(g).values;
    double prev = 1e300;
    bool monotone = true;
    double err = 0.0;
    for (int it = 1; it <= 30; ++it) {
        err = (geometry::matsign_newton_schulz(g, it).values - exact).norm();
        if (err > prev + 1e-12) monotone = false;
        prev = err;
    }
    // Random Gaussian 16x8 matrices can be badly conditioned; 30 steps still shrink the error.
    return {"newton_schulz", monotone && err < 1e-3, "error at 30 iterations " + fmt(err)};
}

CheckResult rank_invariance(unsigned seed) {
    problems::ProblemConfig cfg;
    cfg.kind = problems::ProblemKind::NoisyQuadratic;
    cfg.dim = 8;
    const auto problem = problems::make_problem(cfg);
    const Params x = problem->initial_params(seed);
    const Matrix ref =
        parallel::simulate_step(*problem, x, {1, 64}, seed, 3, false).bundle.global[0];
    double worst = 0.0;
    for (int r : {2, 4, 8}) {
        const Matrix g =
            parallel::simulate_step(*problem, x, {r, 64}, seed, 3, false).bundle.global[0];
        worst = std::max(worst, (g - ref).norm() / ref.norm());
    }
    return {"rank_invariance", worst <= 1e-10, "max relative gap " + fmt(worst)};
}

CheckResult estimator_bias(unsigned seed) {
    problems::ProblemConfig cfg;
    cfg.kind = problems::ProblemKind::NoisyQuadratic;
    cfg.dim = 4;
    cfg.noise_std = 2.0;
    const auto problem = problems::make_problem(cfg);
    const Params x = problem->initial_params(seed);
    Matrix mean = Matrix::Zero(4, 1);
    const int trials = 2000;
    for (int t = 0; t < trials; ++t) {
        const auto s = parallel::simulate_step(*problem, x, {4, 32}, seed,
                                               static_cast<std::uint64_t>(t), true);
        mean += gns::coord_variance(s.bundle, *s.moments, 0);
    }
    mean /= trials;
    const double rel = (mean.array() / 4.0 - 1.0).abs().maxCoeff();
    return {"estimator_bias", rel <= 0.1, "max relative bias " + fmt(rel)};
}

CheckResult cbs_identity(unsigned) {
    double worst = 0.0;
    for (double kappa : {0.1, 0.25, 0.5, 0.9}) {
        for (auto kind : {GeometryKind::Euclidean, GeometryKind::SignLinf}) {
            analysis::ImprovementParams p{kind, 2.0, kind == GeometryKind::Euclidean ? 4.0 : 2.0, 4.0};
            const double b = analysis::cbs_fraction(kappa, p.gns(), kind).value;
            const double ratio = analysis::expected_improvement(p, b) / p.max_improvement();
            worst = std::max(worst, std::abs(ratio - kappa));
        }
    }
    return {"cbs_fraction_identity", worst <= 1e-12, "max gap " + fmt(worst)};
}

CheckResult controller_monotone(unsigned seed) {
    sched::ScheduleConfig cfg;
    cfg.frequency = 1;
    cfg.initial_batch = 8;
    cfg.batch_cap = 1 << 16;
    auto state = sched::initial_state(cfg);
    CounterRng rng(seed);
    bool ok = true;
    for (int k = 0; k < 200; ++k) {
        const Index before = state.batch;
        sched::Measurement m{1.0 + 50.0 * rng.uniform(), 0.5 + rng.uniform()};
        state = sched::controller_step(state, cfg, m, 4);
        const double expected = std::sqrt(static_cast<double>(state.batch) / cfg.initial_batch);
        ok = ok && state.batch >= before && state.batch % 4 == 0 &&
             std::abs(state.lr_multiplier - expected) <= 1e-12 * expected;
    }
    return {"controller_monotone", ok, "final batch " + std::to_string(state.batch)};
}

CheckResult finite_differences(unsigned seed) {
    problems::ProblemConfig cfg;
    cfg.kind = problems::ProblemKind::TinyMlp;
    cfg.hidden = 8;
    cfg.train_size = 64;
    cfg.eval_size = 16;
    const auto mlp = problems::make_problem(cfg);
    const double e_mlp = problems::finite_difference_check(*mlp, mlp->initial_params(seed), seed);
    cfg.kind = problems::ProblemKind::Logistic;
    const auto logit = problems::make_problem(cfg);
    const double e_log =
        problems::finite_difference_check(*logit, logit->initial_params(seed), seed);
    return {"finite_differences", e_mlp <= 1e-5 && e_log <= 1e-6,
            "tiny_mlp " + fmt(e_mlp) + ", logistic " + fmt(e_log)};
}

}  // namespace

std::vector<CheckResult> run_invariant_suite(unsigned seed) {
    const std::vector<std::function<CheckResult(unsigned)>> suite = {
        direction_identity, newton_schulz,       rank_invariance,  estimator_bias,
        cbs_identity,       controller_monotone, finite_differences,
    };
    std::vector<CheckResult> out;
    for (const auto& check : suite) {
        try {
            out.push_back(check(seed));
        } catch (const Error& e) {
            out.push_back({"exception", false, e.what()});
        }
    }
    return out;
}

}  // namespace geogns::checks
