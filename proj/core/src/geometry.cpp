#include "geogns/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "geogns/errors.hpp"

namespace geogns::geometry {

namespace {

void require_finite(const Matrix& v, const char* what) {
    if (!v.allFinite()) {
        throw InvalidArgument(std::string(what) + ": non-finite input");
    }
}

Eigen::BDCSVD<Matrix> thin_svd(const Matrix& g) {
    return Eigen::BDCSVD<Matrix>(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

}  // namespace

std::string_view to_string(GeometryKind kind) {
    switch (kind) {
        case GeometryKind::Euclidean: return "euclidean";
        case GeometryKind::SignLinf: return "sign";
        case GeometryKind::SpectralSinf: return "spectral";
    }
    return "unknown";
}

GeometryKind parse_geometry(std::string_view name) {
    if (name == "euclidean" || name == "l2") return GeometryKind::Euclidean;
    if (name == "sign" || name == "linf" || name == "l1") return GeometryKind::SignLinf;
    if (name == "spectral" || name == "nuclear") return GeometryKind::SpectralSinf;
    throw InvalidArgument("unknown geometry '" + std::string(name) + "'");
}

GeometrySpec make_geometry(GeometryKind kind, ParamShape shape, Index rows, Index cols) {
    if (rows <= 0 || cols <= 0) {
        throw InvalidArgument("geometry dimensions must be positive");
    }
    if (shape == ParamShape::Vector && cols != 1) {
        throw InvalidArgument("vector parameters must be stored as n x 1");
    }
    if (kind == GeometryKind::SpectralSinf && shape != ParamShape::Matrix) {
        throw InvalidArgument("spectral geometry applies to matrix parameters only");
    }
    return GeometrySpec{kind, shape, rows, cols};
}

double l1_norm(const Matrix& v) { return v.cwiseAbs().sum(); }

double linf_norm(const Matrix& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

double frobenius_norm(const Matrix& v) { return v.norm(); }

double nuclear_norm(const Matrix& v) {
    if (v.size() == 0) return 0.0;
    return Eigen::BDCSVD<Matrix>(v).singularValues().sum();
}

double spectral_norm(const Matrix& v) {
    if (v.size() == 0) return 0.0;
    return Eigen::BDCSVD<Matrix>(v).singularValues()(0);
}

double dual_norm(const Matrix& v, GeometryKind kind) {
    require_finite(v, "dual_norm");
    switch (kind) {
        case GeometryKind::Euclidean: return frobenius_norm(v);
        case GeometryKind::SignLinf: return l1_norm(v);
        case GeometryKind::SpectralSinf: return nuclear_norm(v);
    }
    throw InvalidArgument("dual_norm: unknown geometry");
}

double primal_norm(const Matrix& v, GeometryKind kind) {
    require_finite(v, "primal_norm");
    switch (kind) {
        case GeometryKind::Euclidean: return frobenius_norm(v);
        case GeometryKind::SignLinf: return linf_norm(v);
        case GeometryKind::SpectralSinf: return spectral_norm(v);
    }
    throw InvalidArgument("primal_norm: unknown geometry");
}

Direction sign_direction(const Matrix& g) {
    require_finite(g, "sign_direction");
    Direction d;
    d.values = g.unaryExpr([](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
    d.primal_norm = linf_norm(d.values);
    return d;
}

Direction normalized_direction(const Matrix& g) {
    require_finite(g, "normalized_direction");
    const double norm = g.norm();
    if (norm == 0.0) {
        throw InvalidArgument("normalized_direction: zero vector has no direction");
    }
    Direction d;
    d.values = g / norm;
    d.primal_norm = d.values.norm();
    return d;
}

Direction matsign_exact(const Matrix& g) {
    require_finite(g, "matsign_exact");
    if (g.size() == 0 || g.cwiseAbs().maxCoeff() == 0.0) {
        throw InvalidArgument("matsign_exact: zero matrix has no direction");
    }
    const auto svd = thin_svd(g);
    const auto& s = svd.singularValues();
    const double tau = static_cast<double>(std::max(g.rows(), g.cols())) *
                       std::numeric_limits<double>::epsilon() * s(0);
    Index rank = 0;
    while (rank < s.size() && s(rank) > tau) ++rank;

    Direction d;
    d.values = svd.matrixU().leftCols(rank) * svd.matrixV().leftCols(rank).transpose();
    d.rank = rank;
    d.primal_norm = 1.0;
    return d;
}

Direction matsign_newton_schulz(const Matrix& g, int iterations) {
    require_finite(g, "matsign_newton_schulz");
    if (iterations < 1) {
        throw InvalidArgument("matsign_newton_schulz: iterations must be >= 1");
    }
    const double fro = g.norm();
    if (fro == 0.0) {
        throw InvalidArgument("matsign_newton_schulz: zero matrix has no direction");
    }
    Matrix x = g / fro;
    const bool tall = x.rows() > x.cols();
    for (int t = 0; t < iterations; ++t) {
        // Multiply through the smaller Gram matrix.
        if (tall) {
            const Matrix a = x.transpose() * x;
            x = 1.5 * x - 0.5 * (x * a);
        } else {
            const Matrix a = x * x.transpose();
            x = 1.5 * x - 0.5 * (a * x);
        }
    }
    const Matrix a = tall ? Matrix(x.transpose() * x) : Matrix(x * x.transpose());
    const double top = Eigen::SelfAdjointEigenSolver<Matrix>(a, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    Direction d;
    d.values = std::move(x);
    d.primal_norm = std::sqrt(std::max(top, 0.0));
    d.rank = std::min(g.rows(), g.cols());
    return d;
}

Direction steepest_direction(const Matrix& v, GeometryKind kind) {
    switch (kind) {
        case GeometryKind::Euclidean: return normalized_direction(v);
        case GeometryKind::SignLinf: return sign_direction(v);
        case GeometryKind::SpectralSinf: return matsign_exact(v);
    }
    throw InvalidArgument("steepest_direction: unknown geometry");
}

double covariance_sqrt_nuclear(const Matrix& c, double tolerance) {
    require_finite(c, "covariance_sqrt_nuclear");
    if (c.rows() != c.cols()) {
        throw InvalidArgument("covariance_sqrt_nuclear: matrix must be square");
    }
    if (c.size() == 0) return 0.0;
    const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
    if ((c - c.transpose()).cwiseAbs().maxCoeff() > tolerance * scale) {
        throw InvalidArgument("covariance_sqrt_nuclear: matrix is not symmetric");
    }
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(c, Eigen::EigenvaluesOnly);
    const auto& lambda = eig.eigenvalues();
    const double floor = -tolerance * std::max(1.0, lambda.maxCoeff());
    double total = 0.0;
    for (Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) < floor) {
            throw InvalidArgument("covariance_sqrt_nuclear: matrix is indefinite (eigenvalue " +
                                  std::to_string(lambda(i)) + ")");
        }
        total += std::sqrt(std::max(0.0, lambda(i)));
    }
    return total;
}

}  // namespace geogns::geometry
