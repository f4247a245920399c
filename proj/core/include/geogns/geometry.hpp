#pragma once

// Norm pairs and steepest-descent directions for the three geometries:
//
//   Euclidean     primal l2        / dual l2          normalized SGD
//   SignLinf      primal l-inf     / dual l1          signSGD
//   SpectralSinf  primal spectral  / dual nuclear     specSGD (matsign)
//
// Every direction p returned here maximizes <v, p> over the primal unit ball,
// so <v, p> equals the dual norm of v.

#include <string_view>

#include "geogns/tensor.hpp"

namespace geogns::geometry {

enum class GeometryKind { Euclidean, SignLinf, SpectralSinf };

std::string_view to_string(GeometryKind kind);
GeometryKind parse_geometry(std::string_view name);

// A geometry bound to the shape of one parameter tensor.
struct GeometrySpec {
    GeometryKind kind = GeometryKind::Euclidean;
    ParamShape shape = ParamShape::Vector;
    Index rows = 1;
    Index cols = 1;

    // d for vectors, m*n for matrices.
    Index dimension() const { return rows * cols; }
    Index max_rank() const { return rows < cols ? rows : cols; }
};

// Validates dims > 0 and that SpectralSinf is only used on matrices.
GeometrySpec make_geometry(GeometryKind kind, ParamShape shape, Index rows, Index cols);

struct Direction {
    Matrix values;
    double primal_norm = 0.0;
    // Number of retained singular directions (matsign only; 0 otherwise).
    Index rank = 0;
};

inline constexpr int kDefaultNewtonSchulzIterations = 5;

double l1_norm(const Matrix& v);
double linf_norm(const Matrix& v);
double frobenius_norm(const Matrix& v);
double nuclear_norm(const Matrix& v);
double spectral_norm(const Matrix& v);

// ||v||_2, ||v||_1 or ||v||_S1. Throws InvalidArgument on non-finite input.
double dual_norm(const Matrix& v, GeometryKind kind);
// ||v||_2, ||v||_inf or ||v||_Sinf.
double primal_norm(const Matrix& v, GeometryKind kind);

// Elementwise sign with sign(0) = 0.
Direction sign_direction(const Matrix& g);

// g / ||g||_2. Throws InvalidArgument for the zero vector.
Direction normalized_direction(const Matrix& g);

// U V^T from the thin SVD. Singular values at or below
// max(m,n) * eps * sigma_max are treated as zero and their subspaces dropped.
Direction matsign_exact(const Matrix& g);

// Cubic Newton-Schulz: X0 = G / ||G||_F, X <- 1.5 X - 0.5 X X^T X.
Direction matsign_newton_schulz(const Matrix& g,
                                int iterations = kDefaultNewtonSchulzIterations);

// Dispatches to sign / normalized / exact matsign.
Direction steepest_direction(const Matrix& v, GeometryKind kind);

// sum_i sqrt(lambda_i(C)) for symmetric PSD C. Eigenvalues down to
// -tolerance * max(1, lambda_max) are clamped to zero; anything more negative,
// or an asymmetric input, throws InvalidArgument.
double covariance_sqrt_nuclear(const Matrix& c, double tolerance = 1e-10);

}  // namespace geogns::geometry
