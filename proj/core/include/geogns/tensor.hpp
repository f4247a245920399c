#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace geogns {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;

// Vectors are stored as n x 1 matrices so every parameter group shares one
// storage type. The shape tag decides which geometries apply.
enum class ParamShape { Vector, Matrix };

struct ParamGroup {
    std::string name;
    ParamShape shape = ParamShape::Vector;
    Matrix value;
};

using Params = std::vector<ParamGroup>;

// One tensor per parameter group, aligned with a Params list.
using Tensors = std::vector<Matrix>;

Tensors zeros_like(const Params& params);
Tensors zeros_like(const Tensors& tensors);

bool all_finite(const Matrix& m);
bool all_finite(const Tensors& ts);

// Throws InvalidArgument unless both lists hold the same shapes.
void require_same_shapes(const Tensors& a, const Tensors& b, const char* what);

}  // namespace geogns
