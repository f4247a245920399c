#include "geogns/tensor.hpp"

#include "geogns/errors.hpp"

namespace geogns {

Tensors zeros_like(const Params& params) {
    Tensors out;
    out.reserve(params.size());
    for (const auto& group : params) {
        out.push_back(Matrix::Zero(group.value.rows(), group.value.cols()));
    }
    return out;
}

Tensors zeros_like(const Tensors& tensors) {
    Tensors out;
    out.reserve(tensors.size());
    for (const auto& t : tensors) {
        out.push_back(Matrix::Zero(t.rows(), t.cols()));
    }
    return out;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

bool all_finite(const Tensors& ts) {
    for (const auto& t : ts) {
        if (!t.allFinite()) return false;
    }
    return true;
}

void require_same_shapes(const Tensors& a, const Tensors& b, const char* what) {
    if (a.size() != b.size()) {
        throw InvalidArgument(std::string(what) + ": group count mismatch");
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols()) {
            throw InvalidArgument(std::string(what) + ": shape mismatch in group " +
                                  std::to_string(i));
        }
    }
}

}  // namespace geogns
