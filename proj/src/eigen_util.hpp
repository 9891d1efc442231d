#pragma once

// Internal Eigen interop for the dense tensor kernels. Not installed.

#include <Eigen/Dense>

#include "qbrick/tensor.hpp"

namespace qbrick::detail {

using MatRM = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatRM>;
using ConstMapRM = Eigen::Map<const MatRM>;

inline MapRM as_matrix(Tensor& t, std::size_t rows, std::size_t cols) {
    return MapRM(t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

inline ConstMapRM as_matrix(const Tensor& t, std::size_t rows, std::size_t cols) {
    return ConstMapRM(t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

// Rank-2 view using the tensor's own shape.
inline MapRM as_matrix(Tensor& t) { return as_matrix(t, t.dim(0), t.dim(1)); }
inline ConstMapRM as_matrix(const Tensor& t) { return as_matrix(t, t.dim(0), t.dim(1)); }

} // namespace qbrick::detail
