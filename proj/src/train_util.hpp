#pragma once

// Shared tensor-train sweeps for MPS, MPO (flattened to physical dimension 4)
// and the loss-contraction engine. Site tensors are rank-3 (left bond,
// physical, right bond). `scale` is the squared per-site normalization of the
// canonical form: 1 for states, 2 for operator trains.

#include <cstddef>
#include <vector>

#include "qbrick/tensor.hpp"

namespace qbrick::detail {

struct TruncOptions {
    std::size_t cap;     // hard bond cap
    double rtol;         // drop singular values <= rtol * s0; negative keeps all
    bool renormalize;    // rescale to norm^2 = scale^n afterwards
};

// Right-to-left LQ sweep into right-canonical form. Preserves the
// represented object exactly; the norm stays folded into site 0.
void train_right_canonicalize(std::vector<Tensor>& sites, double scale);

// Left-to-right SVD truncation sweep; input must be right-canonical.
// Leaves the train left-canonical and returns the discarded weight
// (squared normalized Schmidt values summed over cuts).
double train_truncate(std::vector<Tensor>& sites, double scale, const TruncOptions& opt);

double train_norm_sq(const std::vector<Tensor>& sites);

// <bra|ket>; bra entries enter conjugated.
cplx train_inner(const std::vector<Tensor>& bra, const std::vector<Tensor>& ket);

// Normalized descending Schmidt values at `cut` (left block size).
// `form` is the current canonical form (None triggers an internal copy).
std::vector<double> train_schmidt(const std::vector<Tensor>& sites, double scale,
                                  std::size_t cut, int form);

// g is (p x p), already lifted to the train's physical dimension.
void train_apply_1q(std::vector<Tensor>& sites, const Tensor& g, std::size_t site);

// Two-site gate presplit into a sum of left x right one-site factors.
struct Split2Q {
    std::vector<Tensor> left;  // p x p each
    std::vector<Tensor> right; // p x p each
};
Split2Q make_split(const Tensor& lifted_2q, std::size_t phys);

// Applies a presplit two-site gate at (site, site+1); bond grows by the
// split rank, no decomposition performed.
void train_apply_2q_split(std::vector<Tensor>& sites, const Split2Q& g, std::size_t site);

// Merge-apply-SVD form: exact split with zero-weight tail dropped.
void train_apply_2q_svd(std::vector<Tensor>& sites, const Tensor& lifted_2q, std::size_t site);

// Dense coefficient vector (length p^n); guarded against large sizes.
Tensor train_dense(const std::vector<Tensor>& sites);

std::size_t train_max_bond(const std::vector<Tensor>& sites);

// 2x2 gate -> p x p train gate (p = 4 acts on the output leg).
Tensor lift_1q(const Tensor& g, std::size_t phys);
// 4x4 gate -> (p^2 x p^2) two-site train gate.
Tensor lift_2q(const Tensor& g, std::size_t phys);

double entropy_bits(const std::vector<double>& schmidt);

} // namespace qbrick::detail
