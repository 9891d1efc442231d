#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace qbrick {

using cplx = std::complex<double>;

/// Dense complex tensor with a fixed row-major linearization.
///
/// The shape is an ordered list of positive dimensions; element (i0, .., ik)
/// lives at offset ((i0*d1 + i1)*d2 + ...). Rank-2 tensors double as
/// matrices for the factorization routines below.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<cplx> data);

    static Tensor matrix(std::size_t rows, std::size_t cols, std::initializer_list<cplx> vals);
    static Tensor identity(std::size_t n);

    std::size_t rank() const { return shape_.size(); }
    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t dim(std::size_t axis) const { return shape_[axis]; }
    std::size_t size() const { return data_.size(); }

    cplx* data() { return data_.data(); }
    const cplx* data() const { return data_.data(); }
    std::vector<cplx>& values() { return data_; }
    const std::vector<cplx>& values() const { return data_; }

    cplx at(std::span<const std::size_t> idx) const;
    cplx& at(std::span<const std::size_t> idx);
    cplx at(std::initializer_list<std::size_t> idx) const {
        return at(std::span<const std::size_t>(idx.begin(), idx.size()));
    }
    cplx& at(std::initializer_list<std::size_t> idx) {
        return at(std::span<const std::size_t>(idx.begin(), idx.size()));
    }

    /// Same data, new shape (sizes must agree).
    Tensor reshaped(std::vector<std::size_t> shape) const&;
    Tensor reshaped(std::vector<std::size_t> shape) &&;

    /// Permute axes: result axis i is input axis perm[i].
    Tensor transposed(std::span<const std::size_t> perm) const;
    Tensor transposed(std::initializer_list<std::size_t> perm) const {
        return transposed(std::span<const std::size_t>(perm.begin(), perm.size()));
    }

    Tensor conjugated() const;

    bool finite() const;
    double max_abs() const;
    double norm() const; // Frobenius

    Tensor& operator*=(cplx s);
    Tensor operator*(cplx s) const;
    Tensor operator+(const Tensor& o) const;
    Tensor operator-(const Tensor& o) const;

private:
    std::vector<std::size_t> shape_;
    std::vector<cplx> data_;
};

/// One contracted index pair: (axis of a, axis of b).
using AxisPair = std::pair<std::size_t, std::size_t>;

/// Sum over the paired axes; free axes of a precede free axes of b.
Tensor contract(const Tensor& a, const Tensor& b, std::span<const AxisPair> axes);
Tensor contract(const Tensor& a, const Tensor& b, std::initializer_list<AxisPair> axes);

/// Rank-2 product a*b.
Tensor matmul(const Tensor& a, const Tensor& b);
/// Conjugate transpose of a rank-2 tensor.
Tensor dagger(const Tensor& m);
/// Kronecker product of two rank-2 tensors.
Tensor kron(const Tensor& a, const Tensor& b);
cplx trace(const Tensor& m);

struct SvdResult {
    Tensor u;              // isometry, columns
    std::vector<double> s; // descending, non-negative
    Tensor vh;             // isometry, rows
};

/// Thin SVD of a rank-2 tensor, m = u * diag(s) * vh.
SvdResult svd(const Tensor& m);

/// LQ factorization m = l * q with lower-triangular l and row-isometric q.
std::pair<Tensor, Tensor> lq(const Tensor& m);

/// QR factorization m = q * r with column-isometric q and upper-triangular r.
std::pair<Tensor, Tensor> qr(const Tensor& m);

/// exp(a) of an anti-Hermitian rank-2 tensor; the result is unitary.
Tensor expm_antihermitian(const Tensor& a);

/// max |(a + a^dag)_ij|; zero for exactly anti-Hermitian input.
double antihermitian_defect(const Tensor& a);
/// max |(a - a^dag)_ij|.
double hermitian_defect(const Tensor& a);
/// max |(m^dag m - 1)_ij|.
double unitary_defect(const Tensor& m);
bool is_unitary(const Tensor& m, double tol = 1e-12);

} // namespace qbrick
