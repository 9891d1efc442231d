#include "qbrick/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <lapacke.h>

#include "qbrick/errors.hpp"
#include "eigen_util.hpp"

namespace qbrick {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) {
        if (d == 0) throw ShapeError("tensor dimensions must be positive");
        n *= d;
    }
    return n;
}

void require_rank2(const Tensor& m, const char* op) {
    if (m.rank() != 2) throw ShapeError(std::string(op) + ": expected a rank-2 tensor");
}

lapack_complex_double* lp(cplx* p) { return reinterpret_cast<lapack_complex_double*>(p); }

} // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), cplx(0.0, 0.0)) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<cplx> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_product(shape_) != data_.size())
        throw ShapeError("tensor data length does not match shape");
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<cplx> vals) {
    if (vals.size() != rows * cols) throw ShapeError("matrix literal has wrong length");
    return Tensor({rows, cols}, std::vector<cplx>(vals));
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
    return t;
}

cplx Tensor::at(std::span<const std::size_t> idx) const {
    return const_cast<Tensor*>(this)->at(idx);
}

cplx& Tensor::at(std::span<const std::size_t> idx) {
    if (idx.size() != rank()) throw ShapeError("index rank mismatch");
    std::size_t off = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] >= shape_[k]) throw ShapeError("index out of range");
        off = off * shape_[k] + idx[k];
    }
    return data_[off];
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const& {
    Tensor t = *this;
    return std::move(t).reshaped(std::move(shape));
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) && {
    if (shape_product(shape) != data_.size())
        throw ShapeError("reshape changes the number of elements");
    shape_ = std::move(shape);
    return std::move(*this);
}

Tensor Tensor::transposed(std::span<const std::size_t> perm) const {
    const std::size_t r = rank();
    if (perm.size() != r) throw ShapeError("permutation rank mismatch");
    std::vector<bool> seen(r, false);
    std::vector<std::size_t> new_shape(r);
    for (std::size_t i = 0; i < r; ++i) {
        if (perm[i] >= r || seen[perm[i]]) throw ShapeError("invalid axis permutation");
        seen[perm[i]] = true;
        new_shape[i] = shape_[perm[i]];
    }
    // strides of the source in its own layout
    std::vector<std::size_t> stride(r, 1);
    for (std::size_t i = r; i-- > 1;) stride[i - 1] = stride[i] * shape_[i];

    Tensor out(new_shape);
    std::vector<std::size_t> idx(r, 0);
    const std::size_t total = data_.size();
    for (std::size_t lin = 0; lin < total; ++lin) {
        std::size_t src = 0;
        for (std::size_t i = 0; i < r; ++i) src += idx[i] * stride[perm[i]];
        out.data_[lin] = data_[src];
        for (std::size_t i = r; i-- > 0;) {
            if (++idx[i] < new_shape[i]) break;
            idx[i] = 0;
        }
    }
    return out;
}

Tensor Tensor::conjugated() const {
    Tensor t = *this;
    for (cplx& v : t.data_) v = std::conj(v);
    return t;
}

bool Tensor::finite() const {
    for (const cplx& v : data_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

double Tensor::max_abs() const {
    double m = 0.0;
    for (const cplx& v : data_) m = std::max(m, std::abs(v));
    return m;
}

double Tensor::norm() const {
    double s = 0.0;
    for (const cplx& v : data_) s += std::norm(v);
    return std::sqrt(s);
}

Tensor& Tensor::operator*=(cplx s) {
    for (cplx& v : data_) v *= s;
    return *this;
}

Tensor Tensor::operator*(cplx s) const {
    Tensor t = *this;
    t *= s;
    return t;
}

Tensor Tensor::operator+(const Tensor& o) const {
    if (shape_ != o.shape_) throw ShapeError("tensor addition shape mismatch");
    Tensor t = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) t.data_[i] += o.data_[i];
    return t;
}

Tensor Tensor::operator-(const Tensor& o) const {
    if (shape_ != o.shape_) throw ShapeError("tensor subtraction shape mismatch");
    Tensor t = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) t.data_[i] -= o.data_[i];
    return t;
}

Tensor contract(const Tensor& a, const Tensor& b, std::span<const AxisPair> axes) {
    const std::size_t ra = a.rank(), rb = b.rank();
    std::vector<bool> ca(ra, false), cb(rb, false);
    std::size_t contracted = 1;
    for (const auto& [ia, ib] : axes) {
        if (ia >= ra || ib >= rb) throw ShapeError("contract: axis out of range");
        if (ca[ia] || cb[ib]) throw ShapeError("contract: repeated axis");
        if (a.dim(ia) != b.dim(ib)) throw ShapeError("contract: paired axes have unequal dimensions");
        ca[ia] = cb[ib] = true;
        contracted *= a.dim(ia);
    }

    std::vector<std::size_t> pa, pb;
    std::vector<std::size_t> out_shape;
    for (std::size_t i = 0; i < ra; ++i)
        if (!ca[i]) { pa.push_back(i); out_shape.push_back(a.dim(i)); }
    std::size_t free_a = 1;
    for (std::size_t d : out_shape) free_a *= d;
    for (const auto& [ia, ib] : axes) { (void)ib; pa.push_back(ia); }

    std::size_t free_b = 1;
    for (const auto& [ia, ib] : axes) { (void)ia; pb.push_back(ib); }
    for (std::size_t i = 0; i < rb; ++i)
        if (!cb[i]) { pb.push_back(i); out_shape.push_back(b.dim(i)); free_b *= b.dim(i); }

    const Tensor at = a.transposed(pa);
    const Tensor bt = b.transposed(pb);

    Tensor out(out_shape.empty() ? std::vector<std::size_t>{1, 1} : out_shape);
    detail::as_matrix(out, free_a, free_b).noalias() =
        detail::as_matrix(at, free_a, contracted) * detail::as_matrix(bt, contracted, free_b);
    if (out_shape.empty()) return std::move(out).reshaped({1});
    return out;
}

Tensor contract(const Tensor& a, const Tensor& b, std::initializer_list<AxisPair> axes) {
    return contract(a, b, std::span<const AxisPair>(axes.begin(), axes.size()));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank2(a, "matmul");
    require_rank2(b, "matmul");
    if (a.dim(1) != b.dim(0)) throw ShapeError("matmul: inner dimensions differ");
    Tensor out({a.dim(0), b.dim(1)});
    detail::as_matrix(out).noalias() = detail::as_matrix(a) * detail::as_matrix(b);
    return out;
}

Tensor dagger(const Tensor& m) {
    require_rank2(m, "dagger");
    Tensor out({m.dim(1), m.dim(0)});
    detail::as_matrix(out) = detail::as_matrix(m).adjoint();
    return out;
}

Tensor kron(const Tensor& a, const Tensor& b) {
    require_rank2(a, "kron");
    require_rank2(b, "kron");
    const std::size_t ar = a.dim(0), ac = a.dim(1), br = b.dim(0), bc = b.dim(1);
    Tensor out({ar * br, ac * bc});
    for (std::size_t i = 0; i < ar; ++i)
        for (std::size_t j = 0; j < ac; ++j) {
            const cplx f = a.data()[i * ac + j];
            if (f == cplx(0.0)) continue;
            for (std::size_t k = 0; k < br; ++k)
                for (std::size_t l = 0; l < bc; ++l)
                    out.data()[(i * br + k) * (ac * bc) + j * bc + l] = f * b.data()[k * bc + l];
        }
    return out;
}

cplx trace(const Tensor& m) {
    require_rank2(m, "trace");
    if (m.dim(0) != m.dim(1)) throw ShapeError("trace: matrix not square");
    cplx t = 0.0;
    for (std::size_t i = 0; i < m.dim(0); ++i) t += m.data()[i * m.dim(1) + i];
    return t;
}

SvdResult svd(const Tensor& m) {
    require_rank2(m, "svd");
    const std::size_t rows = m.dim(0), cols = m.dim(1), k = std::min(rows, cols);

    Tensor a = m; // gesdd destroys its input
    SvdResult r;
    r.u = Tensor({rows, k});
    r.s.assign(k, 0.0);
    r.vh = Tensor({k, cols});

    int info = LAPACKE_zgesdd(LAPACK_ROW_MAJOR, 'S', static_cast<lapack_int>(rows),
                              static_cast<lapack_int>(cols), lp(a.data()),
                              static_cast<lapack_int>(cols), r.s.data(), lp(r.u.data()),
                              static_cast<lapack_int>(k), lp(r.vh.data()),
                              static_cast<lapack_int>(cols));
    if (info != 0) {
        // divide-and-conquer occasionally fails to converge; retry with the
        // standard QR-iteration driver
        a = m;
        std::vector<double> superb(k);
        info = LAPACKE_zgesvd(LAPACK_ROW_MAJOR, 'S', 'S', static_cast<lapack_int>(rows),
                              static_cast<lapack_int>(cols), lp(a.data()),
                              static_cast<lapack_int>(cols), r.s.data(), lp(r.u.data()),
                              static_cast<lapack_int>(k), lp(r.vh.data()),
                              static_cast<lapack_int>(cols), superb.data());
        if (info != 0) throw DecompositionError("svd did not converge");
    }
    return r;
}

std::pair<Tensor, Tensor> lq(const Tensor& m) {
    require_rank2(m, "lq");
    const std::size_t rows = m.dim(0), cols = m.dim(1), k = std::min(rows, cols);

    // LQ of m from QR of m^dag: m^dag = q~ r~  =>  m = r~^dag q~^dag
    Tensor ah = dagger(m); // cols x rows
    std::vector<cplx> tau(k);
    int info = LAPACKE_zgeqrf(LAPACK_ROW_MAJOR, static_cast<lapack_int>(cols),
                              static_cast<lapack_int>(rows), lp(ah.data()),
                              static_cast<lapack_int>(rows), lp(tau.data()));
    if (info != 0) throw DecompositionError("lq: zgeqrf failed");

    Tensor l({rows, k});
    for (std::size_t i = 0; i < k; ++i)         // r~ upper-triangular, k x rows
        for (std::size_t j = i; j < rows; ++j)  // l = r~^dag, lower-triangular
            l.data()[j * k + i] = std::conj(ah.data()[i * rows + j]);

    info = LAPACKE_zungqr(LAPACK_ROW_MAJOR, static_cast<lapack_int>(cols),
                          static_cast<lapack_int>(k), static_cast<lapack_int>(k), lp(ah.data()),
                          static_cast<lapack_int>(rows), lp(tau.data()));
    if (info != 0) throw DecompositionError("lq: zungqr failed");

    Tensor q({k, cols});
    for (std::size_t i = 0; i < cols; ++i)
        for (std::size_t j = 0; j < k; ++j)
            q.data()[j * cols + i] = std::conj(ah.data()[i * rows + j]);

    // fix the gauge: real non-negative diagonal of l
    for (std::size_t i = 0; i < k; ++i) {
        const cplx d = l.data()[i * k + i];
        const double m = std::abs(d);
        if (m <= 0.0) continue;
        const cplx ph = d / m;
        for (std::size_t j = i; j < rows; ++j) l.data()[j * k + i] *= std::conj(ph);
        for (std::size_t j = 0; j < cols; ++j) q.data()[i * cols + j] *= ph;
    }
    return {std::move(l), std::move(q)};
}

std::pair<Tensor, Tensor> qr(const Tensor& m) {
    require_rank2(m, "qr");
    const std::size_t rows = m.dim(0), cols = m.dim(1), k = std::min(rows, cols);

    Tensor a = m;
    std::vector<cplx> tau(k);
    int info = LAPACKE_zgeqrf(LAPACK_ROW_MAJOR, static_cast<lapack_int>(rows),
                              static_cast<lapack_int>(cols), lp(a.data()),
                              static_cast<lapack_int>(cols), lp(tau.data()));
    if (info != 0) throw DecompositionError("qr: zgeqrf failed");

    Tensor r({k, cols});
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < cols; ++j) r.data()[i * cols + j] = a.data()[i * cols + j];

    info = LAPACKE_zungqr(LAPACK_ROW_MAJOR, static_cast<lapack_int>(rows),
                          static_cast<lapack_int>(k), static_cast<lapack_int>(k), lp(a.data()),
                          static_cast<lapack_int>(cols), lp(tau.data()));
    if (info != 0) throw DecompositionError("qr: zungqr failed");

    Tensor q({rows, k});
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < k; ++j) q.data()[i * k + j] = a.data()[i * cols + j];

    // fix the gauge: real non-negative diagonal of r
    for (std::size_t i = 0; i < k; ++i) {
        const cplx d = r.data()[i * cols + i];
        const double m = std::abs(d);
        if (m <= 0.0) continue;
        const cplx ph = d / m;
        for (std::size_t j = i; j < cols; ++j) r.data()[i * cols + j] *= std::conj(ph);
        for (std::size_t j = 0; j < rows; ++j) q.data()[j * k + i] *= ph;
    }
    return {std::move(q), std::move(r)};
}

double antihermitian_defect(const Tensor& a) {
    require_rank2(a, "antihermitian_defect");
    if (a.dim(0) != a.dim(1)) throw ShapeError("antihermitian_defect: matrix not square");
    double d = 0.0;
    const std::size_t n = a.dim(0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            d = std::max(d, std::abs(a.data()[i * n + j] + std::conj(a.data()[j * n + i])));
    return d;
}

double hermitian_defect(const Tensor& a) {
    require_rank2(a, "hermitian_defect");
    if (a.dim(0) != a.dim(1)) throw ShapeError("hermitian_defect: matrix not square");
    double d = 0.0;
    const std::size_t n = a.dim(0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            d = std::max(d, std::abs(a.data()[i * n + j] - std::conj(a.data()[j * n + i])));
    return d;
}

double unitary_defect(const Tensor& m) {
    require_rank2(m, "unitary_defect");
    Eigen::MatrixXcd g = detail::as_matrix(m).adjoint() * detail::as_matrix(m);
    g -= Eigen::MatrixXcd::Identity(g.rows(), g.cols());
    return g.cwiseAbs().maxCoeff();
}

bool is_unitary(const Tensor& m, double tol) {
    return m.dim(0) == m.dim(1) && unitary_defect(m) <= tol;
}

Tensor expm_antihermitian(const Tensor& a) {
    require_rank2(a, "expm_antihermitian");
    const std::size_t n = a.dim(0);
    if (n != a.dim(1)) throw ShapeError("expm_antihermitian: matrix not square");
    const double scale = std::max(1.0, a.max_abs());
    if (antihermitian_defect(a) > 1e-10 * scale)
        throw DomainError("expm_antihermitian: input is not anti-Hermitian");

    if (n == 2) {
        // a = i(t0 + tx sx + ty sy + tz sz); exp(a) = e^{i t0}(cos|t| + i sin|t| th.s)
        const cplx a00 = a.data()[0], a01 = a.data()[1], a10 = a.data()[2], a11 = a.data()[3];
        const double t0 = 0.5 * (a00.imag() + a11.imag());
        const double tz = 0.5 * (a00.imag() - a11.imag());
        const double tx = 0.5 * (a01.imag() + a10.imag());
        const double ty = 0.5 * (a01.real() - a10.real());
        const double t = std::sqrt(tx * tx + ty * ty + tz * tz);
        const cplx phase(std::cos(t0), std::sin(t0));
        const double c = std::cos(t);
        const double s = (t > 0.0) ? std::sin(t) / t : 1.0;
        Tensor w({2, 2});
        w.data()[0] = phase * cplx(c, s * tz);
        w.data()[1] = phase * cplx(s * ty, s * tx);
        w.data()[2] = phase * cplx(-s * ty, s * tx);
        w.data()[3] = phase * cplx(c, -s * tz);
        return w;
    }

    // exp(a) = V diag(e^{i w}) V^dag with a = i H, H Hermitian
    Eigen::MatrixXcd h = detail::as_matrix(a) * cplx(0.0, -1.0);
    h = 0.5 * (h + h.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success) throw DecompositionError("expm_antihermitian: eigensolver failed");
    Eigen::VectorXcd ph(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = es.eigenvalues()[static_cast<Eigen::Index>(i)];
        ph[static_cast<Eigen::Index>(i)] = cplx(std::cos(w), std::sin(w));
    }
    Tensor out({n, n});
    detail::as_matrix(out) = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    return out;
}

} // namespace qbrick
