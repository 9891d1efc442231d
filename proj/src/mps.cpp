#include "qbrick/mps.hpp"

#include <algorithm>
#include <cmath>

#include "qbrick/errors.hpp"
#include "eigen_util.hpp"
#include "train_util.hpp"

namespace qbrick {

namespace {

constexpr double kMpoScale = 2.0; // d_p factor in the operator canonical form

int form_code(Canonical c) {
    switch (c) {
        case Canonical::Left: return 1;
        case Canonical::Right: return 2;
        default: return 0;
    }
}

// Reinterpret MPO sites (Dl,2,2,Dr) as flat trains (Dl,4,Dr); same storage.
void flatten(std::vector<Tensor>& sites) {
    for (Tensor& t : sites)
        t = std::move(t).reshaped({t.dim(0), 4, t.dim(3)});
}

void unflatten(std::vector<Tensor>& sites) {
    for (Tensor& t : sites)
        t = std::move(t).reshaped({t.dim(0), 2, 2, t.dim(2)});
}

// Gate with its two qubit arguments exchanged.
Tensor reorder_2q(const Tensor& g) {
    Tensor out({4, 4});
    for (std::size_t i1 = 0; i1 < 2; ++i1)
        for (std::size_t i2 = 0; i2 < 2; ++i2)
            for (std::size_t j1 = 0; j1 < 2; ++j1)
                for (std::size_t j2 = 0; j2 < 2; ++j2)
                    out.data()[(i2 * 2 + i1) * 4 + (j2 * 2 + j1)] =
                        g.data()[(i1 * 2 + i2) * 4 + (j1 * 2 + j2)];
    return out;
}

struct GatePlacement {
    Tensor gate;      // oriented so that its first argument is the lower site
    std::size_t site; // lower site index
    bool two_qubit;
};

GatePlacement check_gate(const Tensor& gate, std::span<const std::size_t> sites, std::size_t n) {
    if (gate.rank() != 2) throw ShapeError("apply_gate: gate must be a matrix");
    if (!is_unitary(gate, 1e-8)) throw DomainError("apply_gate: gate is not unitary");
    if (sites.size() == 1) {
        if (gate.dim(0) != 2) throw ShapeError("apply_gate: one-site gate must be 2x2");
        if (sites[0] >= n) throw ShapeError("apply_gate: site out of range");
        return {gate, sites[0], false};
    }
    if (sites.size() != 2) throw ShapeError("apply_gate: expected one or two sites");
    if (gate.dim(0) != 4) throw ShapeError("apply_gate: two-site gate must be 4x4");
    const std::size_t a = sites[0], b = sites[1];
    if (a >= n || b >= n) throw ShapeError("apply_gate: site out of range");
    if (a + 1 != b && b + 1 != a)
        throw TopologyError("apply_gate: two-qubit gates act on adjacent sites only");
    if (a < b) return {gate, a, true};
    return {reorder_2q(gate), b, true};
}

} // namespace

// ---------------------------------------------------------------------------
// MPS

MPS MPS::product_state(std::size_t n, std::string_view bits) {
    if (n < 2) throw DomainError("product_state: need at least two qubits");
    if (bits.size() != n) throw ShapeError("product_state: bitstring length must equal qubit count");
    MPS psi;
    psi.sites_.reserve(n);
    for (char c : bits) {
        if (c != '0' && c != '1') throw DomainError("product_state: bits must be '0' or '1'");
        Tensor t({1, 2, 1});
        t.data()[c - '0'] = 1.0;
        psi.sites_.push_back(std::move(t));
    }
    psi.canonical_ = Canonical::Right;
    return psi;
}

std::vector<std::size_t> MPS::bond_dims() const {
    std::vector<std::size_t> d;
    d.reserve(sites_.size() + 1);
    d.push_back(1);
    for (const Tensor& t : sites_) d.push_back(t.dim(2));
    return d;
}

std::size_t MPS::max_bond() const { return detail::train_max_bond(sites_); }

double MPS::norm() const { return std::sqrt(std::max(0.0, detail::train_norm_sq(sites_))); }

void MPS::apply_gate_inplace(const Tensor& gate, std::span<const std::size_t> sites) {
    auto g = check_gate(gate, sites, size());
    if (g.two_qubit)
        detail::train_apply_2q_svd(sites_, g.gate, g.site);
    else
        detail::train_apply_1q(sites_, g.gate, g.site);
    canonical_ = Canonical::None;
}

void MPS::canonicalize_inplace() {
    detail::train_right_canonicalize(sites_, 1.0);
    canonical_ = Canonical::Right;
}

double MPS::truncate_inplace(std::size_t d_max) {
    if (d_max < 1) throw DomainError("truncate: bond cap must be at least 1");
    if (canonical_ != Canonical::Right)
        throw DomainError("truncate: canonicalize to right-canonical form first");
    const double w = detail::train_truncate(sites_, 1.0, {d_max, -1.0, true});
    canonical_ = Canonical::Left;
    return w;
}

// ---------------------------------------------------------------------------
// MPO

MPO MPO::identity(std::size_t n) {
    if (n < 2) throw DomainError("mpo_identity: need at least two qubits");
    MPO op;
    op.sites_.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        Tensor t({1, 2, 2, 1});
        t.data()[0] = 1.0;
        t.data()[3] = 1.0;
        op.sites_.push_back(std::move(t));
    }
    op.canonical_ = Canonical::Right;
    return op;
}

std::vector<std::size_t> MPO::bond_dims() const {
    std::vector<std::size_t> d;
    d.reserve(sites_.size() + 1);
    d.push_back(1);
    for (const Tensor& t : sites_) d.push_back(t.dim(3));
    return d;
}

std::size_t MPO::max_bond() const {
    std::size_t m = 1;
    for (const Tensor& t : sites_) m = std::max(m, t.dim(3));
    return m;
}

double MPO::hs_norm_sq() const {
    std::vector<Tensor> flat = sites_;
    flatten(flat);
    return detail::train_norm_sq(flat);
}

void MPO::apply_gate_inplace(const Tensor& gate, std::span<const std::size_t> sites) {
    auto g = check_gate(gate, sites, size());
    flatten(sites_);
    if (g.two_qubit)
        detail::train_apply_2q_svd(sites_, detail::lift_2q(g.gate, 4), g.site);
    else
        detail::train_apply_1q(sites_, detail::lift_1q(g.gate, 4), g.site);
    unflatten(sites_);
    canonical_ = Canonical::None;
}

void MPO::canonicalize_inplace() {
    flatten(sites_);
    detail::train_right_canonicalize(sites_, kMpoScale);
    unflatten(sites_);
    canonical_ = Canonical::Right;
}

double MPO::truncate_inplace(std::size_t d_max) {
    if (d_max < 1) throw DomainError("truncate: bond cap must be at least 1");
    if (canonical_ != Canonical::Right)
        throw DomainError("truncate: canonicalize to right-canonical form first");
    flatten(sites_);
    const double w = detail::train_truncate(sites_, kMpoScale, {d_max, -1.0, true});
    unflatten(sites_);
    canonical_ = Canonical::Left;
    return w;
}

// ---------------------------------------------------------------------------
// Pure-value forms

MPS mps_product_state(std::size_t n, std::string_view bits) { return MPS::product_state(n, bits); }
MPO mpo_identity(std::size_t n) { return MPO::identity(n); }

MPS apply_gate(MPS target, const Tensor& gate, std::span<const std::size_t> sites) {
    target.apply_gate_inplace(gate, sites);
    return target;
}

MPO apply_gate(MPO target, const Tensor& gate, std::span<const std::size_t> sites) {
    target.apply_gate_inplace(gate, sites);
    return target;
}

MPS apply_gate(MPS target, const Tensor& gate, std::initializer_list<std::size_t> sites) {
    return apply_gate(std::move(target), gate, std::span<const std::size_t>(sites.begin(), sites.size()));
}

MPO apply_gate(MPO target, const Tensor& gate, std::initializer_list<std::size_t> sites) {
    return apply_gate(std::move(target), gate, std::span<const std::size_t>(sites.begin(), sites.size()));
}

MPS canonicalize(MPS target) {
    target.canonicalize_inplace();
    return target;
}

MPO canonicalize(MPO target) {
    target.canonicalize_inplace();
    return target;
}

std::pair<MPS, double> truncate(MPS target, std::size_t d_max) {
    const double w = target.truncate_inplace(d_max);
    return {std::move(target), w};
}

std::pair<MPO, double> truncate(MPO target, std::size_t d_max) {
    const double w = target.truncate_inplace(d_max);
    return {std::move(target), w};
}

cplx inner(const MPS& a, const MPS& b) {
    if (a.size() != b.size()) throw ShapeError("inner: states have different lengths");
    return detail::train_inner(a.raw_sites(), b.raw_sites());
}

cplx trace_adjoint_product(const MPO& a, const MPO& b) {
    if (a.size() != b.size()) throw ShapeError("trace_adjoint_product: operators differ in length");
    std::vector<Tensor> fa = a.raw_sites();
    std::vector<Tensor> fb = b.raw_sites();
    flatten(fa);
    flatten(fb);
    return detail::train_inner(fa, fb);
}

std::vector<double> schmidt_values(const MPS& target, std::size_t cut) {
    return detail::train_schmidt(target.raw_sites(), 1.0, cut, form_code(target.canonical()));
}

std::vector<double> schmidt_values(const MPO& target, std::size_t cut) {
    std::vector<Tensor> flat = target.raw_sites();
    flatten(flat);
    return detail::train_schmidt(flat, kMpoScale, cut, form_code(target.canonical()));
}

double entanglement_entropy(const MPS& target, std::size_t cut) {
    return detail::entropy_bits(schmidt_values(target, cut));
}

double entanglement_entropy(const MPO& target, std::size_t cut) {
    return detail::entropy_bits(schmidt_values(target, cut));
}

double expect_local(const MPS& psi, const Tensor& observable, std::span<const std::size_t> sites) {
    if (observable.rank() != 2) throw ShapeError("expect_local: observable must be a matrix");
    if (hermitian_defect(observable) > 1e-10 * std::max(1.0, observable.max_abs()))
        throw DomainError("expect_local: observable is not Hermitian");

    std::vector<Tensor> acted = psi.raw_sites();
    if (sites.size() == 1) {
        if (observable.dim(0) != 2) throw ShapeError("expect_local: one-site observable must be 2x2");
        if (sites[0] >= psi.size()) throw ShapeError("expect_local: site out of range");
        detail::train_apply_1q(acted, observable, sites[0]);
    } else if (sites.size() == 2) {
        if (observable.dim(0) != 4) throw ShapeError("expect_local: two-site observable must be 4x4");
        const std::size_t a = sites[0], b = sites[1];
        if (a >= psi.size() || b >= psi.size()) throw ShapeError("expect_local: site out of range");
        if (a + 1 != b && b + 1 != a)
            throw TopologyError("expect_local: observable sites must be adjacent");
        detail::train_apply_2q_svd(acted, a < b ? observable : reorder_2q(observable), std::min(a, b));
    } else {
        throw ShapeError("expect_local: observable acts on one or two sites");
    }

    const cplx val = detail::train_inner(psi.raw_sites(), acted);
    const double nrm = detail::train_norm_sq(psi.raw_sites());
    return (val / nrm).real();
}

double expect_local(const MPS& psi, const Tensor& observable, std::initializer_list<std::size_t> sites) {
    return expect_local(psi, observable, std::span<const std::size_t>(sites.begin(), sites.size()));
}

MPS apply_mpo(const MPO& op, const MPS& psi) {
    if (op.size() != psi.size()) throw ShapeError("apply_mpo: sizes differ");
    MPS out;
    for (std::size_t j = 0; j < op.size(); ++j) {
        Tensor t = contract(op.site(j), psi.site(j), {{2, 1}}); // (Dl,t,Dr,dl,dr)
        t = t.transposed({0, 3, 1, 2, 4});
        out.raw_sites().push_back(
            std::move(t).reshaped({op.site(j).dim(0) * psi.site(j).dim(0), 2,
                                   op.site(j).dim(3) * psi.site(j).dim(2)}));
    }
    out.set_canonical(Canonical::None);
    return out;
}

Tensor to_statevector(const MPS& psi) { return detail::train_dense(psi.raw_sites()); }

Tensor to_matrix(const MPO& op) {
    std::vector<Tensor> flat = op.raw_sites();
    flatten(flat);
    const Tensor v = detail::train_dense(flat);
    const std::size_t n = op.size();
    const std::size_t dim = std::size_t(1) << n;
    Tensor m({dim, dim});
    for (std::size_t c = 0; c < v.size(); ++c) {
        std::size_t row = 0, col = 0, rest = c;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t pair = (rest >> (2 * (n - 1 - j))) & 3u;
            row = (row << 1) | (pair >> 1);
            col = (col << 1) | (pair & 1u);
            (void)rest;
        }
        m.data()[row * dim + col] = v.data()[c];
    }
    return m;
}

} // namespace qbrick
