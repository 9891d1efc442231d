#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "qbrick/tensor.hpp"

namespace qbrick {

enum class Canonical { None, Left, Right };

/// Matrix product state over qubits. Site tensors are rank-3 with index
/// order (left bond, physical, right bond); boundary bonds have dimension 1.
class MPS {
public:
    MPS() = default;

    /// Computational-basis product state; bits[i] in {'0','1'}.
    static MPS product_state(std::size_t n, std::string_view bits);

    std::size_t size() const { return sites_.size(); }
    const Tensor& site(std::size_t i) const { return sites_[i]; }
    /// Bond dimensions including the two trivial boundary bonds (size n+1).
    std::vector<std::size_t> bond_dims() const;
    std::size_t max_bond() const;
    Canonical canonical() const { return canonical_; }

    double norm() const;

    void apply_gate_inplace(const Tensor& gate, std::span<const std::size_t> sites);
    void canonicalize_inplace();
    /// Pre: right-canonical. Returns the discarded weight; renormalizes.
    double truncate_inplace(std::size_t d_max);

    /// Internal access for the contraction machinery.
    std::vector<Tensor>& raw_sites() { return sites_; }
    const std::vector<Tensor>& raw_sites() const { return sites_; }
    void set_canonical(Canonical c) { canonical_ = c; }

private:
    std::vector<Tensor> sites_;
    Canonical canonical_ = Canonical::None;
};

/// Matrix product operator over qubits. Site tensors are rank-4 with index
/// order (left bond, output physical, input physical, right bond).
///
/// Canonical-form site tensors carry a factor sqrt(2) per site relative to
/// exact isometries so that a unitary circuit keeps Tr[U^dag U] = 2^n.
class MPO {
public:
    MPO() = default;

    static MPO identity(std::size_t n);

    std::size_t size() const { return sites_.size(); }
    const Tensor& site(std::size_t i) const { return sites_[i]; }
    std::vector<std::size_t> bond_dims() const;
    std::size_t max_bond() const;
    Canonical canonical() const { return canonical_; }

    /// Tr[U^dag U]; 2^n by convention for unitary content.
    double hs_norm_sq() const;

    /// Applies the gate to the output (row) index: U <- G U.
    void apply_gate_inplace(const Tensor& gate, std::span<const std::size_t> sites);
    void canonicalize_inplace();
    double truncate_inplace(std::size_t d_max);

    std::vector<Tensor>& raw_sites() { return sites_; }
    const std::vector<Tensor>& raw_sites() const { return sites_; }
    void set_canonical(Canonical c) { canonical_ = c; }

private:
    std::vector<Tensor> sites_;
    Canonical canonical_ = Canonical::None;
};

// Pure-value operation set. The *_inplace member forms are equivalent; these
// take their operand by value so callers can move when they do not need the
// original.

MPS mps_product_state(std::size_t n, std::string_view bits);
MPO mpo_identity(std::size_t n);

MPS apply_gate(MPS target, const Tensor& gate, std::span<const std::size_t> sites);
MPO apply_gate(MPO target, const Tensor& gate, std::span<const std::size_t> sites);
MPS apply_gate(MPS target, const Tensor& gate, std::initializer_list<std::size_t> sites);
MPO apply_gate(MPO target, const Tensor& gate, std::initializer_list<std::size_t> sites);

MPS canonicalize(MPS target);
MPO canonicalize(MPO target);

std::pair<MPS, double> truncate(MPS target, std::size_t d_max);
std::pair<MPO, double> truncate(MPO target, std::size_t d_max);

/// <a|b> for equal-length states.
cplx inner(const MPS& a, const MPS& b);

/// Tr[a^dag b]; callers normalize by 2^n as needed.
cplx trace_adjoint_product(const MPO& a, const MPO& b);

/// Descending Schmidt values at the cut (left block of `cut` sites),
/// normalized so the squares sum to one.
std::vector<double> schmidt_values(const MPS& target, std::size_t cut);
std::vector<double> schmidt_values(const MPO& target, std::size_t cut);

/// Entanglement entropy in bits at the cut; operators are treated as
/// normalized vectors in the doubled space.
double entanglement_entropy(const MPS& target, std::size_t cut);
double entanglement_entropy(const MPO& target, std::size_t cut);

/// <psi|O|psi> for a Hermitian observable on one or two adjacent sites.
double expect_local(const MPS& psi, const Tensor& observable, std::span<const std::size_t> sites);
double expect_local(const MPS& psi, const Tensor& observable, std::initializer_list<std::size_t> sites);

/// Exact MPO-on-MPS product (no truncation); intended for small systems.
MPS apply_mpo(const MPO& op, const MPS& psi);

/// Dense forms for cross-checks; guarded against large n.
Tensor to_statevector(const MPS& psi); // shape {2^n}
Tensor to_matrix(const MPO& op);       // shape {2^n, 2^n}

} // namespace qbrick
