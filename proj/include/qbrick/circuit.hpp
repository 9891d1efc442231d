#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qbrick/mps.hpp"
#include "qbrick/tensor.hpp"

namespace qbrick {

enum class GateKind { SingleQubit, Cnot, TwoQubit };

struct Gate {
    GateKind kind;
    std::vector<std::size_t> sites; // 1 entry, or 2: (control, target) for cnot
    Tensor matrix;                  // 2x2 or 4x4; row index pairs as (sites[0], sites[1])

    static Gate single(std::size_t site, Tensor m);
    static Gate cnot(std::size_t control, std::size_t target);
    static Gate two(std::size_t a, std::size_t b, Tensor m);
};

/// Qubit connectivity: a chain, or a rectangular grid addressed through the
/// boustrophedon (snake) chain ordering.
struct Topology {
    enum class Kind { Chain, Grid };
    Kind kind = Kind::Chain;
    std::size_t n = 0;
    std::size_t rows = 0, cols = 0;

    static Topology chain(std::size_t n);
    static Topology grid(std::size_t rows, std::size_t cols);

    bool adjacent(std::size_t a, std::size_t b) const;

    /// Snake chain index of grid coordinate (r, c).
    std::size_t site_of(std::size_t r, std::size_t c) const;
    std::pair<std::size_t, std::size_t> coord_of(std::size_t site) const;

    std::size_t edge_count() const;
    bool operator==(const Topology&) const = default;
};

/// Row-major snake ordering of an r x c grid: element k is the chain index
/// of the k-th coordinate in row-major scan order.
std::vector<std::size_t> snake_order(std::size_t rows, std::size_t cols);

struct CircuitMeta {
    std::string family = "custom";
    double tau = 0.0;
    std::size_t steps = 0;
    std::size_t k_max = 0;
    std::uint64_t seed = 0;
    bool routed = false;
    bool operator==(const CircuitMeta&) const = default;
};

/// Ordered layers of gates; gates within a layer act on disjoint sites.
/// Depth units group layers into the coarse steps the builders advertise
/// (one Trotter step, one brick layer pair, one transform round).
class Circuit {
public:
    Circuit() = default;
    explicit Circuit(Topology topo, CircuitMeta meta = {});

    std::size_t n() const { return topo_.n; }
    const Topology& topology() const { return topo_; }
    const CircuitMeta& meta() const { return meta_; }
    CircuitMeta& meta() { return meta_; }

    /// Validates unitarity, site ranges, in-layer disjointness and CNOT
    /// adjacency under the active topology.
    void add_layer(std::vector<Gate> gates);
    /// Marks the end of a depth unit at the current layer count.
    void end_unit();

    const std::vector<std::vector<Gate>>& layers() const { return layers_; }
    const std::vector<std::size_t>& unit_ends() const { return unit_ends_; }
    std::size_t depth_units() const { return unit_ends_.size(); }

    std::size_t gate_count() const;
    std::size_t two_qubit_gate_count() const;

private:
    Topology topo_;
    CircuitMeta meta_;
    std::vector<std::vector<Gate>> layers_;
    std::vector<std::size_t> unit_ends_;
};

// Target-family builders ----------------------------------------------------

/// First-order Trotter circuit for H = -sum zz - sum x on a chain.
/// One depth unit per step: even zz bonds, odd zz bonds, x rotations.
Circuit build_trotter_ising(std::size_t n, double tau, std::size_t steps);

/// Same model on a rows x cols grid with snake site numbering; bond layers
/// split into horizontal/vertical even/odd sublayers.
Circuit build_trotter_ising_grid(std::size_t rows, std::size_t cols, double tau, std::size_t steps);

/// Fourier-transform core (reversed output order, no final swap network).
/// Controlled-phase angles default to 2*pi/2^k; pass false to use the
/// alternative 2*pi/k reading.
Circuit build_qft_core(std::size_t n, bool power_of_two_phases = true);

/// Approximate transform keeping interactions of length <= k_max, with the
/// explicit move/act/move-back swap routing; all gates nearest-neighbor.
Circuit build_aqft(std::size_t n, std::size_t k_max, bool power_of_two_phases = true);

/// Brick-wall circuit of seeded Haar-random two-qubit gates; one depth unit
/// is an even+odd layer pair.
Circuit build_haar_random(std::size_t n, std::size_t depth, std::uint64_t seed);

/// CNOT cost of the swap-routed approximate transform at 3 CNOTs per
/// two-qubit gate: 3[(3k-5)(n - k/2) - (k-2)].
std::size_t aqft_cnot_count(std::size_t n, std::size_t k_max);

/// CNOT-equivalent cost of compiling the target conventionally (3 per
/// general two-qubit gate; the full-length routed count for qft families).
std::size_t target_cnot_count(const Circuit& c);

// Chain lowering -------------------------------------------------------------

/// Rewrites every non-nearest-neighbor two-qubit gate as a swap ladder, a
/// nearest-neighbor gate and the reverse ladder, then repacks gates into
/// maximal disjoint layers. Unit boundaries are preserved.
Circuit route_to_chain(const Circuit& c);

// Tensor-network forms -------------------------------------------------------

struct MpoBuild {
    MPO mpo;
    double discarded = 0.0;
};
struct MpsBuild {
    MPS mps;
    double discarded = 0.0;
};

/// Applies the circuit to the identity MPO with a canonicalize+truncate
/// sweep after every two-qubit layer. `per_unit` (optional) observes the
/// running operator after each depth unit.
MpoBuild circuit_to_mpo(const Circuit& c, std::size_t d_target,
                        const std::function<void(std::size_t, const MPO&)>& per_unit = nullptr);

/// Same for states, starting from psi0.
MpsBuild circuit_to_mps(const Circuit& c, const MPS& psi0, std::size_t d_target,
                        const std::function<void(std::size_t, const MPS&)>& per_unit = nullptr);

// Test support ---------------------------------------------------------------

/// Gates in application order, layers flattened.
std::vector<Gate> flat_gates(const Circuit& c);

/// Dense unitary of the whole circuit (small n only).
Tensor circuit_unitary(const Circuit& c);

/// Gate-list equality up to a global phase per gate.
bool gates_equivalent(const Circuit& a, const Circuit& b, double tol = 1e-9);

} // namespace qbrick
