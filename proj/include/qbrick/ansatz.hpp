#pragma once

#include <cstdint>
#include <vector>

#include "qbrick/circuit.hpp"
#include "qbrick/tensor.hpp"

namespace qbrick {

enum class AnsatzInit { Identity, NearIdentity, Seeded };

/// Brick-wall compilation ansatz: a fixed CNOT skeleton dressed with
/// trainable single-qubit unitaries.
///
/// One layer is an even-bond plus an odd-bond CNOT sublayer (all topology
/// edges once, for grids split into horizontal/vertical even/odd groups), so
/// a chain layer holds n-1 CNOTs. Every CNOT is preceded by trainable
/// single-qubit gates on both of its qubits and one final column of n
/// trainable gates closes the circuit; the parameter count is
/// 2 * n_cnot + n. CNOT controls sit on the lower site index.
class BrickWallAnsatz {
public:
    struct Brick {
        std::size_t low = 0, high = 0;     // chain ids, low < high
        std::size_t sublayer = 0;          // disjoint group within its layer
        std::size_t pre_low = 0, pre_high = 0; // parameter indices
    };

    BrickWallAnsatz() = default;

    /// sigma is the algebra spread for NearIdentity; seed feeds both random
    /// initializers.
    static BrickWallAnsatz build(Topology topo, std::size_t d_optim,
                                 AnsatzInit init = AnsatzInit::NearIdentity, double sigma = 0.01,
                                 std::uint64_t seed = 0);

    std::size_t n() const { return topo_.n; }
    std::size_t depth() const { return depth_; }
    const Topology& topology() const { return topo_; }

    std::size_t n_cnot() const { return bricks_.size(); }
    std::size_t bricks_per_layer() const;
    std::size_t sublayers_per_layer() const { return sublayers_; }

    std::size_t param_count() const { return params_.size(); }
    const Tensor& param(std::size_t i) const { return params_[i]; }
    void set_param(std::size_t i, Tensor u);
    const std::vector<Tensor>& params() const { return params_; }
    std::vector<Tensor>& params() { return params_; }

    const std::vector<Brick>& bricks() const { return bricks_; }
    /// Parameter index of the closing-column gate on `site`.
    std::size_t final_param(std::size_t site) const { return 2 * bricks_.size() + site; }

    double max_unitary_defect() const;

    /// Explicit gate-level form (single-qubit gates + CNOTs only).
    Circuit to_circuit() const;

    /// Depth-extended copy: `extra` identity-initialized layers appended.
    BrickWallAnsatz padded(std::size_t extra) const;

private:
    Topology topo_;
    std::size_t depth_ = 0;
    std::size_t sublayers_ = 0;
    std::vector<Brick> bricks_;
    std::vector<Tensor> params_;
};

} // namespace qbrick
