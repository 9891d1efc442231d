#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "qbrick/ansatz.hpp"
#include "qbrick/mps.hpp"

namespace qbrick {

/// Compilation objective: match a state (target applied to a known input) or
/// the full unitary of a circuit part.
struct LossSpec {
    enum class Mode { State, Unitary };
    Mode mode = Mode::Unitary;
    std::size_t n = 0;
    MPS target_state; // state mode
    MPS psi0;         // state mode
    MPO target_op;    // unitary mode

    static LossSpec state(MPS target, MPS input);
    static LossSpec unitary(MPO target);
};

/// |<a|b>|^2 for normalized states.
double fidelity_state(const MPS& a, const MPS& b);
/// |Tr[a^dag b]| / 2^n (no square; invariant under global phases).
double fidelity_unitary(const MPO& a, const MPO& b);

/// Contraction accuracy knobs. The ansatz network is contracted against the
/// target train with singular values below rtol * s_max dropped and bonds
/// hard-capped; zero/negative fields resolve to defaults chosen from the
/// problem size. The gradient tier may run coarser than the value tier; the
/// two coincide (and are effectively exact) for small systems.
struct EngineOptions {
    std::size_t d_target = 128;  // bond budget inherited by the caps
    std::size_t value_cap = 0;
    double value_rtol = -1.0;
    std::size_t grad_cap = 0;
    double grad_rtol = -1.0;

    EngineOptions resolved(const LossSpec& spec, std::size_t d_optim) const;
};

/// Precomputed sandwich contraction <target | ansatz-circuit | input> for a
/// fixed ansatz structure. Unitary mode runs in the doubled (operator)
/// space, so both modes share one train representation.
class LossEngine {
public:
    LossEngine(const LossSpec& spec, const BrickWallAnsatz& structure, EngineOptions opt = {});
    ~LossEngine();
    LossEngine(LossEngine&&) noexcept;
    LossEngine& operator=(LossEngine&&) noexcept;

    struct Eval {
        cplx overlap{};     // <target|U(params)|input> (state) or Tr[T^dag U] (unitary)
        double loss = 0.0;
        double fidelity = 0.0;
    };

    /// Value-tier forward contraction.
    Eval evaluate(const std::vector<Tensor>& params) const;
    /// Gradient-tier forward contraction (cheaper, used inside iterations).
    Eval evaluate_cheap(const std::vector<Tensor>& params) const;
    /// Gradient tier; fills grads[i] = dLoss/d(conj U_i) per trainable gate.
    Eval evaluate_with_gradient(const std::vector<Tensor>& params, std::vector<Tensor>& grads) const;

    std::size_t param_count() const;
    std::size_t n() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// 2 - 2 Re<t|U|psi0> (state) or 2*2^n - 2 Re Tr[T^dag U] (unitary),
/// contracted without densification.
double loss_value(const LossSpec& spec, const BrickWallAnsatz& a);

/// Wirtinger gradients dLoss/d(conj U_i) of every trainable gate, by
/// environment contraction of the sandwich network with the gate removed.
std::vector<Tensor> gradient(const LossSpec& spec, const BrickWallAnsatz& a);

} // namespace qbrick
