#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qbrick/ansatz.hpp"
#include "qbrick/loss.hpp"
#include "qbrick/tensor.hpp"

namespace qbrick {

struct AdamParams {
    double lr = 1e-3; // eta^0
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Per-gate Adam moments in the anti-Hermitian tangent coordinates; no
/// parallel transport is applied between iterates.
struct OptimizerState {
    std::vector<Tensor> m;  // first moments, anti-Hermitian
    std::vector<Tensor> v;  // second moments, elementwise |g|^2 (real entries)
    std::size_t t = 0;
    AdamParams hp;

    static OptimizerState fresh(std::size_t n_gates, AdamParams hp = {});
};

/// Skew part of U^dag grad: (U^dag g - g^dag U) / 2, anti-Hermitian.
Tensor project_to_tangent(const Tensor& u, const Tensor& grad);

/// U e^{-eta * step}; step must be anti-Hermitian.
Tensor retract(const Tensor& u, const Tensor& step, double eta);

/// One Adam update from projected gradients; returns per-gate steps with the
/// learning rate folded in (feed to retract with eta = 1). Steps are
/// re-projected to the anti-Hermitian algebra to guard rounding drift.
std::vector<Tensor> adam_step(OptimizerState& state, const std::vector<Tensor>& grads);

struct OptimizeConfig {
    std::size_t max_iters = 20000;
    double tol = 1e-7;       // minimum best-loss improvement that resets patience
    std::size_t patience = 500;
    AdamParams adam;
    EngineOptions engine;
    std::size_t precise_every = 25; // cadence of value-tier confirmations
    std::uint64_t seed = 0;         // recorded for reproducibility bookkeeping
    std::string checkpoint_path;    // empty disables checkpointing
    std::size_t checkpoint_every = 0;
    bool resume = false; // continue from checkpoint_path when it exists
};

struct CompilationResult {
    BrickWallAnsatz ansatz; // best-seen parameters
    double f_optim = 0.0;
    double final_loss = 0.0;
    std::vector<double> loss_history; // gradient-tier loss per iteration
    std::size_t iterations = 0;
    double wall_time = 0.0; // seconds
    bool converged = false;
};

/// Riemannian Adam descent of the compilation loss. Returns the best-seen
/// parameters with F_optim evaluated by the value-tier contraction.
CompilationResult optimize(const LossSpec& spec, BrickWallAnsatz ansatz,
                           const OptimizeConfig& config = {});

} // namespace qbrick
