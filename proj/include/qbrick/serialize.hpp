#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qbrick/ansatz.hpp"
#include "qbrick/circuit.hpp"
#include "qbrick/mps.hpp"
#include "qbrick/optimize.hpp"

namespace qbrick {

/// Circuit JSON: {format, n, topology, metadata, unit_ends, layers:[[{kind,
/// sites, matrix?}]]} with complex entries as [re, im] pairs.
std::string circuit_to_json(const Circuit& c);
Circuit circuit_from_json(const std::string& text);

// Versioned binary tensor-train files: magic string, site count, canonical
// flag, then per-site shape headers and row-major complex doubles.
void save_mps(const MPS& psi, const std::string& path);
MPS load_mps(const std::string& path);
void save_mpo(const MPO& op, const std::string& path);
MPO load_mpo(const std::string& path);

/// Resumable optimizer snapshot.
struct Checkpoint {
    BrickWallAnsatz ansatz; // structure + current parameters
    OptimizerState opt;
    std::uint64_t iteration = 0;
    std::vector<double> loss_history;
    std::vector<Tensor> best_params;
    double best_fidelity = -1.0;
    double conv_best_loss = 0.0;
    std::uint64_t last_gain_iter = 0;
    double cheap_best_fidelity = -1.0;
    std::uint64_t last_confirm_iter = 0;
    bool confirm_pending = false;
    std::uint64_t seed = 0;
    std::string rng_state; // textual engine state of the owning driver
};

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

} // namespace qbrick
