#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qbrick/circuit.hpp"
#include "qbrick/loss.hpp"
#include "qbrick/optimize.hpp"

namespace qbrick {

/// How a deep target splits into classically tractable parts.
struct PartitionPlan {
    std::vector<std::size_t> part_depths; // depth units per part; must sum to the target's
    std::vector<std::size_t> d_optim;     // ansatz depth per part (single entry broadcasts)

    std::size_t d_optim_for(std::size_t part) const;
};

/// Cuts the target at depth-unit boundaries; composing the parts in order
/// reproduces the target gate for gate.
std::vector<Circuit> partition(const Circuit& target, const PartitionPlan& plan);

struct NoiseModel {
    double eps2 = 4e-3; // two-qubit gate error rate
};

/// (1 - eps2)^n_cnot.
double noise_fidelity(std::size_t n_cnot, const NoiseModel& m);
/// f_optim * f_noise.
double overall_fidelity(double f_optim, double f_noise);
/// target CNOT cost over compiled CNOT cost.
double compression_rate(double target_cnots, double optim_cnots);

// ---------------------------------------------------------------------------

struct RunSettings {
    std::size_t d_target_bond = 128; // bond budget for target MPS/MPO builds
    std::size_t restarts = 3;        // seeds per optimization task, best kept
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    bool warm_start = true;          // reuse solutions along sweeps/parts
    double init_sigma = 0.01;
    OptimizeConfig opt;
};

struct SweepRow {
    std::size_t d_optim = 0;
    std::size_t n_cnot = 0;
    double f_optim = 0.0;
    double f_noise = 0.0;
    double f_all = 0.0;
    bool converged = false;
    bool failed = false;
    std::size_t iterations = 0;
    double wall_time = 0.0;
};

struct DepthSweepReport {
    std::string family;
    std::size_t n = 0;
    LossSpec::Mode mode = LossSpec::Mode::Unitary;
    double eps2 = 0.0;
    std::size_t target_cnots = 0;
    std::size_t target_depth_units = 0;
    std::vector<SweepRow> rows;
    std::size_t d_max = 0; // argmax of f_all, ties to the smaller depth
    double f_all_max = 0.0;
    double gamma = 0.0;

    std::string to_json() const;
    std::string to_csv() const;
};

struct SweepOptions {
    LossSpec::Mode mode = LossSpec::Mode::Unitary;
    std::string psi0_bits; // state mode; empty means |0...0>
};

DepthSweepReport depth_sweep(const Circuit& target, const std::vector<std::size_t>& depths,
                             const NoiseModel& noise, const RunSettings& run,
                             const SweepOptions& opts = {});

/// Fixed-angle baseline for transform targets: one row per interaction
/// cutoff, with the exact transform-vs-truncation fidelity.
struct AqftBaselineRow {
    std::size_t k_max = 0;
    std::size_t n_cnot = 0;
    double f_target = 0.0;
    double f_all = 0.0;
};
std::vector<AqftBaselineRow> aqft_baseline(std::size_t n, std::size_t d_target_bond,
                                           const NoiseModel& noise);

// ---------------------------------------------------------------------------

struct EeTraceOptions {
    bool state = true;
    bool op = false;
    std::string psi0_bits; // empty means |0...0>
    std::size_t d_target_bond = 128;
};

/// Half-chain entanglement after every depth unit of the target.
struct EeTrace {
    std::size_t cut = 0; // floor(n/2), the assumed half-chain cut
    std::vector<double> state_ee;
    std::vector<double> op_ee;
};
EeTrace ee_trace(const Circuit& target, const EeTraceOptions& opts);

// ---------------------------------------------------------------------------

struct CompileOptions {
    PartitionPlan plan;            // empty part_depths means one part of full depth
    bool first_part_state = true;  // compile part 1 against U|psi0> instead of U
    std::string psi0_bits;
    std::string observable;        // "", "z", or "zz"
    std::vector<std::size_t> observable_sites;
};

struct PartResult {
    std::size_t depth_units = 0;
    std::size_t d_optim = 0;
    LossSpec::Mode mode = LossSpec::Mode::Unitary;
    double f_optim = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
    double wall_time = 0.0;
    std::vector<double> loss_history;
    BrickWallAnsatz compiled;
};

struct ObservableSeries {
    std::vector<std::size_t> checkpoints; // cumulative target depth units
    std::vector<double> compiled;
    std::vector<double> ideal;
};

struct CompilationReport {
    std::string family;
    std::size_t n = 0;
    std::vector<PartResult> parts;
    double f_optim_product = 1.0;
    double end_to_end_fidelity = -1.0; // densified cross-check, n <= 6 only
    std::size_t n_cnot = 0;
    std::size_t target_cnots = 0;
    double gamma = 0.0;
    double eps2 = 0.0;
    double f_noise = 1.0;
    double f_all = 0.0;
    std::optional<ObservableSeries> observable;

    std::string to_json() const;
};

CompilationReport compile_circuit(const Circuit& target, const NoiseModel& noise,
                                  const RunSettings& run, const CompileOptions& opts);

/// Expectation of a local observable after every compiled part, with the
/// ideal target series alongside.
ObservableSeries observable_dynamics(const std::vector<Circuit>& target_parts,
                                     const std::vector<BrickWallAnsatz>& compiled, const MPS& psi0,
                                     const Tensor& observable, std::span<const std::size_t> sites,
                                     std::size_t d_target_bond);

// ---------------------------------------------------------------------------

struct ScalingPoint {
    std::size_t n = 0;
    double f_optim = 0.0;
    double infidelity = 0.0;
};

struct ScalingReport {
    std::vector<ScalingPoint> points;
    double alpha = 0.0;     // slope of log(1-F) against log n
    double log_c = 0.0;     // intercept
    std::size_t used = 0;   // points entering the fit

    std::string to_json() const;
};

/// Least-squares exponent of 1 - F_optim ~ n^alpha over Ising targets of
/// fixed depth; rows with non-positive infidelity are excluded from the fit.
ScalingReport scaling_study(const std::vector<std::size_t>& ns, double tau, std::size_t d_target,
                            std::size_t d_optim, LossSpec::Mode mode, const NoiseModel& noise,
                            const RunSettings& run);

/// Least-squares fit helper exposed for diagnostics: slope of y against x.
std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

} // namespace qbrick
