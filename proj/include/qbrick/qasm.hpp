#pragma once

#include <string>

#include "qbrick/ansatz.hpp"
#include "qbrick/circuit.hpp"

namespace qbrick {

/// OpenQASM 2.0 text for the circuit. Single-qubit gates are emitted as
/// named qelib1 gates when they match one, otherwise as u3 (which fixes a
/// global phase per gate — inherent to the format). Two-qubit gates must be
/// CNOT, swap, a controlled phase, or a zz interaction (emitted as its exact
/// cx/rz/cx form); anything else raises UnsupportedGateError.
std::string to_qasm(const Circuit& c);
std::string to_qasm(const BrickWallAnsatz& a);

/// Parses the emitter's dialect (plus the common qelib1 one- and two-qubit
/// gates); every gate lands in its own layer.
Circuit from_qasm(const std::string& text);

void export_qasm(const Circuit& c, const std::string& path);
void export_qasm(const BrickWallAnsatz& a, const std::string& path);
Circuit import_qasm(const std::string& path);

} // namespace qbrick
