#pragma once

#include <stdexcept>
#include <string>

namespace qbrick {

/// Base class for all qbrick errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Tensor/operand dimensions do not line up.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of the operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A matrix factorization failed to converge.
class DecompositionError : public Error {
public:
    using Error::Error;
};

/// Gate placement violates the active qubit connectivity.
class TopologyError : public Error {
public:
    using Error::Error;
};

/// A partition plan is inconsistent with its target circuit.
class PlanError : public Error {
public:
    using Error::Error;
};

/// Gate cannot be expressed in the requested output format.
class UnsupportedGateError : public Error {
public:
    using Error::Error;
};

/// File or stream I/O failure.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace qbrick
