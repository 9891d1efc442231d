#pragma once

#include <cmath>

#include "qbrick/rng.hpp"
#include "qbrick/tensor.hpp"

namespace qbrick::gates {

inline Tensor i2() { return Tensor::identity(2); }

inline Tensor x() { return Tensor::matrix(2, 2, {0, 1, 1, 0}); }
inline Tensor y() { return Tensor::matrix(2, 2, {0, cplx(0, -1), cplx(0, 1), 0}); }
inline Tensor z() { return Tensor::matrix(2, 2, {1, 0, 0, -1}); }

inline Tensor h() {
    const double r = 1.0 / std::sqrt(2.0);
    return Tensor::matrix(2, 2, {r, r, r, -r});
}

/// Control on the first qubit argument.
inline Tensor cnot() {
    return Tensor::matrix(4, 4, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0});
}

inline Tensor swap2() {
    return Tensor::matrix(4, 4, {1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1});
}

/// diag(1, 1, 1, e^{i phi}); symmetric in control and target.
inline Tensor cphase(double phi) {
    Tensor g = Tensor::identity(4);
    g.data()[15] = cplx(std::cos(phi), std::sin(phi));
    return g;
}

/// diag(1, e^{i phi}).
inline Tensor phase(double phi) {
    return Tensor::matrix(2, 2, {1, 0, 0, cplx(std::cos(phi), std::sin(phi))});
}

/// exp(+i tau Z x Z) = diag(e^{it}, e^{-it}, e^{-it}, e^{it}).
inline Tensor zz_rotation(double tau) {
    const cplx p(std::cos(tau), std::sin(tau));
    const cplx m = std::conj(p);
    Tensor g({4, 4});
    g.data()[0] = p;
    g.data()[5] = m;
    g.data()[10] = m;
    g.data()[15] = p;
    return g;
}

/// exp(+i tau X) = cos(tau) I + i sin(tau) X.
inline Tensor x_rotation(double tau) {
    const double c = std::cos(tau), s = std::sin(tau);
    return Tensor::matrix(2, 2, {cplx(c, 0), cplx(0, s), cplx(0, s), cplx(c, 0)});
}

/// exp(-i lam Z / 2), the qelib1 rz convention.
inline Tensor rz(double lam) {
    return Tensor::matrix(2, 2, {cplx(std::cos(lam / 2), -std::sin(lam / 2)), 0, 0,
                                 cplx(std::cos(lam / 2), std::sin(lam / 2))});
}

/// The qelib1 u3(theta, phi, lambda) matrix.
inline Tensor u3(double theta, double phi, double lam) {
    const double ct = std::cos(theta / 2), st = std::sin(theta / 2);
    const cplx el(std::cos(lam), std::sin(lam));
    const cplx ep(std::cos(phi), std::sin(phi));
    return Tensor::matrix(2, 2, {cplx(ct, 0), -el * st, ep * st, ep * el * ct});
}

/// Haar-distributed unitary via QR of a complex Ginibre sample with the
/// R diagonal phases fixed.
Tensor random_unitary(std::size_t dim, Rng& rng);

} // namespace qbrick::gates
