#include "qbrick/gates.hpp"

#include "qbrick/errors.hpp"

namespace qbrick::gates {

Tensor random_unitary(std::size_t dim, Rng& rng) {
    Tensor g({dim, dim});
    for (cplx& v : g.values()) v = cplx(rng.normal(), rng.normal());
    auto [q, r] = qr(g);
    // qr() already normalizes the R diagonal to be real non-negative, which
    // makes q Haar-distributed as is.
    return std::move(q);
}

} // namespace qbrick::gates
