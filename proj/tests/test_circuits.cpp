#include <doctest.h>

#include <cmath>

#include "oracle/dense_sim.hpp"
#include "qbrick/circuit.hpp"
#include "qbrick/errors.hpp"
#include "qbrick/gates.hpp"
#include "qbrick/loss.hpp"

using namespace qbrick;

namespace {

oracle::Mat dense_of(const Tensor& t) {
    oracle::Mat m(t.dim(0), t.dim(1));
    for (std::size_t i = 0; i < t.dim(0); ++i)
        for (std::size_t j = 0; j < t.dim(1); ++j) m(i, j) = t.at({i, j});
    return m;
}

double op_fidelity(const oracle::Mat& a, const oracle::Mat& b) {
    return std::abs((a.adjoint() * b).trace()) / static_cast<double>(a.rows());
}

} // namespace

TEST_CASE("trotter step approximates the exact propagator at first order") {
    const double tau = 0.1;
    Circuit c = build_trotter_ising(2, tau, 1);
    oracle::Mat u = dense_of(circuit_unitary(c));
    oracle::Mat exact = oracle::hermitian_evolution(oracle::ising_chain_hamiltonian(2), tau);
    CHECK(op_fidelity(u, exact) >= 1.0 - std::pow(tau, 4));
}

TEST_CASE("zero-time trotter circuit is the identity") {
    Circuit c = build_trotter_ising(3, 0.0, 2);
    auto [mpo, w] = circuit_to_mpo(c, 16);
    CHECK(w == doctest::Approx(0.0));
    CHECK(fidelity_unitary(mpo, mpo_identity(3)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("trotter circuit builds with the advertised structure") {
    Circuit c = build_trotter_ising(5, 0.1, 3);
    CHECK(c.depth_units() == 3);
    CHECK(c.two_qubit_gate_count() == 4 * 3);
    CHECK(target_cnot_count(c) == 3 * 4 * 3);
}

TEST_CASE("qft core matches the binary-fraction formula on all basis states") {
    for (std::size_t n = 2; n <= 6; ++n) {
        Circuit c = build_qft_core(n);
        oracle::Mat u = dense_of(circuit_unitary(c));
        oracle::Mat ref = oracle::qft_core_matrix(static_cast<int>(n));
        CHECK((u - ref).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("qft builders are unitary") {
    for (std::size_t n = 2; n <= 6; ++n) {
        oracle::Mat u = dense_of(circuit_unitary(build_qft_core(n)));
        oracle::Mat g = u.adjoint() * u - oracle::Mat::Identity(u.rows(), u.cols());
        CHECK(g.cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("aqft with k_max = n reproduces the full transform") {
    for (std::size_t n = 2; n <= 5; ++n) {
        oracle::Mat full = dense_of(circuit_unitary(build_qft_core(n)));
        oracle::Mat approx = dense_of(circuit_unitary(build_aqft(n, n)));
        CHECK((full - approx).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("aqft with k_max = 2 keeps only nearest-neighbor rotations") {
    Circuit c = build_aqft(4, 2);
    CHECK(c.two_qubit_gate_count() == 3);
    for (const Gate& g : flat_gates(c))
        if (g.sites.size() == 2) {
            const auto lo = std::min(g.sites[0], g.sites[1]);
            const auto hi = std::max(g.sites[0], g.sites[1]);
            CHECK(hi - lo == 1);
        }
}

TEST_CASE("aqft cnot count formula equals the explicit enumeration") {
    for (std::size_t n = 2; n <= 12; ++n)
        for (std::size_t k = 2; k <= n; ++k) {
            Circuit c = build_aqft(n, k);
            CHECK(aqft_cnot_count(n, k) == 3 * c.two_qubit_gate_count());
        }
    CHECK(aqft_cnot_count(10, 10) == 351);
    CHECK(aqft_cnot_count(2, 2) == 3);
    for (std::size_t n = 2; n <= 12; ++n) CHECK(aqft_cnot_count(n, 2) == 3 * (n - 1));
    CHECK_THROWS_AS(aqft_cnot_count(4, 1), DomainError);
    CHECK_THROWS_AS(aqft_cnot_count(4, 5), DomainError);
}

TEST_CASE("haar circuits are unitary, layered and seed-deterministic") {
    Circuit a = build_haar_random(6, 2, 7);
    Circuit b = build_haar_random(6, 2, 7);
    Circuit c = build_haar_random(6, 2, 8);
    CHECK(gates_equivalent(a, b, 1e-15));
    CHECK(!gates_equivalent(a, c, 1e-6));
    CHECK(a.two_qubit_gate_count() == 5 * 2);
    for (const Gate& g : flat_gates(a)) CHECK(unitary_defect(g.matrix) < 1e-12);
}

TEST_CASE("layer validation rejects overlaps and bad placements") {
    Circuit c(Topology::chain(4));
    CHECK_THROWS_AS(c.add_layer({Gate::cnot(0, 1), Gate::single(1, gates::x())}), ShapeError);
    CHECK_THROWS_AS(c.add_layer({Gate::cnot(0, 2)}), TopologyError);
    CHECK_THROWS_AS(c.add_layer({Gate::single(4, gates::x())}), ShapeError);
    CHECK_THROWS_AS(c.add_layer({Gate::single(0, Tensor::matrix(2, 2, {1, 1, 0, 1}))}), DomainError);
    // two-qubit non-cnot gates may span the chain; routing handles them later
    c.add_layer({Gate::two(0, 3, gates::cphase(0.25))});
    CHECK(c.gate_count() == 1);
}

TEST_CASE("snake ordering walks the grid boustrophedon") {
    Topology g = Topology::grid(2, 2);
    CHECK(g.site_of(0, 0) == 0);
    CHECK(g.site_of(0, 1) == 1);
    CHECK(g.site_of(1, 1) == 2);
    CHECK(g.site_of(1, 0) == 3);
    CHECK(snake_order(2, 2) == std::vector<std::size_t>{0, 1, 3, 2});

    Topology g43 = Topology::grid(4, 3);
    for (std::size_t s = 0; s < 12; ++s) {
        auto [r, c] = g43.coord_of(s);
        CHECK(g43.site_of(r, c) == s);
    }
    // horizontal neighbors are chain-adjacent
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c + 1 < 3; ++c) {
            auto a = g43.site_of(r, c), b = g43.site_of(r, c + 1);
            CHECK((a < b ? b - a : a - b) == 1);
        }
}

TEST_CASE("routing a 2x3 grid step matches the direct dense simulation") {
    Circuit grid = build_trotter_ising_grid(2, 3, 0.13, 1);
    Circuit routed = route_to_chain(grid);
    for (const Gate& g : flat_gates(routed))
        if (g.sites.size() == 2) {
            const auto lo = std::min(g.sites[0], g.sites[1]);
            const auto hi = std::max(g.sites[0], g.sites[1]);
            CHECK(hi - lo == 1);
        }
    oracle::Mat direct = dense_of(circuit_unitary(grid));
    oracle::Mat chain = dense_of(circuit_unitary(routed));
    CHECK((direct - chain).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("routing preserves long-range controlled phases") {
    Circuit c = build_qft_core(5);
    Circuit routed = route_to_chain(c);
    oracle::Mat a = dense_of(circuit_unitary(c));
    oracle::Mat b = dense_of(circuit_unitary(routed));
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("identity circuit lowers to the identity MPO") {
    Circuit c = build_trotter_ising(4, 0.0, 1);
    auto [mpo, w] = circuit_to_mpo(c, 8);
    CHECK(std::abs(trace_adjoint_product(mpo, mpo_identity(4)).real() - 16.0) < 1e-9);
    CHECK(w == doctest::Approx(0.0));
}

TEST_CASE("mpo lowering of a deep trotter circuit stays accurate") {
    const std::size_t n = 6;
    Circuit c = build_trotter_ising(n, 0.1, 10);
    auto [mpo, w] = circuit_to_mpo(c, 64);
    oracle::Mat dense = dense_of(to_matrix(mpo));
    oracle::Mat exact = dense_of(circuit_unitary(c));
    CHECK(op_fidelity(exact, dense) >= 0.9999);
    CHECK(mpo.max_bond() <= 64);
}

TEST_CASE("mps lowering tracks the dense state") {
    const std::size_t n = 6;
    Circuit c = build_trotter_ising(n, 0.1, 8);
    std::size_t units_seen = 0;
    auto [psi, w] = circuit_to_mps(c, mps_product_state(n, "000000"), 64,
                                   [&](std::size_t u, const MPS&) { units_seen = u + 1; });
    CHECK(units_seen == 8);

    oracle::Vec ref = oracle::basis_state(static_cast<int>(n), "000000");
    for (const Gate& g : flat_gates(c)) {
        if (g.sites.size() == 1)
            oracle::apply_1q(ref, dense_of(g.matrix), static_cast<int>(g.sites[0]), n);
        else
            oracle::apply_2q(ref, dense_of(g.matrix), static_cast<int>(g.sites[0]),
                             static_cast<int>(g.sites[1]), n);
    }
    Tensor v = to_statevector(psi);
    cplx ov = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) ov += std::conj(ref[static_cast<long>(i)]) * v.data()[i];
    CHECK(std::norm(ov) >= 0.999999);
}

TEST_CASE("qft operator entropy is converged in the bond dimension") {
    Circuit c = build_qft_core(8);
    auto a = circuit_to_mpo(c, 128);
    auto b = circuit_to_mpo(c, 256);
    const double e128 = entanglement_entropy(a.mpo, 4);
    const double e256 = entanglement_entropy(b.mpo, 4);
    CHECK(std::abs(e128 - e256) < 1e-6);
}
