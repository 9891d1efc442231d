#include <doctest.h>

#include <sstream>

#include "oracle/dense_sim.hpp"
#include "qbrick/ansatz.hpp"
#include "qbrick/circuit.hpp"
#include "qbrick/errors.hpp"
#include "qbrick/gates.hpp"
#include "qbrick/qasm.hpp"
#include "qbrick/serialize.hpp"

using namespace qbrick;

namespace {

oracle::Mat dense_of(const Tensor& t) {
    oracle::Mat m(t.dim(0), t.dim(1));
    for (std::size_t i = 0; i < t.dim(0); ++i)
        for (std::size_t j = 0; j < t.dim(1); ++j) m(i, j) = t.at({i, j});
    return m;
}

} // namespace

TEST_CASE("bell circuit emits a four-line body") {
    Circuit c(Topology::chain(2));
    c.add_layer({Gate::single(0, gates::h())});
    c.add_layer({Gate::cnot(0, 1)});
    c.end_unit();
    const std::string text = to_qasm(c);
    CHECK(text == "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\nh q[0];\ncx q[0],q[1];\n");
}

TEST_CASE("ansatz export counts gates as advertised") {
    BrickWallAnsatz a = BrickWallAnsatz::build(Topology::chain(3), 1, AnsatzInit::NearIdentity, 0.01, 5);
    Circuit c = a.to_circuit();
    CHECK(a.n_cnot() == 2);
    CHECK(c.gate_count() == 2 * a.n_cnot() + 3 + a.n_cnot());

    const std::string text = to_qasm(a);
    std::size_t cx = 0, u3 = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("cx", 0) == 0) ++cx;
        if (line.rfind("u3", 0) == 0) ++u3;
    }
    CHECK(cx == a.n_cnot());
    CHECK(u3 == 2 * a.n_cnot() + 3);
}

TEST_CASE("qasm round trip reproduces random ansatz gate lists") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const std::size_t n = 2 + seed % 4;
        const std::size_t d = 1 + seed % 3;
        BrickWallAnsatz a = BrickWallAnsatz::build(Topology::chain(n), d, AnsatzInit::Seeded, 0.0, seed);
        Circuit original = a.to_circuit();
        Circuit reparsed = from_qasm(to_qasm(original));
        CHECK(gates_equivalent(original, reparsed, 1e-9));
    }
}

TEST_CASE("structured two-qubit gates survive the round trip exactly") {
    Circuit c = build_trotter_ising(3, 0.17, 1);
    Circuit back = from_qasm(to_qasm(c));
    oracle::Mat a = dense_of(circuit_unitary(c));
    oracle::Mat b = dense_of(circuit_unitary(back));
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12); // zz form is phase-exact

    Circuit qft = build_aqft(4, 3);
    Circuit qback = from_qasm(to_qasm(qft));
    oracle::Mat qa = dense_of(circuit_unitary(qft));
    oracle::Mat qb = dense_of(circuit_unitary(qback));
    CHECK((qa - qb).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("haar gates cannot be exported to qasm 2") {
    Circuit c = build_haar_random(3, 1, 1);
    CHECK_THROWS_AS(to_qasm(c), UnsupportedGateError);
}

TEST_CASE("parser handles pi expressions and rejects junk") {
    const std::string text =
        "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\nu1(pi/4) q[0];\ncu1(-pi/2) q[0],q[1];\n"
        "rz(3*pi/4) q[1];\n";
    Circuit c = from_qasm(text);
    CHECK(c.gate_count() == 3);
    const auto gs = flat_gates(c);
    CHECK(std::abs(gs[0].matrix.at({1, 1}) - std::exp(cplx(0, M_PI / 4))) < 1e-12);
    CHECK(std::abs(gs[1].matrix.at({3, 3}) - std::exp(cplx(0, -M_PI / 2))) < 1e-12);

    CHECK_THROWS_AS(from_qasm("OPENQASM 2.0;\nqreg q[2];\nfibble q[0];\n"), IoError);
    CHECK_THROWS_AS(from_qasm("OPENQASM 2.0;\nh q[0];\n"), IoError); // no qreg
}

TEST_CASE("circuit json round trip is exact") {
    Circuit c = build_trotter_ising(4, 0.1, 2);
    const std::string j = circuit_to_json(c);
    Circuit back = circuit_from_json(j);
    CHECK(back.n() == 4);
    CHECK(back.meta().family == "ising");
    CHECK(back.meta().tau == doctest::Approx(0.1));
    CHECK(back.unit_ends() == c.unit_ends());
    CHECK(gates_equivalent(c, back, 1e-15));
    CHECK(circuit_to_json(back) == j); // byte-stable

    Circuit haar = build_haar_random(4, 2, 17);
    CHECK(gates_equivalent(haar, circuit_from_json(circuit_to_json(haar)), 1e-15));

    Circuit grid = build_trotter_ising_grid(2, 3, 0.1, 1);
    Circuit gback = circuit_from_json(circuit_to_json(grid));
    CHECK(gback.topology().kind == Topology::Kind::Grid);
    CHECK(gates_equivalent(grid, gback, 1e-15));

    CHECK_THROWS_AS(circuit_from_json("{\"format\":\"nope\"}"), IoError);
}

TEST_CASE("mps/mpo binary files round trip") {
    MPS psi = mps_product_state(3, "010");
    psi.apply_gate_inplace(gates::h(), std::vector<std::size_t>{0});
    psi.apply_gate_inplace(gates::cnot(), std::vector<std::size_t>{0, 1});
    save_mps(psi, "test_roundtrip.qmps");
    MPS back = load_mps("test_roundtrip.qmps");
    CHECK(back.size() == 3);
    CHECK(std::abs(inner(psi, back) - cplx(1.0)) < 1e-14);
    CHECK(back.canonical() == psi.canonical());

    auto [mpo, w] = circuit_to_mpo(build_trotter_ising(3, 0.2, 2), 16);
    save_mpo(mpo, "test_roundtrip.qmpo");
    MPO mback = load_mpo("test_roundtrip.qmpo");
    CHECK(std::abs(trace_adjoint_product(mpo, mback).real() - mpo.hs_norm_sq()) < 1e-9);

    CHECK_THROWS_AS(load_mps("test_roundtrip.qmpo"), IoError);
    CHECK_THROWS_AS(load_mps("no_such_file.qmps"), IoError);
}
