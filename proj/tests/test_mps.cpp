#include <doctest.h>

#include <cmath>

#include "oracle/dense_sim.hpp"
#include "qbrick/errors.hpp"
#include "qbrick/gates.hpp"
#include "qbrick/mps.hpp"
#include "qbrick/rng.hpp"

using namespace qbrick;

namespace {

oracle::Mat to_eigen(const Tensor& t) {
    oracle::Mat m(t.dim(0), t.dim(1));
    for (std::size_t i = 0; i < t.dim(0); ++i)
        for (std::size_t j = 0; j < t.dim(1); ++j) m(i, j) = t.at({i, j});
    return m;
}

oracle::Vec to_eigen_vec(const Tensor& t) {
    oracle::Vec v(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) v[i] = t.data()[i];
    return v;
}

// One random brick-wall layer pair applied to both representations.
void random_layers(int n, int depth, Rng& rng, MPS& psi, oracle::Vec& dense) {
    for (int d = 0; d < depth; ++d) {
        for (int off = 0; off < 2; ++off) {
            for (int s = off; s + 1 < n; s += 2) {
                Tensor g = gates::random_unitary(4, rng);
                psi.apply_gate_inplace(g, std::vector<std::size_t>{std::size_t(s), std::size_t(s + 1)});
                oracle::apply_2q(dense, to_eigen(g), s, s + 1, n);
            }
        }
    }
}

double fidelity(const oracle::Vec& a, const oracle::Vec& b) {
    return std::norm(a.dot(b)) / (a.squaredNorm() * b.squaredNorm());
}

} // namespace

TEST_CASE("product state basics") {
    CHECK_THROWS_AS(MPS::product_state(1, "0"), DomainError);
    CHECK_THROWS_AS(MPS::product_state(3, "00"), ShapeError);

    MPS psi = mps_product_state(2, "00");
    CHECK(psi.norm() == doctest::Approx(1.0));
    CHECK(psi.max_bond() == 1);
    CHECK(entanglement_entropy(psi, 1) == doctest::Approx(0.0));

    MPS psi3 = mps_product_state(3, "010");
    CHECK(expect_local(psi3, gates::z(), {1}) == doctest::Approx(-1.0));

    MPS psi4 = mps_product_state(4, "0000");
    oracle::Vec dense = oracle::basis_state(4, "0000");
    CHECK(std::abs(to_eigen_vec(to_statevector(psi4)).dot(dense) - cplx(1.0)) < 1e-12);
}

TEST_CASE("identity MPO basics") {
    MPO id3 = mpo_identity(3);
    CHECK(id3.hs_norm_sq() == doctest::Approx(8.0));

    MPO id2 = mpo_identity(2);
    CHECK(id2.hs_norm_sq() == doctest::Approx(4.0));

    MPO id5 = mpo_identity(5);
    Tensor dense = to_matrix(id5);
    for (std::size_t i = 0; i < 32; ++i)
        for (std::size_t j = 0; j < 32; ++j)
            CHECK(std::abs(dense.at({i, j}) - (i == j ? cplx(1.0) : cplx(0.0))) < 1e-14);

    // identity leaves a random state invariant
    Rng rng(17);
    MPS psi = mps_product_state(3, "000");
    oracle::Vec dense_psi = oracle::basis_state(3, "000");
    random_layers(3, 1, rng, psi, dense_psi);
    MPS applied = apply_mpo(mpo_identity(3), psi);
    CHECK(std::abs(inner(psi, applied) - cplx(1.0)) < 1e-10);
}

TEST_CASE("gate application on computational states") {
    MPS psi = mps_product_state(2, "00");
    psi.apply_gate_inplace(gates::x(), {std::vector<std::size_t>{0}});
    CHECK(std::abs(to_statevector(psi).at({2}) - cplx(1.0)) < 1e-14); // |10>

    psi.apply_gate_inplace(gates::cnot(), std::vector<std::size_t>{0, 1});
    CHECK(std::abs(to_statevector(psi).at({3}) - cplx(1.0)) < 1e-14); // |11>
}

TEST_CASE("bell state: entropy is one bit and schmidt values are equal") {
    MPS psi = mps_product_state(2, "00");
    psi.apply_gate_inplace(gates::h(), std::vector<std::size_t>{0});
    psi.apply_gate_inplace(gates::cnot(), std::vector<std::size_t>{0, 1});
    CHECK(entanglement_entropy(psi, 1) == doctest::Approx(1.0).epsilon(1e-10));

    MPS c = canonicalize(psi);
    auto sv = schmidt_values(c, 1);
    REQUIRE(sv.size() == 2);
    CHECK(sv[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(sv[1] == doctest::Approx(1.0 / std::sqrt(2.0)));

    CHECK(expect_local(psi, kron(gates::z(), gates::z()), {0, 1}) == doctest::Approx(1.0));
    CHECK(expect_local(psi, gates::z(), {0}) == doctest::Approx(0.0));
}

TEST_CASE("non-adjacent two-qubit application is a topology error") {
    MPS psi = mps_product_state(3, "000");
    CHECK_THROWS_AS(psi.apply_gate_inplace(gates::cnot(), std::vector<std::size_t>{0, 2}),
                    TopologyError);
}

TEST_CASE("reversed site order is handled by gate reordering") {
    // cnot with control on the higher site: |01> -> |11>
    MPS psi = mps_product_state(2, "01");
    psi.apply_gate_inplace(gates::cnot(), std::vector<std::size_t>{1, 0});
    CHECK(std::abs(to_statevector(psi).at({3}) - cplx(1.0)) < 1e-14);
}

TEST_CASE("canonicalize preserves the state and produces right isometries") {
    MPS prod = mps_product_state(3, "010");
    MPS c = canonicalize(prod);
    CHECK(std::abs(inner(prod, c) - cplx(1.0)) < 1e-12);

    Rng rng(23);
    MPS psi = mps_product_state(6, "000000");
    oracle::Vec dense = oracle::basis_state(6, "000000");
    random_layers(6, 2, rng, psi, dense);
    Tensor before = to_statevector(psi);
    psi.canonicalize_inplace();
    Tensor after = to_statevector(psi);
    CHECK((before - after).max_abs() < 1e-10);
    CHECK(psi.canonical() == Canonical::Right);

    // right-isometry condition on every site except the first
    for (std::size_t j = 1; j < psi.size(); ++j) {
        const Tensor& t = psi.site(j);
        Tensor m = t.reshaped({t.dim(0), t.dim(1) * t.dim(2)});
        Tensor g = matmul(m, dagger(m));
        CHECK((g - Tensor::identity(t.dim(0))).max_abs() < 1e-10);
    }
}

TEST_CASE("truncate: bell state cases") {
    MPS bell = mps_product_state(2, "00");
    bell.apply_gate_inplace(gates::h(), std::vector<std::size_t>{0});
    bell.apply_gate_inplace(gates::cnot(), std::vector<std::size_t>{0, 1});
    bell.canonicalize_inplace();

    auto [kept, w2] = truncate(bell, 2);
    CHECK(w2 == doctest::Approx(0.0));

    bell.canonicalize_inplace();
    auto [cut1, w1] = truncate(std::move(bell), 1);
    CHECK(w1 == doctest::Approx(0.5));
    CHECK(cut1.norm() == doctest::Approx(1.0)); // renormalized
    CHECK(cut1.max_bond() == 1);
}

TEST_CASE("truncate keeps fidelity within the discarded-weight bound") {
    Rng rng(41);
    const int n = 6;
    MPS psi = mps_product_state(n, "000000");
    oracle::Vec dense = oracle::basis_state(n, "000000");
    random_layers(n, 2, rng, psi, dense);

    psi.canonicalize_inplace();
    double w = psi.truncate_inplace(8);
    CHECK(psi.max_bond() <= 8);
    const double f = fidelity(to_eigen_vec(to_statevector(psi)), dense);
    CHECK(f >= 1.0 - 10.0 * w);
    CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("truncate requires right-canonical input and a positive cap") {
    MPS psi = mps_product_state(2, "00");
    psi.apply_gate_inplace(gates::h(), std::vector<std::size_t>{0});
    CHECK_THROWS_AS(psi.truncate_inplace(4), DomainError);
    psi.canonicalize_inplace();
    CHECK_THROWS_AS(psi.truncate_inplace(0), DomainError);
}

TEST_CASE("canonicalize+truncate is idempotent at fixed cap") {
    Rng rng(57);
    const int n = 6;
    MPS psi = mps_product_state(n, "000000");
    oracle::Vec dense = oracle::basis_state(n, "000000");
    random_layers(n, 3, rng, psi, dense);

    psi.canonicalize_inplace();
    psi.truncate_inplace(6);
    psi.canonicalize_inplace();
    const double w2 = psi.truncate_inplace(6);
    CHECK(std::abs(w2) < 1e-12);
}

TEST_CASE("inner products match the dense oracle") {
    CHECK(std::abs(inner(mps_product_state(2, "00"), mps_product_state(2, "00")) - cplx(1.0)) < 1e-14);
    CHECK(std::abs(inner(mps_product_state(2, "00"), mps_product_state(2, "11"))) < 1e-14);

    Rng rng(71);
    const int n = 5;
    MPS a = mps_product_state(n, "00000");
    oracle::Vec da = oracle::basis_state(n, "00000");
    random_layers(n, 2, rng, a, da);
    MPS b = mps_product_state(n, "00000");
    oracle::Vec db = oracle::basis_state(n, "00000");
    random_layers(n, 2, rng, b, db);

    const cplx lhs = inner(a, b);
    const cplx rhs = da.dot(db); // Eigen dot conjugates the first argument
    CHECK(std::abs(lhs - rhs) < 1e-10);
}

TEST_CASE("trace_adjoint_product matches dense traces") {
    CHECK(trace_adjoint_product(mpo_identity(3), mpo_identity(3)).real() == doctest::Approx(8.0));

    MPO flipped = mpo_identity(3);
    flipped.apply_gate_inplace(gates::x(), std::vector<std::size_t>{0});
    CHECK(std::abs(trace_adjoint_product(mpo_identity(3), flipped)) < 1e-12);

    Rng rng(83);
    const int n = 4;
    MPO a = mpo_identity(n);
    MPO b = mpo_identity(n);
    oracle::Mat da = oracle::Mat::Identity(16, 16), db = da;
    for (int s = 0; s + 1 < n; s += 2) {
        Tensor g = gates::random_unitary(4, rng);
        a.apply_gate_inplace(g, std::vector<std::size_t>{std::size_t(s), std::size_t(s + 1)});
        da = oracle::embed_2q(to_eigen(g), s, s + 1, n) * da;
        Tensor g2 = gates::random_unitary(4, rng);
        b.apply_gate_inplace(g2, std::vector<std::size_t>{std::size_t(s), std::size_t(s + 1)});
        db = oracle::embed_2q(to_eigen(g2), s, s + 1, n) * db;
    }
    const cplx lhs = trace_adjoint_product(a, b);
    const cplx rhs = (da.adjoint() * db).trace();
    CHECK(std::abs(lhs - rhs) < 1e-9);
}

TEST_CASE("operator entanglement of CNOT is one bit") {
    MPO op = mpo_identity(2);
    op.apply_gate_inplace(gates::cnot(), std::vector<std::size_t>{0, 1});
    CHECK(entanglement_entropy(op, 1) == doctest::Approx(1.0).epsilon(1e-10));

    const double dense_ee = oracle::operator_entropy_bits(to_eigen(to_matrix(op)), 1, 2);
    CHECK(dense_ee == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("MPO canonicalization keeps the represented operator and its norm") {
    Rng rng(91);
    const int n = 4;
    MPO op = mpo_identity(n);
    oracle::Mat dense = oracle::Mat::Identity(16, 16);
    for (int d = 0; d < 2; ++d)
        for (int off = 0; off < 2; ++off)
            for (int s = off; s + 1 < n; s += 2) {
                Tensor g = gates::random_unitary(4, rng);
                op.apply_gate_inplace(g, std::vector<std::size_t>{std::size_t(s), std::size_t(s + 1)});
                dense = oracle::embed_2q(to_eigen(g), s, s + 1, n) * dense;
            }
    op.canonicalize_inplace();
    CHECK(op.hs_norm_sq() == doctest::Approx(16.0).epsilon(1e-8));
    CHECK((to_eigen(to_matrix(op)) - dense).cwiseAbs().maxCoeff() < 1e-9);

    op.truncate_inplace(16);
    CHECK(op.hs_norm_sq() == doctest::Approx(16.0).epsilon(1e-8));

    // canonical-form site scaling: sum over (phys, right) legs gives 2 * I
    op.canonicalize_inplace();
    const Tensor& last = op.site(n - 1);
    Tensor m = last.reshaped({last.dim(0), 4});
    Tensor g2 = matmul(m, dagger(m));
    CHECK((g2 - Tensor::identity(last.dim(0)) * cplx(2.0)).max_abs() < 1e-10);
}

TEST_CASE("state entropies match the dense oracle across cuts") {
    Rng rng(101);
    const int n = 6;
    MPS psi = mps_product_state(n, "000000");
    oracle::Vec dense = oracle::basis_state(n, "000000");
    random_layers(n, 2, rng, psi, dense);

    for (int cut = 1; cut < n; ++cut) {
        const double lhs = entanglement_entropy(psi, std::size_t(cut));
        const double rhs = oracle::state_entropy_bits(dense, cut, n);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
        const double bound = std::min(cut, n - cut);
        CHECK(lhs <= bound + 1e-9);
    }
    CHECK_THROWS_AS(entanglement_entropy(psi, 0), DomainError);
    CHECK_THROWS_AS(entanglement_entropy(psi, 6), DomainError);
}

TEST_CASE("expect_local validates input and matches dense values") {
    MPS psi = mps_product_state(2, "00");
    CHECK(expect_local(psi, kron(gates::z(), gates::z()), {0, 1}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(expect_local(psi, Tensor::matrix(2, 2, {0, 1, 0, 0}), {0}), DomainError);

    Rng rng(113);
    const int n = 4;
    MPS s = mps_product_state(n, "0000");
    oracle::Vec dense = oracle::basis_state(n, "0000");
    random_layers(n, 2, rng, s, dense);

    oracle::Vec zz = dense;
    oracle::Mat zzm = to_eigen(kron(gates::z(), gates::z()));
    oracle::apply_2q(zz, zzm, 1, 2, n);
    const double expect_dense = dense.dot(zz).real() / dense.squaredNorm();
    CHECK(expect_local(s, kron(gates::z(), gates::z()), {1, 2}) ==
          doctest::Approx(expect_dense).epsilon(1e-9));
}

TEST_CASE("mps serialization survives gate application round trips") {
    // exercised further in the serialization tests; here we only confirm
    // apply_gate purity: the input value is unchanged
    MPS psi = mps_product_state(2, "00");
    MPS out = apply_gate(psi, gates::x(), {0});
    CHECK(std::abs(inner(psi, mps_product_state(2, "00")) - cplx(1.0)) < 1e-14);
    CHECK(std::abs(inner(out, mps_product_state(2, "10")) - cplx(1.0)) < 1e-14);
}
