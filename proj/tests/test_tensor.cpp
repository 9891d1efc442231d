#include <doctest.h>

#include <cmath>

#include "qbrick/errors.hpp"
#include "qbrick/gates.hpp"
#include "qbrick/rng.hpp"
#include "qbrick/tensor.hpp"

using namespace qbrick;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng) {
    Tensor t(std::move(shape));
    for (cplx& v : t.values()) v = cplx(rng.normal(), rng.normal());
    return t;
}

// 30-term scaled-and-squared Taylor series, the independent reference for
// the matrix exponential.
Tensor taylor_expm(const Tensor& a) {
    const std::size_t n = a.dim(0);
    int squarings = 0;
    Tensor x = a;
    while (x.max_abs() > 0.25) {
        x *= 0.5;
        ++squarings;
    }
    Tensor result = Tensor::identity(n);
    Tensor term = Tensor::identity(n);
    for (int k = 1; k <= 30; ++k) {
        term = matmul(term, x);
        term *= 1.0 / k;
        result = result + term;
    }
    for (int i = 0; i < squarings; ++i) result = matmul(result, result);
    return result;
}

double max_diff(const Tensor& a, const Tensor& b) { return (a - b).max_abs(); }

} // namespace

TEST_CASE("contract: identity leaves a vector unchanged") {
    Tensor v({2}, {cplx(0.3, 0.1), cplx(-0.7, 2.0)});
    Tensor r = contract(Tensor::identity(2), v, {{1, 0}});
    CHECK(max_diff(r, v) == doctest::Approx(0.0));
}

TEST_CASE("contract: pauli involution gives the identity") {
    Tensor r = contract(gates::x(), gates::x(), {{1, 0}});
    CHECK(max_diff(r, Tensor::identity(2)) < 1e-15);
}

TEST_CASE("contract matches the naive loop oracle") {
    Rng rng(11);
    Tensor a = random_tensor({2, 3, 4}, rng);
    Tensor b = random_tensor({4, 5}, rng);
    Tensor r = contract(a, b, {{2, 0}});
    REQUIRE(r.shape() == std::vector<std::size_t>{2, 3, 5});
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t l = 0; l < 5; ++l) {
                cplx s = 0.0;
                for (std::size_t k = 0; k < 4; ++k) s += a.at({i, j, k}) * b.at({k, l});
                CHECK(std::abs(r.at({i, j, l}) - s) < 1e-12);
            }
}

TEST_CASE("contract: multi-axis pairs agree with the loop oracle") {
    Rng rng(12);
    Tensor a = random_tensor({3, 4, 2}, rng);
    Tensor b = random_tensor({2, 5, 3}, rng);
    // contract a0-b2 and a2-b0
    Tensor r = contract(a, b, {{0, 2}, {2, 0}});
    REQUIRE(r.shape() == std::vector<std::size_t>{4, 5});
    for (std::size_t j = 0; j < 4; ++j)
        for (std::size_t m = 0; m < 5; ++m) {
            cplx s = 0.0;
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t k = 0; k < 2; ++k) s += a.at({i, j, k}) * b.at({k, m, i});
            CHECK(std::abs(r.at({j, m}) - s) < 1e-12);
        }
}

TEST_CASE("contract rejects mismatched axes") {
    Tensor a({2, 3});
    Tensor b({2, 2});
    CHECK_THROWS_AS(contract(a, b, {{1, 0}}), ShapeError);
}

TEST_CASE("svd: identity and diagonal spectra") {
    SvdResult r = svd(Tensor::identity(4));
    for (double s : r.s) CHECK(s == doctest::Approx(1.0));

    Tensor d = Tensor::matrix(2, 2, {3, 0, 0, 0});
    SvdResult rd = svd(d);
    CHECK(rd.s[0] == doctest::Approx(3.0));
    CHECK(rd.s[1] == doctest::Approx(0.0));
}

TEST_CASE("svd of the CNOT matrix matches the eigenvalue oracle") {
    Tensor c = gates::cnot();
    SvdResult r = svd(c);
    // reference: sqrt of eigenvalues of c^dag c
    Tensor g = matmul(dagger(c), c);
    // c is unitary, so all singular values are exactly 1
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(g.at({i, i}) - cplx(1.0)) < 1e-14);
    for (double s : r.s) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("svd/lq invariants on seeded random matrices") {
    Rng rng(202);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t rows = 1 + static_cast<std::size_t>(rng.uniform() * 32);
        const std::size_t cols = 1 + static_cast<std::size_t>(rng.uniform() * 32);
        Tensor m = random_tensor({rows, cols}, rng);
        const double scale = std::max(m.norm(), 1e-30);

        SvdResult r = svd(m);
        for (std::size_t i = 0; i + 1 < r.s.size(); ++i) CHECK(r.s[i] >= r.s[i + 1]);
        for (double s : r.s) CHECK(s >= 0.0);
        CHECK(unitary_defect(r.u) < 1e-12);            // u^dag u = 1
        CHECK(unitary_defect(dagger(r.vh)) < 1e-12);   // vh vh^dag = 1
        Tensor sv({r.s.size(), r.vh.dim(1)});
        for (std::size_t i = 0; i < r.s.size(); ++i)
            for (std::size_t j = 0; j < r.vh.dim(1); ++j)
                sv.at({i, j}) = r.s[i] * r.vh.at({i, j});
        CHECK(max_diff(matmul(r.u, sv), m) / scale < 1e-10);

        auto [l, q] = lq(m);
        CHECK(unitary_defect(dagger(q)) < 1e-12); // q q^dag = 1
        CHECK(max_diff(matmul(l, q), m) / scale < 1e-10);
        // l lower-triangular with real non-negative diagonal
        for (std::size_t i = 0; i < l.dim(0); ++i)
            for (std::size_t j = 0; j < l.dim(1); ++j) {
                if (j > i) CHECK(std::abs(l.at({i, j})) < 1e-12);
                if (j == i) {
                    CHECK(l.at({i, j}).imag() == doctest::Approx(0.0).epsilon(1e-12));
                    CHECK(l.at({i, j}).real() >= -1e-12);
                }
            }
    }
}

TEST_CASE("lq: identity and row-vector norm factorization") {
    auto [l, q] = lq(Tensor::identity(2));
    CHECK(max_diff(l, Tensor::identity(2)) < 1e-12);
    CHECK(max_diff(q, Tensor::identity(2)) < 1e-12);

    Tensor row = Tensor::matrix(1, 2, {3, 4});
    auto [lr, qr_] = lq(row);
    CHECK(lr.at({0, 0}).real() == doctest::Approx(5.0));
    CHECK(qr_.at({0, 0}).real() == doctest::Approx(0.6));
    CHECK(qr_.at({0, 1}).real() == doctest::Approx(0.8));
}

TEST_CASE("qr reconstructs and is column-isometric") {
    Rng rng(7);
    Tensor m = random_tensor({5, 3}, rng);
    auto [q, r] = qr(m);
    CHECK(unitary_defect(q) < 1e-12);
    CHECK(max_diff(matmul(q, r), m) < 1e-10);
}

TEST_CASE("expm_antihermitian: zero, pauli rotation, series oracle") {
    Tensor zero({2, 2});
    CHECK(max_diff(expm_antihermitian(zero), Tensor::identity(2)) < 1e-15);

    // a = i (pi/2) sx  ->  i sx
    const double th = M_PI / 2;
    Tensor a = gates::x() * cplx(0.0, th);
    Tensor w = expm_antihermitian(a);
    Tensor expect = gates::x() * cplx(0.0, 1.0);
    CHECK(max_diff(w, expect) < 1e-14);

    Rng rng(31);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = (rep % 2 == 0) ? 2 : 4;
        Tensor g = random_tensor({n, n}, rng);
        Tensor ah({n, n});
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                ah.at({i, j}) = 0.5 * (g.at({i, j}) - std::conj(g.at({j, i})));
        Tensor fast = expm_antihermitian(ah);
        Tensor ref = taylor_expm(ah);
        CHECK(max_diff(fast, ref) < 1e-12);
        CHECK(unitary_defect(fast) < 1e-12);
    }
}

TEST_CASE("expm_antihermitian rejects non-anti-Hermitian input") {
    Tensor m = Tensor::matrix(2, 2, {1, 0, 0, 1});
    CHECK_THROWS_AS(expm_antihermitian(m), DomainError);
}

TEST_CASE("haar gates are unitary and seed-deterministic") {
    Rng a(99), b(99);
    Tensor ga = gates::random_unitary(4, a);
    Tensor gb = gates::random_unitary(4, b);
    CHECK(unitary_defect(ga) < 1e-12);
    CHECK(max_diff(ga, gb) == 0.0);
}

TEST_CASE("kron and reshape round trips") {
    Tensor g = kron(gates::x(), gates::z());
    CHECK(g.at({0, 2}).real() == doctest::Approx(1.0));
    CHECK(g.at({1, 3}).real() == doctest::Approx(-1.0));

    Rng rng(5);
    Tensor t = random_tensor({2, 6}, rng);
    Tensor u = t.reshaped({3, 4}).transposed({1, 0}).transposed({1, 0}).reshaped({2, 6});
    CHECK(max_diff(t, u) == 0.0);
}
