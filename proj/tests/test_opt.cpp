#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "oracle/dense_sim.hpp"
#include "qbrick/ansatz.hpp"
#include "qbrick/circuit.hpp"
#include "qbrick/errors.hpp"
#include "qbrick/gates.hpp"
#include "qbrick/loss.hpp"
#include "qbrick/optimize.hpp"
#include "qbrick/rng.hpp"

using namespace qbrick;

namespace {

oracle::Mat dense_of(const Tensor& t) {
    oracle::Mat m(t.dim(0), t.dim(1));
    for (std::size_t i = 0; i < t.dim(0); ++i)
        for (std::size_t j = 0; j < t.dim(1); ++j) m(i, j) = t.at({i, j});
    return m;
}

Tensor random_matrix(std::size_t n, Rng& rng) {
    Tensor t({n, n});
    for (cplx& v : t.values()) v = cplx(rng.normal(), rng.normal());
    return t;
}

double inner_re(const Tensor& a, const Tensor& b) {
    // Re Tr[a^dag b]
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a.data()[i]) * b.data()[i];
    return s.real();
}

} // namespace

TEST_CASE("loss vanishes when the ansatz equals the target") {
    BrickWallAnsatz a = BrickWallAnsatz::build(Topology::chain(3), 2, AnsatzInit::Identity);
    auto built = circuit_to_mpo(a.to_circuit(), 64);
    LossSpec spec = LossSpec::unitary(built.mpo);
    CHECK(loss_value(spec, a) == doctest::Approx(0.0).epsilon(1e-9));

    // stationarity: projected gradients vanish at the global minimum
    auto grads = gradient(spec, a);
    for (std::size_t g = 0; g < grads.size(); ++g) {
        Tensor p = project_to_tangent(a.param(g), grads[g]);
        CHECK(p.max_abs() < 1e-8);
    }
}

TEST_CASE("orthogonal state targets give loss 2") {
    // target |111>, ansatz near-identity on |000>: overlap ~ 0
    BrickWallAnsatz a = BrickWallAnsatz::build(Topology::chain(3), 1, AnsatzInit::Identity);
    LossSpec spec = LossSpec::state(mps_product_state(3, "111"), mps_product_state(3, "000"));
    // bare cnot layers keep |000> = |000>
    CHECK(loss_value(spec, a) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("unitary-mode loss matches the dense formula") {
    const std::size_t n = 4;
    Circuit trotter = build_trotter_ising(n, 0.1, 3);
    auto built = circuit_to_mpo(trotter, 256);
    LossSpec spec = LossSpec::unitary(built.mpo);

    BrickWallAnsatz a = BrickWallAnsatz::build(Topology::chain(n), 2, AnsatzInit::Seeded, 0.0, 11);
    const double lhs = loss_value(spec, a);

    oracle::Mat ut = dense_of(circuit_unitary(trotter));
    oracle::Mat ua = dense_of(circuit_unitary(a.to_circuit()));
    const double rhs = 2.0 * 16.0 - 2.0 * (ut.adjoint() * ua).trace().real();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
}

TEST_CASE("state-mode loss matches the dense formula") {
    const std::size_t n = 4;
    Circuit trotter = build_trotter_ising(n, 0.1, 5);
    auto built = circuit_to_mps(trotter, mps_product_state(n, "0000"), 256);
    LossSpec spec = LossSpec::state(built.mps, mps_product_state(n, "0000"));

    BrickWallAnsatz a = BrickWallAnsatz::build(Topology::chain(n), 2, AnsatzInit::NearIdentity, 0.2, 3);
    const double lhs = loss_value(spec, a);

    oracle::Vec target = oracle::basis_state(n, "0000");
    for (const Gate& g : flat_gates(trotter)) {
        if (g.sites.size() == 1)
            oracle::apply_1q(target, dense_of(g.matrix), static_cast<int>(g.sites[0]), n);
        else
            oracle::apply_2q(target, dense_of(g.matrix), static_cast<int>(g.sites[0]),
                             static_cast<int>(g.sites[1]), n);
    }
    oracle::Vec out = oracle::basis_state(n, "0000");
    for (const Gate& g : flat_gates(a.to_circuit())) {
        if (g.sites.size() == 1)
            oracle::apply_1q(out, dense_of(g.matrix), static_cast<int>(g.sites[0]), n);
        else
            oracle::apply_2q(out, dense_of(g.matrix), static_cast<int>(g.sites[0]),
                             static_cast<int>(g.sites[1]), n);
    }
    const double rhs = 2.0 - 2.0 * target.dot(out).real();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
}

TEST_CASE("fidelity metrics") {
    MPS x = mps_product_state(3, "010");
    CHECK(fidelity_state(x, x) == doctest::Approx(1.0));
    CHECK(fidelity_state(mps_product_state(3, "000"), mps_product_state(3, "100")) ==
          doctest::Approx(0.0));

    MPO id = mpo_identity(3);
    CHECK(fidelity_unitary(id, id) == doctest::Approx(1.0));
    MPO flipped = apply_gate(id, gates::x(), {0});
    CHECK(fidelity_unitary(id, flipped) == doctest::Approx(0.0));

    // global phase invariance
    MPO phased = id;
    phased.apply_gate_inplace(Tensor::identity(2) * std::exp(cplx(0.0, 0.7)),
                              std::vector<std::size_t>{1});
    CHECK(fidelity_unitary(id, phased) == doctest::Approx(1.0));
}

TEST_CASE("gradients match central finite differences in both modes") {
    const std::size_t n = 4;
    Rng rng(77);
    const double delta = 1e-5;

    for (int mode = 0; mode < 2; ++mode) {
        LossSpec spec;
        if (mode == 0) {
            auto built = circuit_to_mpo(build_trotter_ising(n, 0.1, 4), 256);
            spec = LossSpec::unitary(built.mpo);
        } else {
            auto built = circuit_to_mps(build_trotter_ising(n, 0.1, 6), mps_product_state(n, "0000"), 256);
            spec = LossSpec::state(built.mps, mps_product_state(n, "0000"));
        }
        BrickWallAnsatz a =
            BrickWallAnsatz::build(Topology::chain(n), 2, AnsatzInit::Seeded, 0.0, 19 + mode);
        const auto grads = gradient(spec, a);
        REQUIRE(grads.size() == a.param_count());

        for (std::size_t g = 0; g < a.param_count(); ++g) {
            const Tensor h = random_matrix(2, rng);
            BrickWallAnsatz ap = a, am = a;
            ap.set_param(g, a.param(g) + h * cplx(delta));
            am.set_param(g, a.param(g) - h * cplx(delta));
            const double fd = (loss_value(spec, ap) - loss_value(spec, am)) / (2.0 * delta);
            const double an = 2.0 * inner_re(grads[g], h);
            const double scale = std::max(std::abs(fd), std::abs(an));
            if (scale > 1e-8) CHECK(std::abs(fd - an) / scale < 1e-4);
        }
    }
}

TEST_CASE("tangent projection identities") {
    Rng rng(5);
    Tensor u = gates::random_unitary(2, rng);

    // radial direction projects to zero
    CHECK(project_to_tangent(u, u).max_abs() < 1e-14);

    // tangent fixed point: grad = u a with a anti-Hermitian
    Tensor g = random_matrix(2, rng);
    Tensor a({2, 2});
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) a.at({i, j}) = 0.5 * (g.at({i, j}) - std::conj(g.at({j, i})));
    Tensor p = project_to_tangent(u, matmul(u, a));
    CHECK((p - a).max_abs() < 1e-13);

    // anti-Hermiticity and idempotence on random input
    for (int rep = 0; rep < 20; ++rep) {
        Tensor grad = random_matrix(2, rng);
        Tensor pr = project_to_tangent(u, grad);
        CHECK(antihermitian_defect(pr) < 1e-13);
        Tensor again = project_to_tangent(u, matmul(u, pr));
        CHECK((again - pr).max_abs() < 1e-13);
    }
}

TEST_CASE("retraction stays unitary and matches the closed form") {
    Tensor u = Tensor::identity(2);
    Tensor step = gates::z() * cplx(0.0, 0.3);
    CHECK((retract(u, step, 0.0) - u).max_abs() == 0.0);

    Tensor moved = retract(u, step, 1.0);
    CHECK(std::abs(moved.at({0, 0}) - std::exp(cplx(0.0, -0.3))) < 1e-14);
    CHECK(std::abs(moved.at({1, 1}) - std::exp(cplx(0.0, 0.3))) < 1e-14);

    CHECK_THROWS_AS(retract(u, Tensor::identity(2), 1.0), DomainError);

    Rng rng(9);
    Tensor w = gates::random_unitary(2, rng);
    for (int rep = 0; rep < 10000; ++rep) {
        Tensor g = random_matrix(2, rng);
        Tensor p = project_to_tangent(w, g);
        w = retract(w, p, 1e-2);
    }
    CHECK(unitary_defect(w) < 1e-10);
}

TEST_CASE("adam first step and moment invariants") {
    Rng rng(13);
    OptimizerState st = OptimizerState::fresh(1);

    // zero gradients leave parameters untouched
    auto steps0 = adam_step(st, {Tensor({2, 2})});
    CHECK(steps0[0].max_abs() == 0.0);

    st = OptimizerState::fresh(1);
    Tensor g = random_matrix(2, rng);
    Tensor ah({2, 2});
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            ah.at({i, j}) = 0.5 * (g.at({i, j}) - std::conj(g.at({j, i})));
    auto steps = adam_step(st, {ah});
    for (std::size_t i = 0; i < 4; ++i) {
        const cplx expect = 1e-3 * ah.data()[i] / (std::abs(ah.data()[i]) + 1e-8);
        CHECK(std::abs(steps[0].data()[i] - expect) < 1e-12);
    }

    // moments stay anti-Hermitian / non-negative over many random steps
    st = OptimizerState::fresh(1);
    for (int rep = 0; rep < 1000; ++rep) {
        Tensor r = random_matrix(2, rng);
        Tensor p({2, 2});
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                p.at({i, j}) = 0.5 * (r.at({i, j}) - std::conj(r.at({j, i})));
        auto s = adam_step(st, {p});
        CHECK(antihermitian_defect(st.m[0]) < 1e-12);
        CHECK(antihermitian_defect(s[0]) < 1e-12);
        for (std::size_t i = 0; i < 4; ++i) CHECK(st.v[0].data()[i].real() >= 0.0);
    }

    CHECK_THROWS_AS(adam_step(st, {Tensor::identity(2)}), DomainError);
}

TEST_CASE("optimize recovers a realizable target") {
    const std::size_t n = 4;
    BrickWallAnsatz skeleton = BrickWallAnsatz::build(Topology::chain(n), 2, AnsatzInit::Identity);
    auto built = circuit_to_mpo(skeleton.to_circuit(), 64);
    LossSpec spec = LossSpec::unitary(built.mpo);

    BrickWallAnsatz start = BrickWallAnsatz::build(Topology::chain(n), 2, AnsatzInit::NearIdentity, 0.01, 21);
    OptimizeConfig cfg;
    cfg.max_iters = 200;
    CompilationResult res = optimize(spec, start, cfg);
    CHECK(res.f_optim >= 1.0 - 1e-6);
    CHECK(res.ansatz.max_unitary_defect() < 1e-10);
    CHECK(res.loss_history.size() == res.iterations);
}

TEST_CASE("optimization is deterministic for a fixed seed") {
    const std::size_t n = 4;
    auto built = circuit_to_mpo(build_trotter_ising(n, 0.1, 3), 64);
    LossSpec spec = LossSpec::unitary(built.mpo);

    auto run = [&]() {
        BrickWallAnsatz a = BrickWallAnsatz::build(Topology::chain(n), 2, AnsatzInit::NearIdentity, 0.01, 42);
        OptimizeConfig cfg;
        cfg.max_iters = 60;
        return optimize(spec, a, cfg);
    };
    CompilationResult r1 = run();
    CompilationResult r2 = run();
    REQUIRE(r1.loss_history.size() == r2.loss_history.size());
    for (std::size_t i = 0; i < r1.loss_history.size(); ++i)
        CHECK(r1.loss_history[i] == r2.loss_history[i]);
    CHECK(r1.f_optim == r2.f_optim);
}

TEST_CASE("checkpointed runs resume to the identical trajectory") {
    const std::size_t n = 4;
    auto built = circuit_to_mpo(build_trotter_ising(n, 0.1, 3), 64);
    LossSpec spec = LossSpec::unitary(built.mpo);
    const std::string path = "test_resume.qckpt";

    BrickWallAnsatz a = BrickWallAnsatz::build(Topology::chain(n), 2, AnsatzInit::NearIdentity, 0.01, 7);

    OptimizeConfig full;
    full.max_iters = 80;
    CompilationResult straight = optimize(spec, a, full);

    OptimizeConfig half = full;
    half.max_iters = 40;
    half.checkpoint_path = path;
    half.checkpoint_every = 40;
    optimize(spec, a, half);

    OptimizeConfig rest = full;
    rest.checkpoint_path = path;
    rest.checkpoint_every = 40;
    rest.resume = true;
    CompilationResult resumed = optimize(spec, a, rest);

    REQUIRE(straight.loss_history.size() == resumed.loss_history.size());
    for (std::size_t i = 0; i < straight.loss_history.size(); ++i)
        CHECK(straight.loss_history[i] == resumed.loss_history[i]);
    std::remove(path.c_str());
}

TEST_CASE("global phase on the target leaves the fidelity trajectory unchanged") {
    const std::size_t n = 4;
    auto built = circuit_to_mpo(build_trotter_ising(n, 0.1, 3), 64);
    MPO phased = built.mpo;
    phased.apply_gate_inplace(Tensor::identity(2) * std::exp(cplx(0.0, 1.1)),
                              std::vector<std::size_t>{0});
    // |Tr[U^dag e^{i phi} V]| = |Tr[U^dag V]|
    BrickWallAnsatz a = BrickWallAnsatz::build(Topology::chain(n), 2, AnsatzInit::NearIdentity, 0.01, 3);
    LossEngine e1(LossSpec::unitary(built.mpo), a);
    LossEngine e2(LossSpec::unitary(phased), a);
    const double f1 = e1.evaluate(a.params()).fidelity;
    const double f2 = e2.evaluate(a.params()).fidelity;
    CHECK(f1 == doctest::Approx(f2).epsilon(1e-10));
}
