#include "qbrick/loss.hpp"

#include <algorithm>
#include <cmath>

#include "qbrick/errors.hpp"
#include "qbrick/gates.hpp"
#include "eigen_util.hpp"
#include "train_util.hpp"

namespace qbrick {

using detail::Split2Q;

LossSpec LossSpec::state(MPS target, MPS input) {
    LossSpec s;
    s.mode = Mode::State;
    s.n = target.size();
    if (input.size() != s.n) throw ShapeError("loss spec: target and input sizes differ");
    s.target_state = std::move(target);
    s.psi0 = std::move(input);
    return s;
}

LossSpec LossSpec::unitary(MPO target) {
    LossSpec s;
    s.mode = Mode::Unitary;
    s.n = target.size();
    s.target_op = std::move(target);
    return s;
}

double fidelity_state(const MPS& a, const MPS& b) {
    const double f = std::norm(inner(a, b));
    return std::min(f, 1.0 + 1e-9);
}

double fidelity_unitary(const MPO& a, const MPO& b) {
    const double t = std::abs(trace_adjoint_product(a, b));
    return t / std::pow(2.0, static_cast<double>(a.size()));
}

EngineOptions EngineOptions::resolved(const LossSpec& spec, std::size_t d_optim) const {
    (void)d_optim; // the ket's bond grows as 2^layers on its own; no cap needed for it
    EngineOptions r = *this;
    const std::size_t n = spec.n;
    const std::size_t phys = spec.mode == LossSpec::Mode::State ? 2 : 4;
    // exact representability ceiling p^ceil(n/2); the backward sweep starts
    // from the target, so it gets headroom above d_target
    const std::size_t half = std::min<std::size_t>((n + 1) / 2, phys == 2 ? 24 : 12);
    const double phys_bound = std::pow(static_cast<double>(phys), static_cast<double>(half));
    const double ceiling = std::min(phys_bound, 2.0 * static_cast<double>(r.d_target));
    const std::size_t auto_cap = static_cast<std::size_t>(std::max(4.0, ceiling));

    const bool small = n <= 7;
    if (r.value_cap == 0) r.value_cap = auto_cap;
    if (r.value_rtol < 0.0) r.value_rtol = small ? 1e-13 : 3e-10;
    if (r.grad_cap == 0) r.grad_cap = small ? r.value_cap : std::min<std::size_t>(r.value_cap, 64);
    if (r.grad_rtol < 0.0) r.grad_rtol = small ? 1e-13 : 3e-5;
    return r;
}

// ---------------------------------------------------------------------------
// Stage program

namespace {

struct OneQOp {
    std::size_t site;
    std::size_t param;
};

struct FixedOp {
    std::size_t site; // acts on (site, site+1)
    Split2Q split;
};

struct Stage {
    bool trainable = false;
    std::vector<OneQOp> gates;     // trainable stages
    std::vector<FixedOp> fixed;    // entangler stages, applied in order
};

using Train = std::vector<Tensor>;

struct Tier {
    std::size_t cap;
    double rtol;
};

void compress(Train& t, double scale, const Tier& tier) {
    if (detail::train_max_bond(t) <= 12 && detail::train_max_bond(t) <= tier.cap) return;
    detail::train_right_canonicalize(t, scale);
    detail::train_truncate(t, scale, {tier.cap, tier.rtol, false});
}

} // namespace

struct LossEngine::Impl {
    LossSpec::Mode mode;
    std::size_t n = 0;
    std::size_t phys = 2;
    double scale = 1.0;       // canonical-form site scale of the trains
    double loss_offset = 0.0; // 2 or 2*2^n
    double fid_norm = 1.0;    // 1 (state) or 2^n (unitary)

    Train init;
    Train target_value; // value-tier compressed target
    Train target_grad;  // gradient-tier compressed target
    Tier value_tier{};
    Tier grad_tier{};

    std::vector<Stage> stages;
    std::size_t n_params = 0;

    Tensor lift_param(const Tensor& u) const {
        return phys == 2 ? u : kron(u, Tensor::identity(2));
    }

    Train make_target(const LossSpec& spec, const Tier& tier) const {
        Train t;
        if (mode == LossSpec::Mode::State) {
            t = spec.target_state.raw_sites();
        } else {
            t = spec.target_op.raw_sites();
            for (Tensor& s : t) s = std::move(s).reshaped({s.dim(0), 4, s.dim(3)});
        }
        if (detail::train_max_bond(t) > tier.cap || tier.rtol > 1e-13) {
            detail::train_right_canonicalize(t, scale);
            detail::train_truncate(t, scale, {tier.cap, tier.rtol, false});
        }
        return t;
    }

    void apply_stage(Train& t, const Stage& st, const std::vector<Tensor>& params,
                     const Tier& tier) const {
        if (st.trainable) {
            for (const OneQOp& op : st.gates)
                detail::train_apply_1q(t, lift_param(params[op.param]), op.site);
            return;
        }
        for (const FixedOp& op : st.fixed) {
            detail::train_apply_2q_split(t, op.split, op.site);
            if (detail::train_max_bond(t) > 4 * tier.cap) compress(t, scale, tier);
        }
        compress(t, scale, tier);
    }

    // adjoint of the stage, for the backward (bra) sweep
    void apply_stage_adjoint(Train& t, const Stage& st, const std::vector<Tensor>& params,
                             const Tier& tier) const {
        if (st.trainable) {
            for (const OneQOp& op : st.gates)
                detail::train_apply_1q(t, lift_param(dagger(params[op.param])), op.site);
            return;
        }
        for (std::size_t i = st.fixed.size(); i-- > 0;) {
            const FixedOp& op = st.fixed[i];
            Split2Q adj;
            adj.left.reserve(op.split.left.size());
            adj.right.reserve(op.split.right.size());
            for (std::size_t k = 0; k < op.split.left.size(); ++k) {
                adj.left.push_back(dagger(op.split.left[k]));
                adj.right.push_back(dagger(op.split.right[k]));
            }
            detail::train_apply_2q_split(t, adj, op.site);
            if (detail::train_max_bond(t) > 4 * tier.cap) compress(t, scale, tier);
        }
        compress(t, scale, tier);
    }

    Eval finish(cplx f) const {
        Eval e;
        e.overlap = f;
        e.loss = loss_offset - 2.0 * f.real();
        if (mode == LossSpec::Mode::State)
            e.fidelity = std::min(std::norm(f), 1.0 + 1e-9);
        else
            e.fidelity = std::min(std::abs(f) / fid_norm, 1.0 + 1e-9);
        return e;
    }

    Eval forward(const std::vector<Tensor>& params, const Train& target, const Tier& tier) const {
        Train t = init;
        for (const Stage& st : stages) apply_stage(t, st, params, tier);
        return finish(detail::train_inner(target, t));
    }

    // The trainable dressing is applied through its own stages, so the fixed
    // entangler is the bare CNOT (swap-routed for long grid edges).
    void lower_bricks(const BrickWallAnsatz& a) {
        const std::size_t per_layer = a.bricks_per_layer();
        const Split2Q cnot_split = detail::make_split(detail::lift_2q(gates::cnot(), phys), phys);
        const Split2Q swap_split = detail::make_split(detail::lift_2q(gates::swap2(), phys), phys);

        for (std::size_t layer = 0; layer < a.depth(); ++layer) {
            const std::size_t base = layer * per_layer;
            std::size_t i = base;
            while (i < base + per_layer) {
                std::size_t j = i;
                while (j < base + per_layer && a.bricks()[j].sublayer == a.bricks()[i].sublayer) ++j;
                Stage pre;
                pre.trainable = true;
                Stage ent;
                for (std::size_t k = i; k < j; ++k) {
                    const auto& b = a.bricks()[k];
                    pre.gates.push_back({b.low, b.pre_low});
                    pre.gates.push_back({b.high, b.pre_high});
                    if (b.high - b.low == 1) {
                        ent.fixed.push_back({b.low, cnot_split});
                    } else {
                        for (std::size_t p = b.high - 1; p > b.low; --p)
                            ent.fixed.push_back({p, swap_split});
                        ent.fixed.push_back({b.low, cnot_split});
                        for (std::size_t p = b.low + 1; p < b.high; ++p)
                            ent.fixed.push_back({p, swap_split});
                    }
                }
                stages.push_back(std::move(pre));
                stages.push_back(std::move(ent));
                i = j;
            }
        }
        Stage closing;
        closing.trainable = true;
        for (std::size_t s = 0; s < a.n(); ++s) closing.gates.push_back({s, a.final_param(s)});
        stages.push_back(std::move(closing));
        n_params = a.param_count();
    }
};

namespace {

using MatRM = detail::MatRM;
using StrideMap = Eigen::Map<const MatRM, 0, Eigen::OuterStride<>>;

StrideMap slice(const Tensor& t, std::size_t q) {
    return StrideMap(t.data() + q * t.dim(2), static_cast<Eigen::Index>(t.dim(0)),
                     static_cast<Eigen::Index>(t.dim(2)),
                     Eigen::OuterStride<>(static_cast<Eigen::Index>(t.dim(1) * t.dim(2))));
}

} // namespace

LossEngine::LossEngine(const LossSpec& spec, const BrickWallAnsatz& structure, EngineOptions opt) {
    if (structure.n() != spec.n) throw ShapeError("loss engine: spec and ansatz sizes differ");
    impl_ = std::make_unique<Impl>();
    impl_->mode = spec.mode;
    impl_->n = spec.n;
    impl_->phys = spec.mode == LossSpec::Mode::State ? 2 : 4;
    impl_->scale = spec.mode == LossSpec::Mode::State ? 1.0 : 2.0;
    const double dim = std::pow(2.0, static_cast<double>(spec.n));
    impl_->loss_offset = spec.mode == LossSpec::Mode::State ? 2.0 : 2.0 * dim;
    impl_->fid_norm = spec.mode == LossSpec::Mode::State ? 1.0 : dim;

    const EngineOptions r = opt.resolved(spec, structure.depth());
    impl_->value_tier = {r.value_cap, r.value_rtol};
    impl_->grad_tier = {r.grad_cap, r.grad_rtol};

    if (spec.mode == LossSpec::Mode::State) {
        impl_->init = spec.psi0.raw_sites();
    } else {
        MPO id = MPO::identity(spec.n);
        impl_->init = id.raw_sites();
        for (Tensor& s : impl_->init) s = std::move(s).reshaped({s.dim(0), 4, s.dim(3)});
    }
    impl_->target_value = impl_->make_target(spec, impl_->value_tier);
    impl_->target_grad = (impl_->value_tier.cap == impl_->grad_tier.cap &&
                          impl_->value_tier.rtol == impl_->grad_tier.rtol)
                             ? impl_->target_value
                             : impl_->make_target(spec, impl_->grad_tier);

    impl_->lower_bricks(structure);
}

LossEngine::~LossEngine() = default;
LossEngine::LossEngine(LossEngine&&) noexcept = default;
LossEngine& LossEngine::operator=(LossEngine&&) noexcept = default;

std::size_t LossEngine::param_count() const { return impl_->n_params; }
std::size_t LossEngine::n() const { return impl_->n; }

LossEngine::Eval LossEngine::evaluate(const std::vector<Tensor>& params) const {
    return impl_->forward(params, impl_->target_value, impl_->value_tier);
}

LossEngine::Eval LossEngine::evaluate_cheap(const std::vector<Tensor>& params) const {
    return impl_->forward(params, impl_->target_grad, impl_->grad_tier);
}

LossEngine::Eval LossEngine::evaluate_with_gradient(const std::vector<Tensor>& params,
                                                    std::vector<Tensor>& grads) const {
    const Impl& im = *impl_;
    const std::size_t k_stages = im.stages.size();

    // forward pass, keeping the train before every trainable stage
    std::vector<Train> kets(k_stages + 1);
    kets[0] = im.init;
    for (std::size_t k = 0; k < k_stages; ++k) {
        kets[k + 1] = kets[k];
        im.apply_stage(kets[k + 1], im.stages[k], params, im.grad_tier);
    }
    const cplx f = detail::train_inner(im.target_grad, kets[k_stages]);

    grads.assign(im.n_params, Tensor());

    // backward pass
    Train bra = im.target_grad;
    for (std::size_t k = k_stages; k-- > 0;) {
        const Stage& st = im.stages[k];
        if (st.trainable) {
            // per-site environments between bra (conjugated) and kets[k];
            // a trainable stage leaves bonds alone, so the gate-applied
            // train is exactly kets[k+1]
            const Train& ket = kets[k];
            const Train& ket_acted = kets[k + 1];
            const std::size_t n = im.n;
            std::vector<const OneQOp*> op_at(n, nullptr);
            for (const OneQOp& op : st.gates) op_at[op.site] = &op;

            // right environments over gate-applied kets
            std::vector<MatRM> renv(n + 1);
            renv[n] = MatRM::Ones(1, 1);
            for (std::size_t j = n; j-- > 0;) {
                const Tensor& kj = ket_acted[j];
                const Tensor& bj = bra[j];
                MatRM next = MatRM::Zero(static_cast<Eigen::Index>(bj.dim(0)),
                                         static_cast<Eigen::Index>(kj.dim(0)));
                for (std::size_t q = 0; q < im.phys; ++q)
                    next.noalias() += slice(bj, q).conjugate() * renv[j + 1] * slice(kj, q).transpose();
                renv[j] = std::move(next);
            }

            MatRM lenv = MatRM::Ones(1, 1);
            for (std::size_t j = 0; j < n; ++j) {
                const Tensor& bj = bra[j];
                if (op_at[j]) {
                    // T[qb,qk] with the bra/ket physical legs open at j
                    const Tensor& kj = ket[j];
                    MatRM t_open(static_cast<Eigen::Index>(im.phys),
                                 static_cast<Eigen::Index>(im.phys));
                    for (std::size_t qk = 0; qk < im.phys; ++qk) {
                        const MatRM y = lenv * slice(kj, qk);          // Dlb x Drk
                        const MatRM z = y * renv[j + 1].transpose();   // Dlb x Drb
                        for (std::size_t qb = 0; qb < im.phys; ++qb)
                            t_open(static_cast<Eigen::Index>(qb), static_cast<Eigen::Index>(qk)) =
                                slice(bj, qb).conjugate().cwiseProduct(z).sum();
                    }
                    // reduce the lifted environment to the bare 2x2 gate
                    Tensor env({2, 2});
                    if (im.phys == 2) {
                        for (std::size_t r = 0; r < 2; ++r)
                            for (std::size_t c = 0; c < 2; ++c)
                                env.at({r, c}) = t_open(static_cast<Eigen::Index>(r),
                                                        static_cast<Eigen::Index>(c));
                    } else {
                        for (std::size_t r = 0; r < 2; ++r)
                            for (std::size_t c = 0; c < 2; ++c) {
                                cplx s = 0.0;
                                for (std::size_t w = 0; w < 2; ++w)
                                    s += t_open(static_cast<Eigen::Index>(r * 2 + w),
                                                static_cast<Eigen::Index>(c * 2 + w));
                                env.at({r, c}) = s;
                            }
                    }
                    // dLoss/d(conj U) = -conj(env)
                    grads[op_at[j]->param] = env.conjugated() * cplx(-1.0);
                }
                const Tensor& kj = ket_acted[j];
                MatRM next = MatRM::Zero(static_cast<Eigen::Index>(bj.dim(2)),
                                         static_cast<Eigen::Index>(kj.dim(2)));
                for (std::size_t q = 0; q < im.phys; ++q)
                    next.noalias() += slice(bj, q).adjoint() * lenv * slice(kj, q);
                lenv = std::move(next);
            }
        }
        if (k > 0) im.apply_stage_adjoint(bra, st, params, im.grad_tier);
    }
    return im.finish(f);
}

double loss_value(const LossSpec& spec, const BrickWallAnsatz& a) {
    LossEngine engine(spec, a);
    return engine.evaluate(a.params()).loss;
}

std::vector<Tensor> gradient(const LossSpec& spec, const BrickWallAnsatz& a) {
    LossEngine engine(spec, a);
    std::vector<Tensor> grads;
    engine.evaluate_with_gradient(a.params(), grads);
    return grads;
}

} // namespace qbrick
