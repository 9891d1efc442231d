#include "qbrick/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>

#include "qbrick/errors.hpp"
#include "qbrick/serialize.hpp"
#include "eigen_util.hpp"

namespace qbrick {

OptimizerState OptimizerState::fresh(std::size_t n_gates, AdamParams hp) {
    OptimizerState st;
    st.hp = hp;
    st.m.assign(n_gates, Tensor({2, 2}));
    st.v.assign(n_gates, Tensor({2, 2}));
    return st;
}

Tensor project_to_tangent(const Tensor& u, const Tensor& grad) {
    if (u.shape() != grad.shape()) throw ShapeError("project_to_tangent: shape mismatch");
    Tensor ug = matmul(dagger(u), grad);
    Tensor out(ug.shape());
    const std::size_t n = ug.dim(0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out.at({i, j}) = 0.5 * (ug.at({i, j}) - std::conj(ug.at({j, i})));
    return out;
}

Tensor retract(const Tensor& u, const Tensor& step, double eta) {
    if (eta == 0.0) return u;
    const double scale = std::max(1.0, step.max_abs());
    if (antihermitian_defect(step) > 1e-10 * scale)
        throw DomainError("retract: step is not anti-Hermitian");
    return matmul(u, expm_antihermitian(step * cplx(-eta)));
}

std::vector<Tensor> adam_step(OptimizerState& state, const std::vector<Tensor>& grads) {
    if (state.m.size() != grads.size()) throw ShapeError("adam_step: gradient count mismatch");
    state.t += 1;
    const AdamParams& hp = state.hp;
    const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.t));

    std::vector<Tensor> steps;
    steps.reserve(grads.size());
    for (std::size_t g = 0; g < grads.size(); ++g) {
        const Tensor& gr = grads[g];
        if (antihermitian_defect(gr) > 1e-8 * std::max(1.0, gr.max_abs()))
            throw DomainError("adam_step: gradients must be anti-Hermitian");
        Tensor& m = state.m[g];
        Tensor& v = state.v[g];
        if (m.shape() != gr.shape()) m = Tensor(gr.shape());
        if (v.shape() != gr.shape()) v = Tensor(gr.shape());

        Tensor step(gr.shape());
        for (std::size_t i = 0; i < gr.size(); ++i) {
            m.data()[i] = hp.beta1 * m.data()[i] + (1.0 - hp.beta1) * gr.data()[i];
            v.data()[i] = hp.beta2 * v.data()[i] + (1.0 - hp.beta2) * std::norm(gr.data()[i]);
            const double mhat_scale = 1.0 / bc1;
            const double vhat = v.data()[i].real() / bc2;
            step.data()[i] = hp.lr * (m.data()[i] * mhat_scale) / (std::sqrt(vhat) + hp.eps);
        }
        // rounding guard: exact skew part
        const std::size_t n = step.dim(0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                const cplx a = step.at({i, j});
                const cplx b = step.at({j, i});
                const cplx skew = 0.5 * (a - std::conj(b));
                step.at({i, j}) = skew;
                step.at({j, i}) = -std::conj(skew);
            }
        steps.push_back(std::move(step));
    }
    return steps;
}

CompilationResult optimize(const LossSpec& spec, BrickWallAnsatz ansatz,
                           const OptimizeConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    LossEngine engine(spec, ansatz, config.engine);

    std::vector<Tensor> params = ansatz.params();
    OptimizerState st = OptimizerState::fresh(params.size(), config.adam);

    std::vector<double> history;
    std::vector<Tensor> best_params = params;
    double best_fidelity = -1.0;
    double best_loss = std::numeric_limits<double>::infinity();
    double conv_best = std::numeric_limits<double>::infinity();
    std::size_t last_gain = 0;
    double cheap_best_f = -1.0;
    std::size_t last_confirm = 0;
    bool confirm_pending = false;
    std::size_t it = 0;

    auto confirm = [&](const std::vector<Tensor>& p) {
        const LossEngine::Eval e = engine.evaluate(p);
        if (e.fidelity > best_fidelity) {
            best_fidelity = e.fidelity;
            best_loss = e.loss;
            best_params = p;
        }
    };

    if (config.resume && !config.checkpoint_path.empty() &&
        std::filesystem::exists(config.checkpoint_path)) {
        Checkpoint ck = load_checkpoint(config.checkpoint_path);
        if (ck.ansatz.param_count() != params.size() || ck.ansatz.n() != ansatz.n() ||
            ck.ansatz.depth() != ansatz.depth())
            throw IoError("resume: checkpoint does not match the ansatz structure");
        params = ck.ansatz.params();
        st = ck.opt;
        it = ck.iteration;
        history = ck.loss_history;
        best_params = ck.best_params;
        best_fidelity = ck.best_fidelity;
        conv_best = ck.conv_best_loss;
        last_gain = ck.last_gain_iter;
        cheap_best_f = ck.cheap_best_fidelity;
        last_confirm = ck.last_confirm_iter;
        confirm_pending = ck.confirm_pending;
        if (best_fidelity < 0.0) confirm(params);
    } else {
        confirm(params);
    }

    auto save_ck = [&]() {
        if (config.checkpoint_path.empty()) return;
        Checkpoint ck;
        ck.ansatz = ansatz;
        for (std::size_t i = 0; i < params.size(); ++i) ck.ansatz.set_param(i, params[i]);
        ck.opt = st;
        ck.iteration = it;
        ck.loss_history = history;
        ck.best_params = best_params;
        ck.best_fidelity = best_fidelity;
        ck.conv_best_loss = conv_best;
        ck.last_gain_iter = last_gain;
        ck.cheap_best_fidelity = cheap_best_f;
        ck.last_confirm_iter = last_confirm;
        ck.confirm_pending = confirm_pending;
        ck.seed = config.seed;
        save_checkpoint(ck, config.checkpoint_path);
    };

    bool converged = false;
    std::vector<Tensor> grads;
    while (it < config.max_iters) {
        ++it;
        const LossEngine::Eval e = engine.evaluate_with_gradient(params, grads);
        history.push_back(e.loss);

        if (e.loss < conv_best - config.tol) {
            conv_best = e.loss;
            last_gain = it;
        }
        if (e.fidelity > cheap_best_f) {
            cheap_best_f = e.fidelity;
            confirm_pending = true;
        }
        if (confirm_pending && it - last_confirm >= config.precise_every) {
            confirm(params);
            last_confirm = it;
            confirm_pending = false;
        }
        if (it - last_gain >= config.patience) {
            converged = true;
            break;
        }

        for (std::size_t g = 0; g < grads.size(); ++g)
            grads[g] = project_to_tangent(params[g], grads[g]);
        const std::vector<Tensor> steps = adam_step(st, grads);
        for (std::size_t g = 0; g < params.size(); ++g)
            params[g] = retract(params[g], steps[g], 1.0);

        if (config.checkpoint_every > 0 && it % config.checkpoint_every == 0) save_ck();
    }
    confirm(params);
    if (config.checkpoint_every > 0) save_ck();

    CompilationResult result;
    for (std::size_t i = 0; i < best_params.size(); ++i) ansatz.set_param(i, best_params[i]);
    result.ansatz = std::move(ansatz);
    result.f_optim = best_fidelity;
    result.final_loss = best_loss;
    result.loss_history = std::move(history);
    result.iterations = it;
    result.converged = converged;
    result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

} // namespace qbrick
