#include "qbrick/ansatz.hpp"

#include <algorithm>

#include "qbrick/errors.hpp"
#include "qbrick/gates.hpp"
#include "qbrick/rng.hpp"

namespace qbrick {

namespace {

// Edges of one layer grouped into disjoint sublayers, in application order.
std::vector<std::vector<std::pair<std::size_t, std::size_t>>> layer_edges(const Topology& topo) {
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> subs;
    if (topo.kind == Topology::Kind::Chain) {
        subs.resize(2);
        for (std::size_t off = 0; off < 2; ++off)
            for (std::size_t i = off; i + 1 < topo.n; i += 2) subs[off].push_back({i, i + 1});
    } else {
        subs.resize(4);
        for (std::size_t off = 0; off < 2; ++off) // horizontal, by column parity
            for (std::size_t r = 0; r < topo.rows; ++r)
                for (std::size_t c = off; c + 1 < topo.cols; c += 2) {
                    auto a = topo.site_of(r, c), b = topo.site_of(r, c + 1);
                    subs[off].push_back({std::min(a, b), std::max(a, b)});
                }
        for (std::size_t off = 0; off < 2; ++off) // vertical, by row parity
            for (std::size_t r = off; r + 1 < topo.rows; r += 2)
                for (std::size_t c = 0; c < topo.cols; ++c) {
                    auto a = topo.site_of(r, c), b = topo.site_of(r + 1, c);
                    subs[off + 2].push_back({std::min(a, b), std::max(a, b)});
                }
    }
    // drop empty groups (two-site chains have no odd bonds)
    std::erase_if(subs, [](const auto& v) { return v.empty(); });
    return subs;
}

Tensor near_identity_gate(double sigma, Rng& rng) {
    Tensor g({2, 2});
    for (cplx& v : g.values()) v = cplx(rng.normal(), rng.normal());
    Tensor a({2, 2});
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            a.at({i, j}) = 0.5 * sigma * (g.at({i, j}) - std::conj(g.at({j, i})));
    return expm_antihermitian(a);
}

} // namespace

BrickWallAnsatz BrickWallAnsatz::build(Topology topo, std::size_t d_optim, AnsatzInit init,
                                       double sigma, std::uint64_t seed) {
    if (topo.n < 2) throw DomainError("ansatz: need at least two qubits");
    if (d_optim < 1) throw DomainError("ansatz: depth must be at least 1");

    BrickWallAnsatz a;
    a.topo_ = topo;
    a.depth_ = d_optim;
    const auto subs = layer_edges(topo);
    a.sublayers_ = subs.size();

    std::size_t pidx = 0;
    for (std::size_t layer = 0; layer < d_optim; ++layer)
        for (std::size_t s = 0; s < subs.size(); ++s)
            for (const auto& [lo, hi] : subs[s]) {
                Brick b;
                b.low = lo;
                b.high = hi;
                b.sublayer = s;
                b.pre_low = pidx++;
                b.pre_high = pidx++;
                a.bricks_.push_back(b);
            }

    const std::size_t count = pidx + topo.n;
    a.params_.reserve(count);
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        switch (init) {
            case AnsatzInit::Identity: a.params_.push_back(Tensor::identity(2)); break;
            case AnsatzInit::NearIdentity: a.params_.push_back(near_identity_gate(sigma, rng)); break;
            case AnsatzInit::Seeded: a.params_.push_back(gates::random_unitary(2, rng)); break;
        }
    }
    return a;
}

std::size_t BrickWallAnsatz::bricks_per_layer() const {
    return depth_ == 0 ? 0 : bricks_.size() / depth_;
}

void BrickWallAnsatz::set_param(std::size_t i, Tensor u) {
    if (i >= params_.size()) throw ShapeError("ansatz: parameter index out of range");
    if (u.rank() != 2 || u.dim(0) != 2 || u.dim(1) != 2)
        throw ShapeError("ansatz: parameters are 2x2 unitaries");
    params_[i] = std::move(u);
}

double BrickWallAnsatz::max_unitary_defect() const {
    double d = 0.0;
    for (const Tensor& u : params_) d = std::max(d, unitary_defect(u));
    return d;
}

Circuit BrickWallAnsatz::to_circuit() const {
    CircuitMeta meta;
    meta.family = "ansatz";
    meta.steps = depth_;
    Circuit c(topo_, meta);

    const std::size_t per_layer = bricks_per_layer();
    for (std::size_t layer = 0; layer < depth_; ++layer) {
        const std::size_t base = layer * per_layer;
        std::size_t i = base;
        while (i < base + per_layer) {
            std::size_t j = i;
            while (j < base + per_layer && bricks_[j].sublayer == bricks_[i].sublayer) ++j;
            std::vector<Gate> pre, ent;
            for (std::size_t k = i; k < j; ++k) {
                const Brick& b = bricks_[k];
                pre.push_back(Gate::single(b.low, params_[b.pre_low]));
                pre.push_back(Gate::single(b.high, params_[b.pre_high]));
                ent.push_back(Gate::cnot(b.low, b.high));
            }
            c.add_layer(std::move(pre));
            c.add_layer(std::move(ent));
            i = j;
        }
        if (layer + 1 == depth_) {
            std::vector<Gate> closing;
            for (std::size_t s = 0; s < topo_.n; ++s)
                closing.push_back(Gate::single(s, params_[final_param(s)]));
            c.add_layer(std::move(closing));
        }
        c.end_unit();
    }
    return c;
}

BrickWallAnsatz BrickWallAnsatz::padded(std::size_t extra) const {
    if (extra == 0) return *this;
    BrickWallAnsatz wide = build(topo_, depth_ + extra, AnsatzInit::Identity);
    for (std::size_t i = 0; i < 2 * bricks_.size(); ++i) wide.params_[i] = params_[i];
    // the old closing column moves into the first dressing each site receives
    // in the first appended layer (it commutes with the CNOTs before that)
    std::vector<bool> seen(topo_.n, false);
    const std::size_t per_layer = bricks_per_layer();
    for (std::size_t k = depth_ * per_layer; k < (depth_ + 1) * per_layer; ++k) {
        const Brick& b = wide.bricks_[k];
        if (!seen[b.low]) {
            wide.params_[b.pre_low] = params_[final_param(b.low)];
            seen[b.low] = true;
        }
        if (!seen[b.high]) {
            wide.params_[b.pre_high] = params_[final_param(b.high)];
            seen[b.high] = true;
        }
    }
    return wide;
}

} // namespace qbrick
