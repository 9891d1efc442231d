#include "qbrick/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qbrick/errors.hpp"
#include "qbrick/gates.hpp"
#include "qbrick/rng.hpp"
#include "eigen_util.hpp"
#include "train_util.hpp"

namespace qbrick {

// ---------------------------------------------------------------------------
// Gate / Topology

Gate Gate::single(std::size_t site, Tensor m) {
    return {GateKind::SingleQubit, {site}, std::move(m)};
}

Gate Gate::cnot(std::size_t control, std::size_t target) {
    return {GateKind::Cnot, {control, target}, gates::cnot()};
}

Gate Gate::two(std::size_t a, std::size_t b, Tensor m) {
    return {GateKind::TwoQubit, {a, b}, std::move(m)};
}

Topology Topology::chain(std::size_t n) { return {Kind::Chain, n, 0, 0}; }

Topology Topology::grid(std::size_t rows, std::size_t cols) {
    return {Kind::Grid, rows * cols, rows, cols};
}

std::size_t Topology::site_of(std::size_t r, std::size_t c) const {
    return r * cols + ((r % 2 == 0) ? c : cols - 1 - c);
}

std::pair<std::size_t, std::size_t> Topology::coord_of(std::size_t site) const {
    const std::size_t r = site / cols;
    const std::size_t k = site % cols;
    return {r, (r % 2 == 0) ? k : cols - 1 - k};
}

bool Topology::adjacent(std::size_t a, std::size_t b) const {
    if (a == b) return false;
    if (kind == Kind::Chain) return (a < b ? b - a : a - b) == 1;
    auto [ra, ca] = coord_of(a);
    auto [rb, cb] = coord_of(b);
    const std::size_t dr = ra < rb ? rb - ra : ra - rb;
    const std::size_t dc = ca < cb ? cb - ca : ca - cb;
    return dr + dc == 1;
}

std::size_t Topology::edge_count() const {
    if (kind == Kind::Chain) return n >= 1 ? n - 1 : 0;
    return 2 * rows * cols - rows - cols;
}

std::vector<std::size_t> snake_order(std::size_t rows, std::size_t cols) {
    Topology g = Topology::grid(rows, cols);
    std::vector<std::size_t> order;
    order.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) order.push_back(g.site_of(r, c));
    return order;
}

// ---------------------------------------------------------------------------
// Circuit

Circuit::Circuit(Topology topo, CircuitMeta meta) : topo_(topo), meta_(std::move(meta)) {}

void Circuit::add_layer(std::vector<Gate> gates) {
    if (gates.empty()) return;
    std::set<std::size_t> used;
    for (const Gate& g : gates) {
        const std::size_t expect = (g.kind == GateKind::SingleQubit) ? 1 : 2;
        if (g.sites.size() != expect) throw ShapeError("gate has the wrong number of sites");
        const std::size_t dim = expect == 1 ? 2 : 4;
        if (g.matrix.rank() != 2 || g.matrix.dim(0) != dim || g.matrix.dim(1) != dim)
            throw ShapeError("gate matrix has the wrong dimensions");
        if (unitary_defect(g.matrix) > 1e-10) throw DomainError("gate matrix is not unitary");
        for (std::size_t s : g.sites) {
            if (s >= topo_.n) throw ShapeError("gate site out of range");
            if (!used.insert(s).second)
                throw ShapeError("gates within a layer must act on disjoint sites");
        }
        if (g.kind == GateKind::Cnot && !topo_.adjacent(g.sites[0], g.sites[1]))
            throw TopologyError("cnot sites are not adjacent under the active topology");
    }
    layers_.push_back(std::move(gates));
}

void Circuit::end_unit() { unit_ends_.push_back(layers_.size()); }

std::size_t Circuit::gate_count() const {
    std::size_t c = 0;
    for (const auto& l : layers_) c += l.size();
    return c;
}

std::size_t Circuit::two_qubit_gate_count() const {
    std::size_t c = 0;
    for (const auto& l : layers_)
        for (const Gate& g : l) c += (g.sites.size() == 2) ? 1 : 0;
    return c;
}

// ---------------------------------------------------------------------------
// Builders

Circuit build_trotter_ising(std::size_t n, double tau, std::size_t steps) {
    if (n < 2) throw DomainError("ising: need at least two qubits");
    if (tau < 0.0) throw DomainError("ising: tau must be non-negative");
    if (steps < 1) throw DomainError("ising: need at least one step");
    CircuitMeta meta;
    meta.family = "ising";
    meta.tau = tau;
    meta.steps = steps;
    Circuit c(Topology::chain(n), meta);
    const Tensor zz = gates::zz_rotation(tau);
    const Tensor xr = gates::x_rotation(tau);
    for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t off = 0; off < 2; ++off) {
            std::vector<Gate> layer;
            for (std::size_t i = off; i + 1 < n; i += 2) layer.push_back(Gate::two(i, i + 1, zz));
            c.add_layer(std::move(layer));
        }
        std::vector<Gate> fields;
        for (std::size_t i = 0; i < n; ++i) fields.push_back(Gate::single(i, xr));
        c.add_layer(std::move(fields));
        c.end_unit();
    }
    return c;
}

Circuit build_trotter_ising_grid(std::size_t rows, std::size_t cols, double tau, std::size_t steps) {
    if (rows < 2 || cols < 2) throw DomainError("ising2d: grid dimensions must be at least 2");
    if (tau < 0.0) throw DomainError("ising2d: tau must be non-negative");
    if (steps < 1) throw DomainError("ising2d: need at least one step");
    CircuitMeta meta;
    meta.family = "ising2d";
    meta.tau = tau;
    meta.steps = steps;
    const Topology topo = Topology::grid(rows, cols);
    Circuit c(topo, meta);
    const Tensor zz = gates::zz_rotation(tau);
    const Tensor xr = gates::x_rotation(tau);
    for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t off = 0; off < 2; ++off) { // horizontal bonds
            std::vector<Gate> layer;
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t cc = off; cc + 1 < cols; cc += 2)
                    layer.push_back(Gate::two(topo.site_of(r, cc), topo.site_of(r, cc + 1), zz));
            c.add_layer(std::move(layer));
        }
        for (std::size_t off = 0; off < 2; ++off) { // vertical bonds
            std::vector<Gate> layer;
            for (std::size_t r = off; r + 1 < rows; r += 2)
                for (std::size_t cc = 0; cc < cols; ++cc)
                    layer.push_back(Gate::two(topo.site_of(r, cc), topo.site_of(r + 1, cc), zz));
            c.add_layer(std::move(layer));
        }
        std::vector<Gate> fields;
        for (std::size_t i = 0; i < topo.n; ++i) fields.push_back(Gate::single(i, xr));
        c.add_layer(std::move(fields));
        c.end_unit();
    }
    return c;
}

namespace {

double rotation_angle(std::size_t k, bool power_of_two) {
    const double twopi = 2.0 * M_PI;
    return power_of_two ? twopi / std::pow(2.0, static_cast<double>(k))
                        : twopi / static_cast<double>(k);
}

} // namespace

Circuit build_qft_core(std::size_t n, bool power_of_two_phases) {
    if (n < 2) throw DomainError("qft: need at least two qubits");
    CircuitMeta meta;
    meta.family = "qft";
    Circuit c(Topology::chain(n), meta);
    for (std::size_t j = 0; j < n; ++j) {
        c.add_layer({Gate::single(j, gates::h())});
        for (std::size_t k = 2; k <= n - j; ++k)
            c.add_layer({Gate::two(j + k - 1, j, gates::cphase(rotation_angle(k, power_of_two_phases)))});
        c.end_unit();
    }
    return c;
}

Circuit build_aqft(std::size_t n, std::size_t k_max, bool power_of_two_phases) {
    if (n < 2) throw DomainError("aqft: need at least two qubits");
    if (k_max < 2 || k_max > n) throw DomainError("aqft: require 2 <= k_max <= n");
    CircuitMeta meta;
    meta.family = "aqft";
    meta.k_max = k_max;
    Circuit c(Topology::chain(n), meta);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t k_round = std::min(k_max, n - j);
        c.add_layer({Gate::single(j, gates::h())});
        if (k_round >= 2) {
            // target starts at j; controls are fixed at j+1 .. j+k_round-1
            c.add_layer({Gate::two(j + 1, j, gates::cphase(rotation_angle(2, power_of_two_phases)))});
            for (std::size_t k = 3; k <= k_round; ++k) {
                c.add_layer({Gate::two(j + k - 3, j + k - 2, gates::swap2())});
                c.add_layer(
                    {Gate::two(j + k - 1, j + k - 2, gates::cphase(rotation_angle(k, power_of_two_phases)))});
            }
            for (std::size_t p = j + k_round - 2; p > j; --p)
                c.add_layer({Gate::two(p - 1, p, gates::swap2())});
        }
        c.end_unit();
    }
    return c;
}

Circuit build_haar_random(std::size_t n, std::size_t depth, std::uint64_t seed) {
    if (n < 2) throw DomainError("haar: need at least two qubits");
    if (depth < 1) throw DomainError("haar: depth must be at least 1");
    CircuitMeta meta;
    meta.family = "haar";
    meta.steps = depth;
    meta.seed = seed;
    Circuit c(Topology::chain(n), meta);
    Rng rng(seed);
    for (std::size_t d = 0; d < depth; ++d) {
        for (std::size_t off = 0; off < 2; ++off) {
            std::vector<Gate> layer;
            for (std::size_t i = off; i + 1 < n; i += 2)
                layer.push_back(Gate::two(i, i + 1, gates::random_unitary(4, rng)));
            c.add_layer(std::move(layer));
        }
        c.end_unit();
    }
    return c;
}

std::size_t aqft_cnot_count(std::size_t n, std::size_t k_max) {
    if (k_max < 2 || k_max > n) throw DomainError("aqft_cnot_count: require 2 <= k_max <= n");
    const long long k = static_cast<long long>(k_max);
    const long long nn = static_cast<long long>(n);
    // 3[(3k-5)(n - k/2) - (k-2)], kept in integers via the doubled form
    const long long twice = 3 * ((3 * k - 5) * (2 * nn - k) - 2 * (k - 2));
    return static_cast<std::size_t>(twice / 2);
}

std::size_t target_cnot_count(const Circuit& c) {
    if (c.meta().family == "qft") return aqft_cnot_count(c.n(), c.n());
    return 3 * c.two_qubit_gate_count();
}

// ---------------------------------------------------------------------------
// Routing

namespace {

class LayerPacker {
public:
    explicit LayerPacker(Circuit& out) : out_(out) {}

    void push(Gate g) {
        for (std::size_t s : g.sites)
            if (used_.count(s)) {
                flush();
                break;
            }
        for (std::size_t s : g.sites) used_.insert(s);
        current_.push_back(std::move(g));
    }

    void flush() {
        if (!current_.empty()) out_.add_layer(std::move(current_));
        current_.clear();
        used_.clear();
    }

private:
    Circuit& out_;
    std::vector<Gate> current_;
    std::set<std::size_t> used_;
};

} // namespace

Circuit route_to_chain(const Circuit& c) {
    CircuitMeta meta = c.meta();
    meta.routed = true;
    Circuit out(Topology::chain(c.n()), meta);
    LayerPacker packer(out);

    std::size_t next_unit = 0;
    const auto& ends = c.unit_ends();
    for (std::size_t li = 0; li < c.layers().size(); ++li) {
        for (const Gate& g : c.layers()[li]) {
            if (g.sites.size() == 1) {
                packer.push(g);
                continue;
            }
            const std::size_t a = g.sites[0], b = g.sites[1];
            const std::size_t lo = std::min(a, b), hi = std::max(a, b);
            if (hi - lo == 1) {
                packer.push(g);
                continue;
            }
            // walk the higher qubit down next to the lower one and back
            for (std::size_t p = hi - 1; p > lo; --p)
                packer.push(Gate::two(p, p + 1, gates::swap2()));
            Gate moved = g;
            moved.sites = {a == lo ? lo : lo + 1, b == lo ? lo : lo + 1};
            packer.push(std::move(moved));
            for (std::size_t p = lo + 1; p < hi; ++p)
                packer.push(Gate::two(p, p + 1, gates::swap2()));
        }
        while (next_unit < ends.size() && ends[next_unit] == li + 1) {
            packer.flush();
            out.end_unit();
            ++next_unit;
        }
    }
    packer.flush();
    return out;
}

// ---------------------------------------------------------------------------
// Tensor-network lowering

namespace {

// Shared driver: applies routed layers to a flat train, truncating after
// every layer that contains a two-qubit gate.
template <typename PerUnit>
double run_circuit_on_train(const Circuit& routed, std::vector<Tensor>& train, double scale,
                            std::size_t phys, std::size_t d_target, const PerUnit& per_unit) {
    double discarded = 0.0;
    std::size_t next_unit = 0;
    const auto& ends = routed.unit_ends();
    const std::size_t n_layers = routed.layers().size();
    for (std::size_t li = 0; li < n_layers; ++li) {
        bool has_2q = false;
        for (const Gate& g : routed.layers()[li]) {
            if (g.sites.size() == 1) {
                detail::train_apply_1q(train, detail::lift_1q(g.matrix, phys), g.sites[0]);
                continue;
            }
            has_2q = true;
            const std::size_t lo = std::min(g.sites[0], g.sites[1]);
            Tensor m = g.matrix;
            if (g.sites[0] > g.sites[1]) {
                // reorder so the first index is the lower site
                Tensor r({4, 4});
                for (std::size_t i1 = 0; i1 < 2; ++i1)
                    for (std::size_t i2 = 0; i2 < 2; ++i2)
                        for (std::size_t j1 = 0; j1 < 2; ++j1)
                            for (std::size_t j2 = 0; j2 < 2; ++j2)
                                r.data()[(i2 * 2 + i1) * 4 + (j2 * 2 + j1)] =
                                    m.data()[(i1 * 2 + i2) * 4 + (j1 * 2 + j2)];
                m = std::move(r);
            }
            detail::train_apply_2q_split(train, detail::make_split(detail::lift_2q(m, phys), phys), lo);
        }
        if (has_2q && detail::train_max_bond(train) > 1) {
            detail::train_right_canonicalize(train, scale);
            discarded += detail::train_truncate(train, scale, {d_target, -1.0, true});
        }
        while (next_unit < ends.size() && ends[next_unit] == li + 1) {
            per_unit(next_unit);
            ++next_unit;
        }
    }
    return discarded;
}

} // namespace

MpoBuild circuit_to_mpo(const Circuit& c, std::size_t d_target,
                        const std::function<void(std::size_t, const MPO&)>& per_unit) {
    if (d_target < 1) throw DomainError("circuit_to_mpo: d_target must be at least 1");
    const Circuit routed = route_to_chain(c);
    MPO op = MPO::identity(c.n());
    std::vector<Tensor> train = op.raw_sites();
    for (Tensor& t : train) t = std::move(t).reshaped({t.dim(0), 4, t.dim(3)});

    auto observe = [&](std::size_t unit) {
        if (!per_unit) return;
        MPO snapshot;
        snapshot.raw_sites() = train;
        for (Tensor& t : snapshot.raw_sites()) t = std::move(t).reshaped({t.dim(0), 2, 2, t.dim(2)});
        snapshot.set_canonical(Canonical::Left);
        per_unit(unit, snapshot);
    };
    const double discarded = run_circuit_on_train(routed, train, 2.0, 4, d_target, observe);

    for (Tensor& t : train) t = std::move(t).reshaped({t.dim(0), 2, 2, t.dim(2)});
    MPO out;
    out.raw_sites() = std::move(train);
    out.set_canonical(Canonical::Left);
    MpoBuild result{std::move(out), discarded};
    return result;
}

MpsBuild circuit_to_mps(const Circuit& c, const MPS& psi0, std::size_t d_target,
                        const std::function<void(std::size_t, const MPS&)>& per_unit) {
    if (d_target < 1) throw DomainError("circuit_to_mps: d_target must be at least 1");
    if (psi0.size() != c.n()) throw ShapeError("circuit_to_mps: initial state size mismatch");
    const Circuit routed = route_to_chain(c);
    std::vector<Tensor> train = psi0.raw_sites();

    auto observe = [&](std::size_t unit) {
        if (!per_unit) return;
        MPS snapshot;
        snapshot.raw_sites() = train;
        snapshot.set_canonical(Canonical::Left);
        per_unit(unit, snapshot);
    };
    const double discarded = run_circuit_on_train(routed, train, 1.0, 2, d_target, observe);

    MPS out;
    out.raw_sites() = std::move(train);
    out.set_canonical(Canonical::Left);
    MpsBuild result{std::move(out), discarded};
    return result;
}

// ---------------------------------------------------------------------------
// Test support

std::vector<Gate> flat_gates(const Circuit& c) {
    std::vector<Gate> out;
    for (const auto& l : c.layers())
        for (const Gate& g : l) out.push_back(g);
    return out;
}

Tensor circuit_unitary(const Circuit& c) {
    const std::size_t n = c.n();
    if (n > 12) throw DomainError("circuit_unitary: system too large to densify");
    const std::size_t dim = std::size_t(1) << n;
    Tensor u = Tensor::identity(dim);

    auto apply_rows_1q = [&](const Tensor& g, std::size_t site) {
        const std::size_t bit = std::size_t(1) << (n - 1 - site);
        for (std::size_t col = 0; col < dim; ++col)
            for (std::size_t i = 0; i < dim; ++i) {
                if (i & bit) continue;
                const cplx a0 = u.data()[i * dim + col];
                const cplx a1 = u.data()[(i | bit) * dim + col];
                u.data()[i * dim + col] = g.data()[0] * a0 + g.data()[1] * a1;
                u.data()[(i | bit) * dim + col] = g.data()[2] * a0 + g.data()[3] * a1;
            }
    };
    auto apply_rows_2q = [&](const Tensor& g, std::size_t a, std::size_t b) {
        const std::size_t ba = std::size_t(1) << (n - 1 - a);
        const std::size_t bb = std::size_t(1) << (n - 1 - b);
        for (std::size_t col = 0; col < dim; ++col)
            for (std::size_t i = 0; i < dim; ++i) {
                if ((i & ba) || (i & bb)) continue;
                cplx amp[4];
                for (int qa = 0; qa < 2; ++qa)
                    for (int qb = 0; qb < 2; ++qb)
                        amp[qa * 2 + qb] = u.data()[(i | (qa ? ba : 0) | (qb ? bb : 0)) * dim + col];
                for (int qa = 0; qa < 2; ++qa)
                    for (int qb = 0; qb < 2; ++qb) {
                        cplx v = 0.0;
                        for (int k = 0; k < 4; ++k) v += g.data()[(qa * 2 + qb) * 4 + k] * amp[k];
                        u.data()[(i | (qa ? ba : 0) | (qb ? bb : 0)) * dim + col] = v;
                    }
            }
    };

    for (const auto& layer : c.layers())
        for (const Gate& g : layer) {
            if (g.sites.size() == 1)
                apply_rows_1q(g.matrix, g.sites[0]);
            else
                apply_rows_2q(g.matrix, g.sites[0], g.sites[1]);
        }
    return u;
}

bool gates_equivalent(const Circuit& a, const Circuit& b, double tol) {
    const auto ga = flat_gates(a);
    const auto gb = flat_gates(b);
    if (ga.size() != gb.size() || a.n() != b.n()) return false;
    for (std::size_t i = 0; i < ga.size(); ++i) {
        if (ga[i].kind != gb[i].kind || ga[i].sites != gb[i].sites) return false;
        const Tensor& ma = ga[i].matrix;
        const Tensor& mb = gb[i].matrix;
        if (ma.shape() != mb.shape()) return false;
        // align global phases on the largest entry
        std::size_t imax = 0;
        double best = 0.0;
        for (std::size_t k = 0; k < ma.size(); ++k)
            if (std::abs(ma.data()[k]) > best) {
                best = std::abs(ma.data()[k]);
                imax = k;
            }
        if (best < tol) return false;
        const cplx phase = mb.data()[imax] / ma.data()[imax];
        if (std::abs(std::abs(phase) - 1.0) > tol) return false;
        for (std::size_t k = 0; k < ma.size(); ++k)
            if (std::abs(ma.data()[k] * phase - mb.data()[k]) > tol) return false;
    }
    return true;
}

} // namespace qbrick
