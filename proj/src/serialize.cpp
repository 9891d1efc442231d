#include "qbrick/serialize.hpp"

#include <fstream>

#include <json.hpp>

#include "qbrick/errors.hpp"
#include "qbrick/gates.hpp"

namespace qbrick {

using nlohmann::json;

namespace {

json matrix_to_json(const Tensor& m) {
    json arr = json::array();
    for (const cplx& v : m.values()) arr.push_back(json::array({v.real(), v.imag()}));
    return arr;
}

Tensor matrix_from_json(const json& arr, std::size_t dim) {
    if (!arr.is_array() || arr.size() != dim * dim)
        throw IoError("circuit json: matrix entry count mismatch");
    std::vector<cplx> data;
    data.reserve(arr.size());
    for (const auto& e : arr) {
        if (!e.is_array() || e.size() != 2) throw IoError("circuit json: complex entries are [re, im]");
        data.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    return Tensor({dim, dim}, std::move(data));
}

} // namespace

std::string circuit_to_json(const Circuit& c) {
    json j;
    j["format"] = "qbrick-circuit-v1";
    j["n"] = c.n();
    if (c.topology().kind == Topology::Kind::Chain) {
        j["topology"] = {{"kind", "chain"}};
    } else {
        j["topology"] = {{"kind", "grid"}, {"rows", c.topology().rows}, {"cols", c.topology().cols}};
    }
    const CircuitMeta& m = c.meta();
    j["metadata"] = {{"family", m.family}, {"tau", m.tau},   {"steps", m.steps},
                     {"k_max", m.k_max},   {"seed", m.seed}, {"routed", m.routed}};
    j["unit_ends"] = c.unit_ends();

    json layers = json::array();
    for (const auto& layer : c.layers()) {
        json jl = json::array();
        for (const Gate& g : layer) {
            json jg;
            jg["sites"] = g.sites;
            switch (g.kind) {
                case GateKind::SingleQubit:
                    jg["kind"] = "single_qubit";
                    jg["matrix"] = matrix_to_json(g.matrix);
                    break;
                case GateKind::Cnot: jg["kind"] = "cnot"; break;
                case GateKind::TwoQubit:
                    jg["kind"] = "two_qubit";
                    jg["matrix"] = matrix_to_json(g.matrix);
                    break;
            }
            jl.push_back(std::move(jg));
        }
        layers.push_back(std::move(jl));
    }
    j["layers"] = std::move(layers);
    return j.dump(2);
}

Circuit circuit_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("circuit json: parse failure: ") + e.what());
    }
    if (j.value("format", "") != "qbrick-circuit-v1") throw IoError("circuit json: unknown format");

    const std::size_t n = j.at("n").get<std::size_t>();
    Topology topo;
    const auto& jt = j.at("topology");
    if (jt.at("kind") == "chain") {
        topo = Topology::chain(n);
    } else if (jt.at("kind") == "grid") {
        topo = Topology::grid(jt.at("rows").get<std::size_t>(), jt.at("cols").get<std::size_t>());
        if (topo.n != n) throw IoError("circuit json: grid size does not match n");
    } else {
        throw IoError("circuit json: unknown topology kind");
    }

    CircuitMeta meta;
    if (j.contains("metadata")) {
        const auto& jm = j.at("metadata");
        meta.family = jm.value("family", "custom");
        meta.tau = jm.value("tau", 0.0);
        meta.steps = jm.value("steps", std::size_t(0));
        meta.k_max = jm.value("k_max", std::size_t(0));
        meta.seed = jm.value("seed", std::uint64_t(0));
        meta.routed = jm.value("routed", false);
    }

    Circuit c(topo, meta);
    std::vector<std::size_t> unit_ends = j.value("unit_ends", std::vector<std::size_t>{});
    std::size_t next_unit = 0;
    const auto& layers = j.at("layers");
    std::size_t layer_idx = 0;
    for (const auto& jl : layers) {
        std::vector<Gate> gates;
        for (const auto& jg : jl) {
            const std::string kind = jg.at("kind").get<std::string>();
            const std::vector<std::size_t> sites = jg.at("sites").get<std::vector<std::size_t>>();
            if (kind == "single_qubit") {
                if (sites.size() != 1) throw IoError("circuit json: single_qubit takes one site");
                gates.push_back(Gate::single(sites[0], matrix_from_json(jg.at("matrix"), 2)));
            } else if (kind == "cnot") {
                if (sites.size() != 2) throw IoError("circuit json: cnot takes two sites");
                gates.push_back(Gate::cnot(sites[0], sites[1]));
            } else if (kind == "two_qubit") {
                if (sites.size() != 2) throw IoError("circuit json: two_qubit takes two sites");
                gates.push_back(Gate::two(sites[0], sites[1], matrix_from_json(jg.at("matrix"), 4)));
            } else {
                throw IoError("circuit json: unknown gate kind '" + kind + "'");
            }
        }
        c.add_layer(std::move(gates));
        ++layer_idx;
        while (next_unit < unit_ends.size() && unit_ends[next_unit] == layer_idx) {
            c.end_unit();
            ++next_unit;
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// Binary tensor trains

namespace {

constexpr char kMpsMagic[] = "QBRKMPS1";
constexpr char kMpoMagic[] = "QBRKMPO1";
constexpr char kCkptMagic[] = "QBRKCKP1";

void put_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f64(std::ostream& os, double v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint64_t get_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw IoError("binary read: truncated file");
    return v;
}

double get_f64(std::istream& is) {
    double v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw IoError("binary read: truncated file");
    return v;
}

void put_tensor(std::ostream& os, const Tensor& t) {
    put_u64(os, t.rank());
    for (std::size_t d : t.shape()) put_u64(os, d);
    os.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(cplx)));
}

Tensor get_tensor(std::istream& is) {
    const std::uint64_t rank = get_u64(is);
    if (rank > 8) throw IoError("binary read: implausible tensor rank");
    std::vector<std::size_t> shape(rank);
    std::size_t total = 1;
    for (auto& d : shape) {
        d = static_cast<std::size_t>(get_u64(is));
        if (d == 0 || d > (1u << 24)) throw IoError("binary read: implausible dimension");
        total *= d;
    }
    Tensor t(std::move(shape));
    is.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(total * sizeof(cplx)));
    if (!is) throw IoError("binary read: truncated tensor data");
    return t;
}

void put_string(std::ostream& os, const std::string& s) {
    put_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
    const std::uint64_t len = get_u64(is);
    if (len > (1u << 28)) throw IoError("binary read: implausible string length");
    std::string s(len, '\0');
    is.read(s.data(), static_cast<std::streamsize>(len));
    if (!is) throw IoError("binary read: truncated string");
    return s;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    return os;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "' for reading");
    return is;
}

void check_magic(std::istream& is, const char* magic) {
    char buf[8];
    is.read(buf, 8);
    if (!is || std::string(buf, 8) != std::string(magic, 8))
        throw IoError("binary read: wrong magic string");
}

template <typename T>
void save_train(const T& obj, const char* magic, const std::string& path) {
    auto os = open_out(path);
    os.write(magic, 8);
    put_u64(os, obj.size());
    put_u64(os, static_cast<std::uint64_t>(obj.canonical()));
    for (std::size_t i = 0; i < obj.size(); ++i) put_tensor(os, obj.site(i));
    if (!os) throw IoError("write failure on '" + path + "'");
}

} // namespace

void save_mps(const MPS& psi, const std::string& path) { save_train(psi, kMpsMagic, path); }

MPS load_mps(const std::string& path) {
    auto is = open_in(path);
    check_magic(is, kMpsMagic);
    const std::uint64_t n = get_u64(is);
    const auto canon = static_cast<Canonical>(get_u64(is));
    MPS psi;
    for (std::uint64_t i = 0; i < n; ++i) {
        Tensor t = get_tensor(is);
        if (t.rank() != 3 || t.dim(1) != 2) throw IoError("mps file: site tensors must be (l,2,r)");
        psi.raw_sites().push_back(std::move(t));
    }
    psi.set_canonical(canon);
    return psi;
}

void save_mpo(const MPO& op, const std::string& path) { save_train(op, kMpoMagic, path); }

MPO load_mpo(const std::string& path) {
    auto is = open_in(path);
    check_magic(is, kMpoMagic);
    const std::uint64_t n = get_u64(is);
    const auto canon = static_cast<Canonical>(get_u64(is));
    MPO op;
    for (std::uint64_t i = 0; i < n; ++i) {
        Tensor t = get_tensor(is);
        if (t.rank() != 4 || t.dim(1) != 2 || t.dim(2) != 2)
            throw IoError("mpo file: site tensors must be (l,2,2,r)");
        op.raw_sites().push_back(std::move(t));
    }
    op.set_canonical(canon);
    return op;
}

// ---------------------------------------------------------------------------
// Optimizer checkpoints

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    auto os = open_out(path);
    os.write(kCkptMagic, 8);

    const Topology& topo = ck.ansatz.topology();
    put_u64(os, topo.kind == Topology::Kind::Chain ? 0 : 1);
    put_u64(os, topo.n);
    put_u64(os, topo.rows);
    put_u64(os, topo.cols);
    put_u64(os, ck.ansatz.depth());
    put_u64(os, ck.ansatz.param_count());
    for (const Tensor& p : ck.ansatz.params()) put_tensor(os, p);

    put_u64(os, ck.opt.t);
    put_f64(os, ck.opt.hp.lr);
    put_f64(os, ck.opt.hp.beta1);
    put_f64(os, ck.opt.hp.beta2);
    put_f64(os, ck.opt.hp.eps);
    put_u64(os, ck.opt.m.size());
    for (const Tensor& t : ck.opt.m) put_tensor(os, t);
    for (const Tensor& t : ck.opt.v) put_tensor(os, t);

    put_u64(os, ck.iteration);
    put_u64(os, ck.loss_history.size());
    for (double x : ck.loss_history) put_f64(os, x);
    put_u64(os, ck.best_params.size());
    for (const Tensor& t : ck.best_params) put_tensor(os, t);
    put_f64(os, ck.best_fidelity);
    put_f64(os, ck.conv_best_loss);
    put_u64(os, ck.last_gain_iter);
    put_f64(os, ck.cheap_best_fidelity);
    put_u64(os, ck.last_confirm_iter);
    put_u64(os, ck.confirm_pending ? 1 : 0);
    put_u64(os, ck.seed);
    put_string(os, ck.rng_state);
    if (!os) throw IoError("write failure on '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    auto is = open_in(path);
    check_magic(is, kCkptMagic);

    Checkpoint ck;
    const std::uint64_t kind = get_u64(is);
    const std::uint64_t n = get_u64(is);
    const std::uint64_t rows = get_u64(is);
    const std::uint64_t cols = get_u64(is);
    const std::uint64_t depth = get_u64(is);
    Topology topo = kind == 0 ? Topology::chain(n) : Topology::grid(rows, cols);
    ck.ansatz = BrickWallAnsatz::build(topo, depth, AnsatzInit::Identity);
    const std::uint64_t n_params = get_u64(is);
    if (n_params != ck.ansatz.param_count()) throw IoError("checkpoint: parameter count mismatch");
    for (std::uint64_t i = 0; i < n_params; ++i) ck.ansatz.set_param(i, get_tensor(is));

    ck.opt.t = get_u64(is);
    ck.opt.hp.lr = get_f64(is);
    ck.opt.hp.beta1 = get_f64(is);
    ck.opt.hp.beta2 = get_f64(is);
    ck.opt.hp.eps = get_f64(is);
    const std::uint64_t n_m = get_u64(is);
    ck.opt.m.resize(n_m);
    ck.opt.v.resize(n_m);
    for (auto& t : ck.opt.m) t = get_tensor(is);
    for (auto& t : ck.opt.v) t = get_tensor(is);

    ck.iteration = get_u64(is);
    ck.loss_history.resize(get_u64(is));
    for (double& x : ck.loss_history) x = get_f64(is);
    ck.best_params.resize(get_u64(is));
    for (auto& t : ck.best_params) t = get_tensor(is);
    ck.best_fidelity = get_f64(is);
    ck.conv_best_loss = get_f64(is);
    ck.last_gain_iter = get_u64(is);
    ck.cheap_best_fidelity = get_f64(is);
    ck.last_confirm_iter = get_u64(is);
    ck.confirm_pending = get_u64(is) != 0;
    ck.seed = get_u64(is);
    ck.rng_state = get_string(is);
    return ck;
}

} // namespace qbrick
