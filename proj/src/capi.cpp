#include "qbrick.h"

#include <cstring>
#include <string>

#include <json.hpp>

#include "qbrick/circuit.hpp"
#include "qbrick/errors.hpp"
#include "qbrick/pipeline.hpp"
#include "qbrick/qasm.hpp"
#include "qbrick/serialize.hpp"

using namespace qbrick;
using nlohmann::json;

struct qbk_circuit {
    Circuit value;
};

struct qbk_report {
    bool is_sweep = false;
    DepthSweepReport sweep;
    CompilationReport compile;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename F>
int guarded(F&& f) {
    try {
        f();
        return QBK_OK;
    } catch (const ShapeError& e) {
        g_last_error = e.what();
        return QBK_ERR_SHAPE;
    } catch (const DomainError& e) {
        g_last_error = e.what();
        return QBK_ERR_DOMAIN;
    } catch (const TopologyError& e) {
        g_last_error = e.what();
        return QBK_ERR_TOPOLOGY;
    } catch (const PlanError& e) {
        g_last_error = e.what();
        return QBK_ERR_PLAN;
    } catch (const DecompositionError& e) {
        g_last_error = e.what();
        return QBK_ERR_DECOMPOSITION;
    } catch (const UnsupportedGateError& e) {
        g_last_error = e.what();
        return QBK_ERR_UNSUPPORTED_GATE;
    } catch (const IoError& e) {
        g_last_error = e.what();
        return QBK_ERR_IO;
    } catch (const json::exception& e) {
        g_last_error = std::string("config: ") + e.what();
        return QBK_ERR_INVALID;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return QBK_ERR_INTERNAL;
    }
}

int require(bool ok, const char* message) {
    if (ok) return QBK_OK;
    g_last_error = message;
    return QBK_ERR_INVALID;
}

json parse_config(const char* text) {
    if (text == nullptr || *text == '\0') return json::object();
    json j = json::parse(text);
    if (!j.is_object()) throw IoError("config: expected a JSON object");
    return j;
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok) throw IoError(std::string(where) + ": unknown key '" + it.key() + "'");
    }
}

RunSettings run_settings_from(const json& j) {
    RunSettings run;
    run.d_target_bond = j.value("d_target", std::size_t(128));
    run.restarts = j.value("restarts", std::size_t(3));
    run.seed = j.value("seed", std::uint64_t(1));
    run.threads = j.value("threads", std::size_t(1));
    run.warm_start = j.value("warm_start", true);
    run.init_sigma = j.value("init_sigma", 0.01);
    run.opt.max_iters = j.value("max_iters", std::size_t(20000));
    run.opt.tol = j.value("tol", 1e-7);
    run.opt.patience = j.value("patience", std::size_t(500));
    run.opt.adam.lr = j.value("lr", 1e-3);
    run.opt.adam.beta1 = j.value("beta1", 0.9);
    run.opt.adam.beta2 = j.value("beta2", 0.999);
    run.opt.adam.eps = j.value("adam_eps", 1e-8);
    run.opt.engine.d_target = run.d_target_bond;
    if (j.contains("engine")) {
        const json& e = j.at("engine");
        reject_unknown(e, {"value_cap", "value_rtol", "grad_cap", "grad_rtol", "precise_every"},
                       "config.engine");
        run.opt.engine.value_cap = e.value("value_cap", std::size_t(0));
        run.opt.engine.value_rtol = e.value("value_rtol", -1.0);
        run.opt.engine.grad_cap = e.value("grad_cap", std::size_t(0));
        run.opt.engine.grad_rtol = e.value("grad_rtol", -1.0);
        run.opt.precise_every = e.value("precise_every", std::size_t(25));
    }
    return run;
}

NoiseModel noise_from(const json& j) {
    NoiseModel m;
    if (j.contains("noise")) {
        reject_unknown(j.at("noise"), {"eps2"}, "config.noise");
        m.eps2 = j.at("noise").value("eps2", 4e-3);
    }
    return m;
}

const std::vector<std::string> kRunKeys = {
    "d_target", "restarts", "seed",  "threads", "warm_start", "init_sigma", "max_iters",
    "tol",      "patience", "lr",    "beta1",   "beta2",      "adam_eps",   "engine",
    "noise",    "mode",     "psi0"};

} // namespace

extern "C" {

const char* qbk_version(void) { return "0.1.0"; }

const char* qbk_last_error(void) { return g_last_error.c_str(); }

void qbk_string_free(char* s) { delete[] s; }
void qbk_circuit_free(qbk_circuit* c) { delete c; }
void qbk_report_free(qbk_report* r) { delete r; }

int qbk_circuit_ising(int n, double tau, int steps, qbk_circuit** out) {
    if (int rc = require(out && n > 0 && steps >= 0, "ising: bad arguments")) return rc;
    return guarded([&]() {
        *out = new qbk_circuit{build_trotter_ising(static_cast<std::size_t>(n), tau,
                                                   static_cast<std::size_t>(steps))};
    });
}

int qbk_circuit_ising_grid(int rows, int cols, double tau, int steps, qbk_circuit** out) {
    if (int rc = require(out && rows > 0 && cols > 0 && steps >= 0, "ising grid: bad arguments"))
        return rc;
    return guarded([&]() {
        *out = new qbk_circuit{build_trotter_ising_grid(static_cast<std::size_t>(rows),
                                                        static_cast<std::size_t>(cols), tau,
                                                        static_cast<std::size_t>(steps))};
    });
}

int qbk_circuit_qft(int n, qbk_circuit** out) {
    if (int rc = require(out && n > 0, "qft: bad arguments")) return rc;
    return guarded([&]() { *out = new qbk_circuit{build_qft_core(static_cast<std::size_t>(n))}; });
}

int qbk_circuit_aqft(int n, int k_max, qbk_circuit** out) {
    if (int rc = require(out && n > 0 && k_max > 0, "aqft: bad arguments")) return rc;
    return guarded([&]() {
        *out = new qbk_circuit{build_aqft(static_cast<std::size_t>(n), static_cast<std::size_t>(k_max))};
    });
}

int qbk_circuit_haar(int n, int depth, uint64_t seed, qbk_circuit** out) {
    if (int rc = require(out && n > 0 && depth > 0, "haar: bad arguments")) return rc;
    return guarded([&]() {
        *out = new qbk_circuit{build_haar_random(static_cast<std::size_t>(n),
                                                 static_cast<std::size_t>(depth), seed)};
    });
}

int qbk_circuit_num_qubits(const qbk_circuit* c, int* out) {
    if (int rc = require(c && out, "num_qubits: null argument")) return rc;
    *out = static_cast<int>(c->value.n());
    return QBK_OK;
}

int qbk_circuit_depth_units(const qbk_circuit* c, int* out) {
    if (int rc = require(c && out, "depth_units: null argument")) return rc;
    *out = static_cast<int>(c->value.depth_units());
    return QBK_OK;
}

int qbk_circuit_two_qubit_gates(const qbk_circuit* c, long long* out) {
    if (int rc = require(c && out, "two_qubit_gates: null argument")) return rc;
    *out = static_cast<long long>(c->value.two_qubit_gate_count());
    return QBK_OK;
}

int qbk_circuit_target_cnots(const qbk_circuit* c, long long* out) {
    if (int rc = require(c && out, "target_cnots: null argument")) return rc;
    return guarded([&]() { *out = static_cast<long long>(target_cnot_count(c->value)); });
}

int qbk_aqft_cnot_count(int n, int k_max, long long* out) {
    if (int rc = require(out && n > 0 && k_max > 0, "aqft_cnot_count: bad arguments")) return rc;
    return guarded([&]() {
        *out = static_cast<long long>(
            aqft_cnot_count(static_cast<std::size_t>(n), static_cast<std::size_t>(k_max)));
    });
}

int qbk_circuit_to_json(const qbk_circuit* c, char** out) {
    if (int rc = require(c && out, "to_json: null argument")) return rc;
    return guarded([&]() { *out = dup_string(circuit_to_json(c->value)); });
}

int qbk_circuit_from_json(const char* text, qbk_circuit** out) {
    if (int rc = require(text && out, "from_json: null argument")) return rc;
    return guarded([&]() { *out = new qbk_circuit{circuit_from_json(text)}; });
}

int qbk_circuit_to_qasm(const qbk_circuit* c, char** out) {
    if (int rc = require(c && out, "to_qasm: null argument")) return rc;
    return guarded([&]() { *out = dup_string(to_qasm(c->value)); });
}

int qbk_circuit_from_qasm(const char* text, qbk_circuit** out) {
    if (int rc = require(text && out, "from_qasm: null argument")) return rc;
    return guarded([&]() { *out = new qbk_circuit{from_qasm(text)}; });
}

int qbk_ee_trace(const qbk_circuit* c, const char* options_json, char** out_json) {
    if (int rc = require(c && out_json, "ee_trace: null argument")) return rc;
    return guarded([&]() {
        const json cfg = parse_config(options_json);
        reject_unknown(cfg, {"state", "op", "psi0", "d_target"}, "ee_trace options");
        EeTraceOptions opts;
        opts.state = cfg.value("state", true);
        opts.op = cfg.value("op", false);
        opts.psi0_bits = cfg.value("psi0", std::string());
        opts.d_target_bond = cfg.value("d_target", std::size_t(128));
        const EeTrace t = ee_trace(c->value, opts);
        json j;
        j["cut"] = t.cut;
        j["state_ee"] = t.state_ee;
        j["op_ee"] = t.op_ee;
        *out_json = dup_string(j.dump(2));
    });
}

int qbk_compile(const qbk_circuit* c, const char* config_json, qbk_report** out) {
    if (int rc = require(c && out, "compile: null argument")) return rc;
    return guarded([&]() {
        json cfg = parse_config(config_json);
        {
            json probe = cfg;
            for (const auto& k : kRunKeys) probe.erase(k);
            probe.erase("plan");
            probe.erase("first_part_state");
            probe.erase("observable");
            if (!probe.empty())
                throw IoError("compile config: unknown key '" + probe.begin().key() + "'");
        }
        const RunSettings run = run_settings_from(cfg);
        const NoiseModel noise = noise_from(cfg);

        CompileOptions opts;
        opts.psi0_bits = cfg.value("psi0", std::string());
        if (cfg.contains("mode")) {
            const std::string mode = cfg.at("mode").get<std::string>();
            if (mode == "unitary")
                opts.first_part_state = false;
            else if (mode == "state")
                opts.first_part_state = true;
            else
                throw IoError("compile config: mode must be 'state' or 'unitary'");
        }
        if (cfg.contains("first_part_state")) opts.first_part_state = cfg.at("first_part_state").get<bool>();
        if (cfg.contains("plan")) {
            const json& p = cfg.at("plan");
            reject_unknown(p, {"parts", "d_optim"}, "config.plan");
            if (p.contains("parts")) opts.plan.part_depths = p.at("parts").get<std::vector<std::size_t>>();
            if (p.contains("d_optim")) {
                if (p.at("d_optim").is_array())
                    opts.plan.d_optim = p.at("d_optim").get<std::vector<std::size_t>>();
                else
                    opts.plan.d_optim = {p.at("d_optim").get<std::size_t>()};
            }
        }
        if (opts.plan.d_optim.empty()) opts.plan.d_optim = {8};
        if (cfg.contains("observable")) {
            const json& o = cfg.at("observable");
            reject_unknown(o, {"kind", "sites"}, "config.observable");
            opts.observable = o.at("kind").get<std::string>();
            opts.observable_sites = o.at("sites").get<std::vector<std::size_t>>();
        }
        auto* report = new qbk_report;
        report->is_sweep = false;
        report->compile = compile_circuit(c->value, noise, run, opts);
        *out = report;
    });
}

int qbk_sweep(const qbk_circuit* c, const char* config_json, qbk_report** out) {
    if (int rc = require(c && out, "sweep: null argument")) return rc;
    return guarded([&]() {
        json cfg = parse_config(config_json);
        {
            json probe = cfg;
            for (const auto& k : kRunKeys) probe.erase(k);
            probe.erase("depths");
            if (!probe.empty())
                throw IoError("sweep config: unknown key '" + probe.begin().key() + "'");
        }
        const RunSettings run = run_settings_from(cfg);
        const NoiseModel noise = noise_from(cfg);
        SweepOptions opts;
        opts.psi0_bits = cfg.value("psi0", std::string());
        const std::string mode = cfg.value("mode", std::string("unitary"));
        if (mode == "state")
            opts.mode = LossSpec::Mode::State;
        else if (mode == "unitary")
            opts.mode = LossSpec::Mode::Unitary;
        else
            throw IoError("sweep config: mode must be 'state' or 'unitary'");

        std::vector<std::size_t> depths;
        if (cfg.contains("depths"))
            depths = cfg.at("depths").get<std::vector<std::size_t>>();
        else
            for (std::size_t d = 1; d <= 8; ++d) depths.push_back(d);

        auto* report = new qbk_report;
        report->is_sweep = true;
        report->sweep = depth_sweep(c->value, depths, noise, run, opts);
        *out = report;
    });
}

int qbk_aqft_baseline(int n, const char* config_json, char** out_json) {
    if (int rc = require(out_json && n > 0, "aqft_baseline: bad arguments")) return rc;
    return guarded([&]() {
        const json cfg = parse_config(config_json);
        reject_unknown(cfg, {"d_target", "noise"}, "aqft_baseline options");
        const NoiseModel noise = noise_from(cfg);
        const auto rows =
            aqft_baseline(static_cast<std::size_t>(n), cfg.value("d_target", std::size_t(128)), noise);
        json arr = json::array();
        for (const auto& r : rows)
            arr.push_back({{"k_max", r.k_max},
                           {"n_cnot", r.n_cnot},
                           {"f_target", r.f_target},
                           {"f_all", r.f_all}});
        json j;
        j["report"] = "aqft_baseline";
        j["n"] = n;
        j["eps2"] = noise.eps2;
        j["rows"] = std::move(arr);
        *out_json = dup_string(j.dump(2));
    });
}

int qbk_report_json(const qbk_report* r, char** out) {
    if (int rc = require(r && out, "report_json: null argument")) return rc;
    return guarded(
        [&]() { *out = dup_string(r->is_sweep ? r->sweep.to_json() : r->compile.to_json()); });
}

int qbk_report_csv(const qbk_report* r, char** out) {
    if (int rc = require(r && out, "report_csv: null argument")) return rc;
    if (int rc = require(r->is_sweep, "report_csv: only sweep reports carry a CSV table")) return rc;
    return guarded([&]() { *out = dup_string(r->sweep.to_csv()); });
}

int qbk_report_part_count(const qbk_report* r, int* out) {
    if (int rc = require(r && out, "part_count: null argument")) return rc;
    *out = r->is_sweep ? 0 : static_cast<int>(r->compile.parts.size());
    return QBK_OK;
}

int qbk_report_part_circuit(const qbk_report* r, int part, qbk_circuit** out) {
    if (int rc = require(r && out, "part_circuit: null argument")) return rc;
    if (int rc = require(!r->is_sweep, "part_circuit: not a compile report")) return rc;
    if (int rc = require(part >= 0 && part < static_cast<int>(r->compile.parts.size()),
                         "part_circuit: part index out of range"))
        return rc;
    return guarded([&]() {
        *out = new qbk_circuit{r->compile.parts[static_cast<std::size_t>(part)].compiled.to_circuit()};
    });
}

} // extern "C"
