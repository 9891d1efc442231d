#include "qbrick/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

#include <json.hpp>

#include "qbrick/errors.hpp"
#include "qbrick/gates.hpp"

namespace qbrick {

using nlohmann::json;

namespace {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = base ^ (0x9e3779b97f4a7c15ull + (a << 17) + (b << 5));
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

template <typename F>
void parallel_indices(std::size_t count, std::size_t threads, F&& body) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&]() {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    for (auto& th : pool) th.join();
}

std::string default_bits(std::size_t n, const std::string& bits) {
    if (bits.empty()) return std::string(n, '0');
    return bits;
}

// Best-of-restarts optimization of one task. Restart 0 takes the warm start
// when one is supplied; the rest draw fresh near-identity initializations.
CompilationResult run_task(const LossSpec& spec, const Topology& topo, std::size_t d_optim,
                           const RunSettings& run, const BrickWallAnsatz* warm,
                           std::uint64_t salt) {
    const std::size_t restarts = std::max<std::size_t>(1, run.restarts);
    std::vector<CompilationResult> results(restarts);
    std::vector<char> ok(restarts, 0);

    parallel_indices(restarts, run.threads, [&](std::size_t r) {
        BrickWallAnsatz start;
        if (r == 0 && warm != nullptr && run.warm_start) {
            start = *warm;
            if (start.depth() < d_optim) start = start.padded(d_optim - start.depth());
        } else {
            start = BrickWallAnsatz::build(topo, d_optim, AnsatzInit::NearIdentity, run.init_sigma,
                                           mix_seed(run.seed, salt, r));
        }
        OptimizeConfig cfg = run.opt;
        cfg.seed = mix_seed(run.seed, salt, r);
        results[r] = optimize(spec, std::move(start), cfg);
        ok[r] = 1;
    });

    std::size_t best = 0;
    for (std::size_t r = 1; r < restarts; ++r)
        if (ok[r] && results[r].f_optim > results[best].f_optim) best = r;
    return std::move(results[best]);
}

json rows_json(const std::vector<SweepRow>& rows) {
    json arr = json::array();
    for (const SweepRow& r : rows)
        arr.push_back({{"d_optim", r.d_optim},
                       {"n_cnot", r.n_cnot},
                       {"f_optim", r.f_optim},
                       {"f_noise", r.f_noise},
                       {"f_all", r.f_all},
                       {"converged", r.converged},
                       {"failed", r.failed},
                       {"iterations", r.iterations},
                       {"wall_time", r.wall_time}});
    return arr;
}

} // namespace

std::size_t PartitionPlan::d_optim_for(std::size_t part) const {
    if (d_optim.empty()) throw PlanError("plan: no ansatz depths given");
    if (d_optim.size() == 1) return d_optim[0];
    if (part >= d_optim.size()) throw PlanError("plan: missing ansatz depth for a part");
    return d_optim[part];
}

std::vector<Circuit> partition(const Circuit& target, const PartitionPlan& plan) {
    if (plan.part_depths.empty()) throw PlanError("plan: no parts");
    std::size_t total = 0;
    for (std::size_t d : plan.part_depths) {
        if (d == 0) throw PlanError("plan: parts must cover at least one depth unit");
        total += d;
    }
    if (total != target.depth_units())
        throw PlanError("plan: part depths must sum to the target depth");

    std::vector<Circuit> parts;
    const auto& ends = target.unit_ends();
    std::size_t unit = 0;
    for (std::size_t p = 0; p < plan.part_depths.size(); ++p) {
        CircuitMeta meta = target.meta();
        meta.steps = plan.part_depths[p];
        Circuit part(target.topology(), meta);
        const std::size_t first_layer = unit == 0 ? 0 : ends[unit - 1];
        const std::size_t last_unit = unit + plan.part_depths[p];
        const std::size_t stop_layer = ends[last_unit - 1];
        std::size_t next_end = unit;
        for (std::size_t li = first_layer; li < stop_layer; ++li) {
            part.add_layer(target.layers()[li]);
            while (next_end < last_unit && ends[next_end] == li + 1) {
                part.end_unit();
                ++next_end;
            }
        }
        unit = last_unit;
        parts.push_back(std::move(part));
    }
    return parts;
}

double noise_fidelity(std::size_t n_cnot, const NoiseModel& m) {
    if (!(m.eps2 > 0.0) || !(m.eps2 < 1.0)) throw DomainError("noise: eps2 must lie in (0, 1)");
    return std::pow(1.0 - m.eps2, static_cast<double>(n_cnot));
}

double overall_fidelity(double f_optim, double f_noise) { return f_optim * f_noise; }

double compression_rate(double target_cnots, double optim_cnots) {
    if (!(optim_cnots > 0.0)) throw DomainError("compression rate: compiled CNOT count must be positive");
    return target_cnots / optim_cnots;
}

// ---------------------------------------------------------------------------
// Depth sweep

DepthSweepReport depth_sweep(const Circuit& target, const std::vector<std::size_t>& depths,
                             const NoiseModel& noise, const RunSettings& run,
                             const SweepOptions& opts) {
    if (depths.empty()) throw DomainError("depth_sweep: no depths given");

    DepthSweepReport report;
    report.family = target.meta().family;
    report.n = target.n();
    report.mode = opts.mode;
    report.eps2 = noise.eps2;
    report.target_cnots = target_cnot_count(target);
    report.target_depth_units = target.depth_units();

    LossSpec spec;
    if (opts.mode == LossSpec::Mode::State) {
        const MPS psi0 = mps_product_state(target.n(), default_bits(target.n(), opts.psi0_bits));
        auto built = circuit_to_mps(target, psi0, run.d_target_bond);
        spec = LossSpec::state(std::move(built.mps), psi0);
    } else {
        auto built = circuit_to_mpo(target, run.d_target_bond);
        spec = LossSpec::unitary(std::move(built.mpo));
    }

    std::vector<std::size_t> order = depths;
    std::sort(order.begin(), order.end());

    const BrickWallAnsatz* warm = nullptr;
    BrickWallAnsatz warm_store;
    for (std::size_t d : order) {
        SweepRow row;
        row.d_optim = d;
        try {
            CompilationResult res =
                run_task(spec, target.topology(), d, run, warm, /*salt=*/d);
            row.n_cnot = res.ansatz.n_cnot();
            row.f_optim = res.f_optim;
            row.f_noise = noise_fidelity(row.n_cnot, noise);
            row.f_all = overall_fidelity(row.f_optim, row.f_noise);
            row.converged = res.converged;
            row.iterations = res.iterations;
            row.wall_time = res.wall_time;
            warm_store = std::move(res.ansatz);
            warm = &warm_store;
        } catch (const Error&) {
            row.failed = true;
        }
        report.rows.push_back(std::move(row));
    }

    bool have = false;
    for (const SweepRow& r : report.rows) {
        if (r.failed) continue;
        if (!have || r.f_all > report.f_all_max) {
            have = true;
            report.f_all_max = r.f_all;
            report.d_max = r.d_optim;
        }
    }
    if (have) {
        const std::size_t edges = target.topology().edge_count();
        report.gamma = compression_rate(static_cast<double>(report.target_cnots),
                                        static_cast<double>(edges * report.d_max));
    }
    return report;
}

std::vector<AqftBaselineRow> aqft_baseline(std::size_t n, std::size_t d_target_bond,
                                           const NoiseModel& noise) {
    auto reference = circuit_to_mpo(build_qft_core(n), d_target_bond);
    std::vector<AqftBaselineRow> rows;
    for (std::size_t k = 2; k <= n; ++k) {
        auto approx = circuit_to_mpo(build_aqft(n, k), d_target_bond);
        AqftBaselineRow row;
        row.k_max = k;
        row.n_cnot = aqft_cnot_count(n, k);
        row.f_target = fidelity_unitary(reference.mpo, approx.mpo);
        row.f_all = row.f_target * noise_fidelity(row.n_cnot, noise);
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Entanglement traces

EeTrace ee_trace(const Circuit& target, const EeTraceOptions& opts) {
    EeTrace trace;
    trace.cut = target.n() / 2;
    if (opts.state) {
        const MPS psi0 = mps_product_state(target.n(), default_bits(target.n(), opts.psi0_bits));
        circuit_to_mps(target, psi0, opts.d_target_bond,
                       [&](std::size_t, const MPS& psi) {
                           trace.state_ee.push_back(entanglement_entropy(psi, trace.cut));
                       });
    }
    if (opts.op) {
        circuit_to_mpo(target, opts.d_target_bond, [&](std::size_t, const MPO& op) {
            trace.op_ee.push_back(entanglement_entropy(op, trace.cut));
        });
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Multi-part compilation

namespace {

Tensor observable_matrix(const std::string& kind) {
    if (kind == "z") return gates::z();
    if (kind == "zz") return kron(gates::z(), gates::z());
    throw DomainError("observable: expected 'z' or 'zz'");
}

} // namespace

ObservableSeries observable_dynamics(const std::vector<Circuit>& target_parts,
                                     const std::vector<BrickWallAnsatz>& compiled, const MPS& psi0,
                                     const Tensor& observable, std::span<const std::size_t> sites,
                                     std::size_t d_target_bond) {
    if (target_parts.size() != compiled.size())
        throw ShapeError("observable_dynamics: part count mismatch");
    ObservableSeries series;
    std::vector<std::size_t> site_list(sites.begin(), sites.end());

    series.checkpoints.push_back(0);
    series.compiled.push_back(expect_local(psi0, observable, sites));
    series.ideal.push_back(series.compiled.back());

    MPS ideal = psi0;
    MPS approx = psi0;
    std::size_t units = 0;
    for (std::size_t p = 0; p < target_parts.size(); ++p) {
        ideal = circuit_to_mps(target_parts[p], ideal, d_target_bond).mps;
        approx = circuit_to_mps(compiled[p].to_circuit(), approx, d_target_bond).mps;
        units += target_parts[p].depth_units();
        series.checkpoints.push_back(units);
        series.ideal.push_back(expect_local(ideal, observable, site_list));
        series.compiled.push_back(expect_local(approx, observable, site_list));
    }
    return series;
}

CompilationReport compile_circuit(const Circuit& target, const NoiseModel& noise,
                                  const RunSettings& run, const CompileOptions& opts) {
    CompilationReport report;
    report.family = target.meta().family;
    report.n = target.n();
    report.eps2 = noise.eps2;
    report.target_cnots = target_cnot_count(target);

    PartitionPlan plan = opts.plan;
    if (plan.part_depths.empty()) plan.part_depths = {target.depth_units()};
    const std::vector<Circuit> parts = partition(target, plan);

    const MPS psi0 = mps_product_state(target.n(), default_bits(target.n(), opts.psi0_bits));

    std::vector<BrickWallAnsatz> compiled;
    compiled.reserve(parts.size());
    const BrickWallAnsatz* warm = nullptr;
    for (std::size_t p = 0; p < parts.size(); ++p) {
        const std::size_t d_optim = plan.d_optim_for(p);
        const bool state_mode = opts.first_part_state && p == 0;

        LossSpec spec;
        if (state_mode) {
            auto built = circuit_to_mps(parts[p], psi0, run.d_target_bond);
            spec = LossSpec::state(built.mps, psi0);
        } else {
            auto built = circuit_to_mpo(parts[p], run.d_target_bond);
            spec = LossSpec::unitary(std::move(built.mpo));
        }

        // warm-start only across structurally identical unitary parts
        const BrickWallAnsatz* use_warm = nullptr;
        if (warm != nullptr && p >= 1 && !state_mode && parts[p].depth_units() == parts[p - 1].depth_units() &&
            plan.d_optim_for(p) == plan.d_optim_for(p - 1) &&
            !(opts.first_part_state && p == 1))
            use_warm = warm;

        CompilationResult res = run_task(spec, target.topology(), d_optim, run, use_warm, 1000 + p);

        PartResult pr;
        pr.depth_units = parts[p].depth_units();
        pr.d_optim = d_optim;
        pr.mode = state_mode ? LossSpec::Mode::State : LossSpec::Mode::Unitary;
        pr.f_optim = res.f_optim;
        pr.converged = res.converged;
        pr.iterations = res.iterations;
        pr.wall_time = res.wall_time;
        pr.loss_history = std::move(res.loss_history);
        pr.compiled = std::move(res.ansatz);
        report.f_optim_product *= pr.f_optim;
        report.n_cnot += pr.compiled.n_cnot();
        compiled.push_back(pr.compiled);
        warm = &compiled.back();
        report.parts.push_back(std::move(pr));
    }

    report.f_noise = noise_fidelity(report.n_cnot, noise);
    report.f_all = overall_fidelity(report.f_optim_product, report.f_noise);
    report.gamma = compression_rate(static_cast<double>(report.target_cnots),
                                    static_cast<double>(report.n_cnot));

    if (target.n() <= 6) {
        // densified end-to-end cross-check of the composed parts
        Tensor composed = Tensor::identity(std::size_t(1) << target.n());
        for (const BrickWallAnsatz& a : compiled) {
            Tensor u = circuit_unitary(a.to_circuit());
            composed = matmul(u, composed);
        }
        const Tensor exact = circuit_unitary(target);
        if (opts.first_part_state) {
            const Tensor v0 = to_statevector(psi0);
            const Tensor lhs = contract(exact, v0, {{1, 0}});
            const Tensor rhs = contract(composed, v0, {{1, 0}});
            cplx ov = 0.0;
            for (std::size_t i = 0; i < lhs.size(); ++i)
                ov += std::conj(lhs.data()[i]) * rhs.data()[i];
            report.end_to_end_fidelity = std::norm(ov);
        } else {
            cplx tr = 0.0;
            const std::size_t dim = exact.dim(0);
            Tensor prod = matmul(dagger(exact), composed);
            for (std::size_t i = 0; i < dim; ++i) tr += prod.at({i, i});
            report.end_to_end_fidelity = std::abs(tr) / static_cast<double>(dim);
        }
    }

    if (!opts.observable.empty()) {
        report.observable = observable_dynamics(parts, compiled, psi0,
                                                observable_matrix(opts.observable),
                                                opts.observable_sites, run.d_target_bond);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Scaling study

std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ShapeError("fit: need at least two points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) throw DomainError("fit: degenerate abscissae");
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    return {slope, intercept};
}

ScalingReport scaling_study(const std::vector<std::size_t>& ns, double tau, std::size_t d_target,
                            std::size_t d_optim, LossSpec::Mode mode, const NoiseModel& noise,
                            const RunSettings& run) {
    (void)noise;
    if (ns.size() < 3) throw DomainError("scaling_study: need at least three sizes");
    ScalingReport report;
    for (std::size_t n : ns) {
        Circuit target = build_trotter_ising(n, tau, d_target);
        LossSpec spec;
        if (mode == LossSpec::Mode::State) {
            const MPS psi0 = mps_product_state(n, std::string(n, '0'));
            auto built = circuit_to_mps(target, psi0, run.d_target_bond);
            spec = LossSpec::state(std::move(built.mps), psi0);
        } else {
            auto built = circuit_to_mpo(target, run.d_target_bond);
            spec = LossSpec::unitary(std::move(built.mpo));
        }
        CompilationResult res = run_task(spec, target.topology(), d_optim, run, nullptr, n);
        report.points.push_back({n, res.f_optim, 1.0 - res.f_optim});
    }

    std::vector<double> lx, ly;
    for (const ScalingPoint& p : report.points)
        if (p.infidelity > 0.0) {
            lx.push_back(std::log(static_cast<double>(p.n)));
            ly.push_back(std::log(p.infidelity));
        }
    report.used = lx.size();
    if (lx.size() >= 2) {
        auto [slope, intercept] = loglog_fit(lx, ly);
        report.alpha = slope;
        report.log_c = intercept;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Report rendering

std::string DepthSweepReport::to_json() const {
    json j;
    j["report"] = "depth_sweep";
    j["family"] = family;
    j["n"] = n;
    j["mode"] = mode == LossSpec::Mode::State ? "state" : "unitary";
    j["eps2"] = eps2;
    j["target_cnots"] = target_cnots;
    j["target_depth_units"] = target_depth_units;
    j["rows"] = rows_json(rows);
    j["d_max"] = d_max;
    j["f_all_max"] = f_all_max;
    j["gamma"] = gamma;
    j["ee_cut_note"] = "entropies reported at the half-chain cut floor(n/2)";
    return j.dump(2);
}

std::string DepthSweepReport::to_csv() const {
    std::string out = "d_optim,n_cnot,f_optim,f_noise,f_all\n";
    char buf[160];
    for (const SweepRow& r : rows) {
        if (r.failed) continue;
        std::snprintf(buf, sizeof buf, "%zu,%zu,%.10g,%.10g,%.10g\n", r.d_optim, r.n_cnot,
                      r.f_optim, r.f_noise, r.f_all);
        out += buf;
    }
    return out;
}

std::string CompilationReport::to_json() const {
    json j;
    j["report"] = "compile";
    j["family"] = family;
    j["n"] = n;
    j["eps2"] = eps2;
    json parts_j = json::array();
    for (const PartResult& p : parts) {
        parts_j.push_back({{"depth_units", p.depth_units},
                           {"d_optim", p.d_optim},
                           {"mode", p.mode == LossSpec::Mode::State ? "state" : "unitary"},
                           {"f_optim", p.f_optim},
                           {"converged", p.converged},
                           {"iterations", p.iterations},
                           {"wall_time", p.wall_time},
                           {"n_cnot", p.compiled.n_cnot()}});
    }
    j["parts"] = std::move(parts_j);
    j["f_optim_product"] = f_optim_product;
    if (end_to_end_fidelity >= 0.0) j["end_to_end_fidelity"] = end_to_end_fidelity;
    j["n_cnot"] = n_cnot;
    j["target_cnots"] = target_cnots;
    j["gamma"] = gamma;
    j["f_noise"] = f_noise;
    j["f_all"] = f_all;
    if (observable) {
        j["observable"] = {{"checkpoints", observable->checkpoints},
                           {"compiled", observable->compiled},
                           {"ideal", observable->ideal}};
    }
    return j.dump(2);
}

std::string ScalingReport::to_json() const {
    json j;
    j["report"] = "scaling";
    json pts = json::array();
    for (const ScalingPoint& p : points)
        pts.push_back({{"n", p.n}, {"f_optim", p.f_optim}, {"infidelity", p.infidelity}});
    j["points"] = std::move(pts);
    j["alpha"] = alpha;
    j["log_c"] = log_c;
    j["points_in_fit"] = used;
    return j.dump(2);
}

} // namespace qbrick
