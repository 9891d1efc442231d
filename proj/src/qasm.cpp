#include "qbrick/qasm.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qbrick/errors.hpp"
#include "qbrick/gates.hpp"

namespace qbrick {

namespace {

std::string fmt_angle(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

bool close(const Tensor& a, const Tensor& b, double tol = 1e-12) {
    return a.shape() == b.shape() && (a - b).max_abs() <= tol;
}

// the named qelib1 single-qubit gates we recognize on output
const std::vector<std::pair<const char*, Tensor>>& named_1q() {
    static const std::vector<std::pair<const char*, Tensor>> table = [] {
        std::vector<std::pair<const char*, Tensor>> t;
        t.emplace_back("id", gates::i2());
        t.emplace_back("h", gates::h());
        t.emplace_back("x", gates::x());
        t.emplace_back("y", gates::y());
        t.emplace_back("z", gates::z());
        t.emplace_back("s", gates::phase(M_PI / 2));
        t.emplace_back("sdg", gates::phase(-M_PI / 2));
        t.emplace_back("t", gates::phase(M_PI / 4));
        t.emplace_back("tdg", gates::phase(-M_PI / 4));
        return t;
    }();
    return table;
}

struct U3Angles {
    double theta, phi, lambda;
};

// ZYZ angles with the u3 phase convention (u3(theta,phi,lambda) equals the
// gate up to a global phase).
U3Angles u3_angles(const Tensor& u) {
    const cplx a = u.at({0, 0});
    const cplx b = u.at({0, 1});
    const cplx c = u.at({1, 0});
    U3Angles r{};
    if (std::abs(a) > 1e-12) {
        const cplx g = a / std::abs(a);
        const cplx v10 = c / g;
        const cplx v01 = b / g;
        r.theta = 2.0 * std::atan2(std::abs(v10), std::abs(a));
        r.phi = std::abs(v10) > 1e-12 ? std::arg(v10) : 0.0;
        r.lambda = std::abs(v01) > 1e-12 ? std::arg(-v01) : 0.0;
    } else {
        r.theta = M_PI;
        r.lambda = 0.0;
        const cplx g = -b / std::abs(b);
        r.phi = std::arg(c / g);
    }
    return r;
}

void emit_1q(std::ostringstream& os, const Tensor& m, std::size_t site) {
    for (const auto& [name, ref] : named_1q()) {
        // compare up to a global phase anchored on the largest entry
        std::size_t imax = 0;
        double best = 0.0;
        for (std::size_t k = 0; k < 4; ++k)
            if (std::abs(ref.data()[k]) > best) {
                best = std::abs(ref.data()[k]);
                imax = k;
            }
        if (std::abs(m.data()[imax]) < 1e-12) continue;
        const cplx ph = m.data()[imax] / ref.data()[imax];
        if (std::abs(std::abs(ph) - 1.0) > 1e-12) continue;
        bool match = true;
        for (std::size_t k = 0; k < 4 && match; ++k)
            match = std::abs(ref.data()[k] * ph - m.data()[k]) <= 1e-12;
        if (match) {
            os << name << " q[" << site << "];\n";
            return;
        }
    }
    const U3Angles a = u3_angles(m);
    os << "u3(" << fmt_angle(a.theta) << "," << fmt_angle(a.phi) << "," << fmt_angle(a.lambda)
       << ") q[" << site << "];\n";
}

void emit_2q(std::ostringstream& os, const Gate& g) {
    const std::size_t qa = g.sites[0], qb = g.sites[1];
    if (g.kind == GateKind::Cnot) {
        os << "cx q[" << qa << "],q[" << qb << "];\n";
        return;
    }
    const Tensor& m = g.matrix;
    if (close(m, gates::swap2())) {
        os << "swap q[" << qa << "],q[" << qb << "];\n";
        return;
    }
    // controlled phase: diag(1,1,1,e^{i phi})
    {
        bool diag_ok = true;
        for (std::size_t i = 0; i < 4 && diag_ok; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                if (i != j && std::abs(m.at({i, j})) > 1e-12) {
                    diag_ok = false;
                    break;
                }
        if (diag_ok && std::abs(m.at({0, 0}) - cplx(1.0)) < 1e-12 &&
            std::abs(m.at({1, 1}) - cplx(1.0)) < 1e-12 && std::abs(m.at({2, 2}) - cplx(1.0)) < 1e-12) {
            os << "cu1(" << fmt_angle(std::arg(m.at({3, 3}))) << ") q[" << qa << "],q[" << qb
               << "];\n";
            return;
        }
        // zz interaction diag(p, p*, p*, p): exact cx/rz/cx form
        if (diag_ok) {
            const cplx p = m.at({0, 0});
            if (std::abs(std::abs(p) - 1.0) < 1e-12 && std::abs(m.at({3, 3}) - p) < 1e-12 &&
                std::abs(m.at({1, 1}) - std::conj(p)) < 1e-12 &&
                std::abs(m.at({2, 2}) - std::conj(p)) < 1e-12) {
                const double alpha = std::arg(p);
                os << "cx q[" << qa << "],q[" << qb << "];\n";
                os << "rz(" << fmt_angle(-2.0 * alpha) << ") q[" << qb << "];\n";
                os << "cx q[" << qa << "],q[" << qb << "];\n";
                return;
            }
        }
    }
    throw UnsupportedGateError("qasm export: general two-qubit gates have no OpenQASM 2.0 form here");
}

// --- parser ---------------------------------------------------------------

double parse_angle(const std::string& expr) {
    // numbers, pi, products and quotients thereof, with an optional sign
    std::string s;
    for (char ch : expr)
        if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
    if (s.empty()) throw IoError("qasm: empty angle");
    double sign = 1.0;
    std::size_t pos = 0;
    if (s[0] == '-') {
        sign = -1.0;
        pos = 1;
    } else if (s[0] == '+') {
        pos = 1;
    }
    double value = 1.0;
    bool dividing = false;
    std::string tok;
    auto flush = [&]() {
        if (tok.empty()) throw IoError("qasm: malformed angle '" + expr + "'");
        double x;
        if (tok == "pi") {
            x = M_PI;
        } else {
            try {
                x = std::stod(tok);
            } catch (...) {
                throw IoError("qasm: malformed angle '" + expr + "'");
            }
        }
        value = dividing ? value / x : value * x;
        tok.clear();
    };
    for (; pos < s.size(); ++pos) {
        if (s[pos] == '*' || s[pos] == '/') {
            flush();
            dividing = s[pos] == '/';
        } else {
            tok += s[pos];
        }
    }
    flush();
    return sign * value;
}

struct ParsedGate {
    std::string name;
    std::vector<double> args;
    std::vector<std::size_t> qubits;
};

} // namespace

std::string to_qasm(const Circuit& c) {
    std::ostringstream os;
    os << "OPENQASM 2.0;\n";
    os << "include \"qelib1.inc\";\n";
    os << "qreg q[" << c.n() << "];\n";
    for (const auto& layer : c.layers())
        for (const Gate& g : layer) {
            if (g.sites.size() == 1)
                emit_1q(os, g.matrix, g.sites[0]);
            else
                emit_2q(os, g);
        }
    return os.str();
}

std::string to_qasm(const BrickWallAnsatz& a) { return to_qasm(a.to_circuit()); }

Circuit from_qasm(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t n_qubits = 0;
    std::vector<ParsedGate> gates_parsed;

    while (std::getline(in, line)) {
        if (auto p = line.find("//"); p != std::string::npos) line.erase(p);
        // strip whitespace
        std::string s;
        for (char ch : line)
            if (!std::isspace(static_cast<unsigned char>(ch)) || ch == ' ') s += ch;
        while (!s.empty() && (s.front() == ' ')) s.erase(s.begin());
        while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.pop_back();
        if (s.empty()) continue;
        if (s.rfind("OPENQASM", 0) == 0 || s.rfind("include", 0) == 0) continue;
        if (s.rfind("creg", 0) == 0 || s.rfind("barrier", 0) == 0 || s.rfind("measure", 0) == 0)
            continue;
        if (s.back() != ';') throw IoError("qasm: missing ';' in '" + line + "'");
        s.pop_back();

        if (s.rfind("qreg", 0) == 0) {
            const auto l = s.find('['), r = s.find(']');
            if (l == std::string::npos || r == std::string::npos || r < l)
                throw IoError("qasm: malformed qreg");
            n_qubits = static_cast<std::size_t>(std::stoul(s.substr(l + 1, r - l - 1)));
            continue;
        }

        ParsedGate g;
        std::size_t head_end = s.find_first_of("( ");
        if (head_end == std::string::npos) throw IoError("qasm: malformed statement '" + line + "'");
        g.name = s.substr(0, head_end);
        std::size_t rest = head_end;
        if (s[head_end] == '(') {
            const auto close_paren = s.find(')', head_end);
            if (close_paren == std::string::npos) throw IoError("qasm: missing ')' in '" + line + "'");
            std::string args = s.substr(head_end + 1, close_paren - head_end - 1);
            std::size_t start = 0;
            while (start <= args.size()) {
                auto comma = args.find(',', start);
                if (comma == std::string::npos) comma = args.size();
                g.args.push_back(parse_angle(args.substr(start, comma - start)));
                start = comma + 1;
            }
            rest = close_paren + 1;
        }
        std::string qubits = s.substr(rest);
        std::size_t pos = 0;
        while ((pos = qubits.find('[', pos)) != std::string::npos) {
            const auto r = qubits.find(']', pos);
            if (r == std::string::npos) throw IoError("qasm: malformed qubit ref");
            g.qubits.push_back(static_cast<std::size_t>(std::stoul(qubits.substr(pos + 1, r - pos - 1))));
            pos = r + 1;
        }
        gates_parsed.push_back(std::move(g));
    }
    if (n_qubits == 0) throw IoError("qasm: no qreg declaration");

    CircuitMeta meta;
    meta.family = "imported";
    Circuit c(Topology::chain(n_qubits), meta);
    for (const ParsedGate& g : gates_parsed) {
        auto need = [&](std::size_t q, std::size_t a) {
            if (g.qubits.size() != q || g.args.size() != a)
                throw IoError("qasm: bad operands for '" + g.name + "'");
        };
        if (g.name == "cx") {
            need(2, 0);
            c.add_layer({Gate::cnot(g.qubits[0], g.qubits[1])});
        } else if (g.name == "swap") {
            need(2, 0);
            c.add_layer({Gate::two(g.qubits[0], g.qubits[1], gates::swap2())});
        } else if (g.name == "cu1" || g.name == "cp") {
            need(2, 1);
            c.add_layer({Gate::two(g.qubits[0], g.qubits[1], gates::cphase(g.args[0]))});
        } else if (g.name == "u3" || g.name == "u") {
            need(1, 3);
            c.add_layer({Gate::single(g.qubits[0], gates::u3(g.args[0], g.args[1], g.args[2]))});
        } else if (g.name == "u2") {
            need(1, 2);
            c.add_layer({Gate::single(g.qubits[0], gates::u3(M_PI / 2, g.args[0], g.args[1]))});
        } else if (g.name == "u1" || g.name == "p") {
            need(1, 1);
            c.add_layer({Gate::single(g.qubits[0], gates::phase(g.args[0]))});
        } else if (g.name == "rz") {
            need(1, 1);
            c.add_layer({Gate::single(g.qubits[0], gates::rz(g.args[0]))});
        } else if (g.name == "rx") {
            need(1, 1);
            c.add_layer({Gate::single(g.qubits[0], gates::x_rotation(-g.args[0] / 2))});
        } else if (g.name == "ry") {
            need(1, 1);
            c.add_layer({Gate::single(g.qubits[0], gates::u3(g.args[0], 0.0, 0.0))});
        } else {
            bool found = false;
            for (const auto& [name, ref] : named_1q())
                if (g.name == name) {
                    need(1, 0);
                    c.add_layer({Gate::single(g.qubits[0], ref)});
                    found = true;
                    break;
                }
            if (!found) throw IoError("qasm: unsupported gate '" + g.name + "'");
        }
    }
    c.end_unit();
    return c;
}

void export_qasm(const Circuit& c, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << to_qasm(c);
    if (!os) throw IoError("write failure on '" + path + "'");
}

void export_qasm(const BrickWallAnsatz& a, const std::string& path) { export_qasm(a.to_circuit(), path); }

Circuit import_qasm(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "' for reading");
    std::stringstream ss;
    ss << is.rdbuf();
    return from_qasm(ss.str());
}

} // namespace qbrick
