#include "parqdd/circuit.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>

#include "parqdd/rng.hpp"

namespace parqdd {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct LineScanner {
    std::istringstream ss;
    int lineno;
    explicit LineScanner(const std::string& line, int no) : ss(line), lineno(no) {}

    [[noreturn]] void fail(const std::string& what) {
        throw ParseError("line " + std::to_string(lineno) + ": " + what);
    }
    std::string word() {
        std::string w;
        if (!(ss >> w)) fail("missing token");
        return w;
    }
    long integer() {
        long v;
        if (!(ss >> v)) fail("expected integer");
        return v;
    }
    double real() {
        double v;
        if (!(ss >> v)) fail("expected number");
        return v;
    }
    void done() {
        std::string extra;
        if (ss >> extra) fail("trailing token '" + extra + "'");
    }
};

int qubit_arg(LineScanner& sc, int n) {
    long q = sc.integer();
    if (q < 0 || q >= n) sc.fail("qubit index out of range");
    return int(q);
}

} // namespace

Circuit parse_circuit(std::istream& in) {
    Circuit c;
    bool have_header = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        LineScanner sc(line, lineno);
        std::string w;
        if (!(sc.ss >> w)) continue;
        if (!have_header) {
            if (w != "qubits") sc.fail("expected 'qubits <n>' first");
            long n = sc.integer();
            if (n < 1 || n > 30) sc.fail("qubit count out of range");
            c.qubits = int(n);
            sc.done();
            have_header = true;
            continue;
        }
        Gate g;
        if (w == "h" || w == "x" || w == "z") {
            g.kind = w == "h" ? GateKind::H : w == "x" ? GateKind::X : GateKind::Z;
            g.target = qubit_arg(sc, c.qubits);
        } else if (w == "rx" || w == "ry" || w == "rz") {
            g.kind = w == "rx" ? GateKind::RX : w == "ry" ? GateKind::RY : GateKind::RZ;
            g.target = qubit_arg(sc, c.qubits);
            g.angle = sc.real();
        } else if (w == "cnot") {
            g.kind = GateKind::CNOT;
            g.control = qubit_arg(sc, c.qubits);
            g.target = qubit_arg(sc, c.qubits);
            if (g.control == g.target) sc.fail("cnot control equals target");
        } else {
            sc.fail("unknown statement '" + w + "'");
        }
        sc.done();
        c.gates.push_back(g);
    }
    if (!have_header) throw ParseError("line 1: missing 'qubits <n>' header");
    return c;
}

Circuit parse_circuit(const std::string& text) {
    std::istringstream ss(text);
    return parse_circuit(ss);
}

std::string serialize_circuit(const Circuit& c) {
    std::ostringstream out;
    out << "qubits " << c.qubits << "\n";
    char buf[64];
    for (const Gate& g : c.gates) {
        switch (g.kind) {
        case GateKind::H: out << "h " << g.target << "\n"; break;
        case GateKind::X: out << "x " << g.target << "\n"; break;
        case GateKind::Z: out << "z " << g.target << "\n"; break;
        case GateKind::RX:
        case GateKind::RY:
        case GateKind::RZ: {
            const char* name = g.kind == GateKind::RX ? "rx" : g.kind == GateKind::RY ? "ry" : "rz";
            std::snprintf(buf, sizeof buf, "%.17g", g.angle);
            out << name << " " << g.target << " " << buf << "\n";
            break;
        }
        case GateKind::CNOT: out << "cnot " << g.control << " " << g.target << "\n"; break;
        case GateKind::PHASE_FLIP:
        case GateKind::GROVER_ITER:
            throw std::invalid_argument("gate kind has no text form");
        }
    }
    return out.str();
}

Circuit random_circuit(int qubits, int gates, std::uint64_t seed) {
    if (qubits < 2) throw std::invalid_argument("random circuits need at least 2 qubits");
    Circuit c;
    c.qubits = qubits;
    c.gates.reserve(std::size_t(gates));
    Xoshiro256 rng(seed);
    for (int i = 0; i < gates; ++i) {
        Gate g;
        switch (rng.below(4)) {
        case 0: g.kind = GateKind::RX; break;
        case 1: g.kind = GateKind::RY; break;
        case 2: g.kind = GateKind::RZ; break;
        default: g.kind = GateKind::CNOT; break;
        }
        g.target = int(rng.below(std::uint64_t(qubits)));
        if (g.kind == GateKind::CNOT) {
            long ctl = long(rng.below(std::uint64_t(qubits - 1)));
            if (ctl >= g.target) ++ctl;
            g.control = int(ctl);
        } else {
            g.angle = rng.unit_double() * 2.0 * kPi;
        }
        c.gates.push_back(g);
    }
    return c;
}

int grover_iterations(int qubits) {
    return int(std::floor(kPi / 4.0 * std::exp2(double(qubits) / 2.0)));
}

std::uint64_t grover_marked(int qubits, std::uint64_t seed) {
    std::uint64_t s = seed;
    return splitmix64(s) & ((std::uint64_t{1} << qubits) - 1);
}

Circuit grover_circuit(int qubits, std::uint64_t marked) {
    Circuit c;
    c.qubits = qubits;
    for (int q = 0; q < qubits; ++q) c.gates.push_back({GateKind::H, q, -1, 0.0, 0});
    int iters = grover_iterations(qubits);
    for (int k = 0; k < iters; ++k)
        c.gates.push_back({GateKind::GROVER_ITER, 0, -1, 0.0, marked});
    return c;
}

Circuit grover_circuit_decomposed(int qubits, std::uint64_t marked) {
    Circuit c;
    c.qubits = qubits;
    auto all_h = [&] {
        for (int q = 0; q < qubits; ++q) c.gates.push_back({GateKind::H, q, -1, 0.0, 0});
    };
    auto all_x = [&] {
        for (int q = 0; q < qubits; ++q) c.gates.push_back({GateKind::X, q, -1, 0.0, 0});
    };
    std::uint64_t all_ones = (std::uint64_t{1} << qubits) - 1;
    all_h();
    int iters = grover_iterations(qubits);
    for (int k = 0; k < iters; ++k) {
        c.gates.push_back({GateKind::PHASE_FLIP, 0, -1, 0.0, marked});
        all_h();
        all_x();
        c.gates.push_back({GateKind::PHASE_FLIP, 0, -1, 0.0, all_ones});
        all_x();
        all_h();
    }
    return c;
}

void gate_unitary(const Gate& g, ComplexValue u[4]) {
    const double s = 1.0 / std::sqrt(2.0);
    switch (g.kind) {
    case GateKind::H:
        u[0] = {s, 0}; u[1] = {s, 0};
        u[2] = {s, 0}; u[3] = {-s, 0};
        return;
    case GateKind::X:
        u[0] = {0, 0}; u[1] = {1, 0};
        u[2] = {1, 0}; u[3] = {0, 0};
        return;
    case GateKind::Z:
        u[0] = {1, 0}; u[1] = {0, 0};
        u[2] = {0, 0}; u[3] = {-1, 0};
        return;
    case GateKind::RX: {
        double c = std::cos(g.angle / 2), sn = std::sin(g.angle / 2);
        u[0] = {c, 0};  u[1] = {0, -sn};
        u[2] = {0, -sn}; u[3] = {c, 0};
        return;
    }
    case GateKind::RY: {
        double c = std::cos(g.angle / 2), sn = std::sin(g.angle / 2);
        u[0] = {c, 0};  u[1] = {-sn, 0};
        u[2] = {sn, 0}; u[3] = {c, 0};
        return;
    }
    case GateKind::RZ: {
        // diag(e^{-i a/2}, e^{+i a/2})
        double c = std::cos(g.angle / 2), sn = std::sin(g.angle / 2);
        u[0] = {c, -sn}; u[1] = {0, 0};
        u[2] = {0, 0};   u[3] = {c, sn};
        return;
    }
    default:
        throw std::invalid_argument("not a single-qubit unitary");
    }
}

namespace {

MEdge scaled_m(ExecContext& ctx, MEdge e, ComplexId f) {
    if (e.w == ComplexTable::ZERO || f == ComplexTable::ZERO) return mzero;
    ComplexId w = ctx.cnums().mul(e.w, f);
    return w == ComplexTable::ZERO ? mzero : MEdge{e.n, w};
}

// Identity stack continuing an operator chain up to the top level.
MEdge wrap_identity(ExecContext& ctx, MEdge e, int from_level) {
    for (int l = from_level; l < ctx.qubits(); ++l) {
        MEdge c[4] = {e, mzero, mzero, e};
        e = ctx.make_mnode(l, c);
    }
    return e;
}

MEdge single_qubit_dd(ExecContext& ctx, const Gate& g) {
    ComplexValue u[4];
    gate_unitary(g, u);
    int t = g.target;
    MEdge below = t > 0 ? ctx.identity(t - 1) : mone;
    MEdge c[4];
    for (int i = 0; i < 4; ++i) {
        ComplexId w = ctx.cnums().intern(u[i]);
        c[i] = scaled_m(ctx, below, w);
    }
    return wrap_identity(ctx, ctx.make_mnode(t, c), t + 1);
}

MEdge cnot_dd(ExecContext& ctx, int control, int target) {
    assert(control != target);
    int lo = std::min(control, target), hi = std::max(control, target);
    // Two partial operators climb the levels together: `a` is the
    // control-0 branch, `b` the control-1 branch.
    MEdge a = lo > 0 ? ctx.identity(lo - 1) : mone;
    MEdge b = a;
    for (int l = lo; l < hi; ++l) {
        if (l == target) {
            MEdge ca[4] = {a, mzero, mzero, a};
            MEdge cb[4] = {mzero, b, b, mzero};
            a = ctx.make_mnode(l, ca);
            b = ctx.make_mnode(l, cb);
        } else if (l == control) {
            MEdge ca[4] = {a, mzero, mzero, mzero};
            MEdge cb[4] = {mzero, mzero, mzero, b};
            a = ctx.make_mnode(l, ca);
            b = ctx.make_mnode(l, cb);
        } else {
            MEdge ca[4] = {a, mzero, mzero, a};
            MEdge cb[4] = {b, mzero, mzero, b};
            a = ctx.make_mnode(l, ca);
            b = ctx.make_mnode(l, cb);
        }
    }
    MEdge top;
    if (hi == control) {
        MEdge c[4] = {a, mzero, mzero, b};
        top = ctx.make_mnode(hi, c);
    } else {
        MEdge c[4] = {a, b, b, a};
        top = ctx.make_mnode(hi, c);
    }
    return wrap_identity(ctx, top, hi + 1);
}

} // namespace

MEdge phase_flip_dd(ExecContext& ctx, std::uint64_t mask) {
    int n = ctx.qubits();
    assert(mask < (std::uint64_t{1} << n));
    // I - 2|mask><mask|
    MEdge proj = mone;
    for (int l = 0; l < n; ++l) {
        unsigned bit = (mask >> l) & 1u;
        MEdge c[4] = {mzero, mzero, mzero, mzero};
        c[3 * bit] = proj;
        proj = ctx.make_mnode(l, c);
    }
    ComplexId minus2 = ctx.cnums().intern({-2.0, 0.0});
    return add(ctx, ctx.identity(n - 1), scaled_m(ctx, proj, minus2));
}

MEdge grover_iteration_dd(ExecContext& ctx, std::uint64_t marked) {
    int n = ctx.qubits();
    MEdge oracle = phase_flip_dd(ctx, marked);
    MEdge h = gate_to_dd(ctx, {GateKind::H, 0, -1, 0.0, 0});
    for (int q = 1; q < n; ++q) h = mul(ctx, gate_to_dd(ctx, {GateKind::H, q, -1, 0.0, 0}), h);
    MEdge x = gate_to_dd(ctx, {GateKind::X, 0, -1, 0.0, 0});
    for (int q = 1; q < n; ++q) x = mul(ctx, gate_to_dd(ctx, {GateKind::X, q, -1, 0.0, 0}), x);
    MEdge cz = phase_flip_dd(ctx, (std::uint64_t{1} << n) - 1);
    // diffusion = 2|s><s| - I = -(H X CZ X H), symmetric so the order of
    // the product does not matter
    MEdge d = mul(ctx, h, mul(ctx, x, mul(ctx, cz, mul(ctx, x, h))));
    d.w = ctx.cnums().neg(d.w);
    return mul(ctx, d, oracle);
}

MEdge gate_to_dd(ExecContext& ctx, const Gate& g) {
    switch (g.kind) {
    case GateKind::CNOT:
        return cnot_dd(ctx, g.control, g.target);
    case GateKind::PHASE_FLIP:
        return phase_flip_dd(ctx, g.mask);
    case GateKind::GROVER_ITER:
        return grover_iteration_dd(ctx, g.mask);
    default:
        return single_qubit_dd(ctx, g);
    }
}

} // namespace parqdd
