#include <doctest.h>

#include <cmath>
#include <complex>
#include <sstream>

#include "helpers.hpp"
#include "parqdd/circuit.hpp"
#include "parqdd/ops.hpp"
#include "parqdd/refsim.hpp"

using namespace parqdd;
using tst::cvec;

TEST_CASE("parse and serialize round trip") {
    const char* text =
        "# header comment\n"
        "qubits 4\n"
        "h 0\n"
        "x 3\n"
        "z 2\n"
        "rx 1 0.5\n"
        "ry 2 -2.25\n"
        "rz 0 3.14159265358979312\n"
        "\n"
        "cnot 0 3   # trailing comment\n";
    Circuit c = parse_circuit(std::string(text));
    CHECK(c.qubits == 4);
    REQUIRE(c.gates.size() == 7);
    CHECK(c.gates[0].kind == GateKind::H);
    CHECK(c.gates[3].kind == GateKind::RX);
    CHECK(c.gates[3].angle == 0.5);
    CHECK(c.gates[6].kind == GateKind::CNOT);
    CHECK(c.gates[6].control == 0);
    CHECK(c.gates[6].target == 3);

    std::string out = serialize_circuit(c);
    Circuit c2 = parse_circuit(out);
    REQUIRE(c2.gates.size() == c.gates.size());
    for (std::size_t i = 0; i < c.gates.size(); ++i) {
        CHECK(c2.gates[i].kind == c.gates[i].kind);
        CHECK(c2.gates[i].target == c.gates[i].target);
        CHECK(c2.gates[i].control == c.gates[i].control);
        CHECK(c2.gates[i].angle == c.gates[i].angle); // %.17g keeps doubles exact
    }
}

TEST_CASE("parse errors carry line numbers") {
    auto expect_error = [](const std::string& text, const char* line_tag) {
        try {
            parse_circuit(text);
            FAIL_CHECK("expected ParseError for: " << text);
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find(line_tag) != std::string::npos);
        }
    };
    expect_error("h 0\n", "line 1");                       // missing header
    expect_error("qubits 2\nfoo 1\n", "line 2");           // unknown statement
    expect_error("qubits 2\nh 5\n", "line 2");             // qubit out of range
    expect_error("qubits 2\nh -1\n", "line 2");            // negative index
    expect_error("qubits 2\nrx 0\n", "line 2");            // missing angle
    expect_error("qubits 2\ncnot 1 1\n", "line 2");        // control == target
    expect_error("qubits 0\n", "line 1");                  // bad qubit count
    expect_error("qubits 2\nqubits 2\n", "line 2");        // duplicate header
    expect_error("qubits 2\nh 0 1\n", "line 2");           // extra token
}

TEST_CASE("internal gates have no text form") {
    Circuit c;
    c.qubits = 3;
    c.gates.push_back({GateKind::PHASE_FLIP, 0, -1, 0, 5});
    CHECK_THROWS_AS(serialize_circuit(c), std::invalid_argument);
    c.gates[0] = {GateKind::GROVER_ITER, 0, -1, 0, 5};
    CHECK_THROWS_AS(serialize_circuit(c), std::invalid_argument);
}

TEST_CASE("random circuits are deterministic and well formed") {
    Circuit a = random_circuit(8, 200, 42);
    Circuit b = random_circuit(8, 200, 42);
    REQUIRE(a.gates.size() == 200);
    for (std::size_t i = 0; i < a.gates.size(); ++i) {
        CHECK(a.gates[i].kind == b.gates[i].kind);
        CHECK(a.gates[i].target == b.gates[i].target);
        CHECK(a.gates[i].angle == b.gates[i].angle);
        bool rot = a.gates[i].kind == GateKind::RX || a.gates[i].kind == GateKind::RY ||
                   a.gates[i].kind == GateKind::RZ;
        bool cx = a.gates[i].kind == GateKind::CNOT;
        CHECK((rot || cx));
        CHECK(a.gates[i].target >= 0);
        CHECK(a.gates[i].target < 8);
        if (rot) {
            CHECK(a.gates[i].angle >= 0.0);
            CHECK(a.gates[i].angle < 2 * 3.14159265358979324);
        }
        if (cx) {
            CHECK(a.gates[i].control >= 0);
            CHECK(a.gates[i].control < 8);
            CHECK(a.gates[i].control != a.gates[i].target);
        }
    }
    Circuit c = random_circuit(8, 200, 43);
    bool differs = false;
    for (std::size_t i = 0; i < c.gates.size(); ++i)
        if (c.gates[i].kind != a.gates[i].kind || c.gates[i].target != a.gates[i].target)
            differs = true;
    CHECK(differs);
    CHECK_THROWS_AS(random_circuit(1, 10, 1), std::invalid_argument);
}

TEST_CASE("single-qubit unitaries are unitary") {
    for (double angle : {0.0, 0.3, 1.7, -2.9}) {
        for (GateKind k : {GateKind::H, GateKind::X, GateKind::Z, GateKind::RX, GateKind::RY,
                           GateKind::RZ}) {
            Gate g{k, 0, -1, angle, 0};
            ComplexValue u[4];
            gate_unitary(g, u);
            // U * U^dagger = I
            auto c = [&](int i) { return std::complex<double>(u[i].re, u[i].im); };
            std::complex<double> r00 = c(0) * std::conj(c(0)) + c(1) * std::conj(c(1));
            std::complex<double> r01 = c(0) * std::conj(c(2)) + c(1) * std::conj(c(3));
            std::complex<double> r11 = c(2) * std::conj(c(2)) + c(3) * std::conj(c(3));
            CHECK(std::abs(r00 - 1.0) < 1e-12);
            CHECK(std::abs(r01) < 1e-12);
            CHECK(std::abs(r11 - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("gate DDs act like the dense reference") {
    Xoshiro256 rng(77);
    const int n = 4;
    std::vector<Gate> gates = {
        {GateKind::H, 0, -1, 0, 0},           {GateKind::H, 3, -1, 0, 0},
        {GateKind::X, 2, -1, 0, 0},           {GateKind::Z, 1, -1, 0, 0},
        {GateKind::RX, 1, -1, 0.7, 0},        {GateKind::RY, 2, -1, -1.1, 0},
        {GateKind::RZ, 3, -1, 2.3, 0},        {GateKind::CNOT, 3, 0, 0, 0},
        {GateKind::CNOT, 0, 3, 0, 0},         {GateKind::CNOT, 1, 2, 0, 0},
        {GateKind::PHASE_FLIP, 0, -1, 0, 11}, {GateKind::GROVER_ITER, 0, -1, 0, 6},
    };
    for (const Gate& g : gates) {
        CAPTURE(int(g.kind));
        CAPTURE(g.target);
        CAPTURE(g.control);
        ExecContext ctx(tst::exec_cfg(n));
        cvec amps = tst::random_amps(n, rng);
        DenseState ref;
        ref.n = n;
        ref.a.resize(amps.size());
        for (std::size_t i = 0; i < amps.size(); ++i) ref.a[i] = tst::sc(amps[i]);
        ref_apply(ref, g);

        VEdge in = vector_from_dense(ctx, amps);
        VEdge out = mul(ctx, gate_to_dd(ctx, g), in);
        CHECK(tst::max_diff_ref(to_dense(ctx, out, n), ref) < 1e-10);
    }
}

TEST_CASE("cnot with adjacent and distant lines") {
    Xoshiro256 rng(78);
    const int n = 5;
    for (auto [ctrl, tgt] : std::vector<std::pair<int, int>>{{0, 1}, {1, 0}, {0, 4}, {4, 0},
                                                             {2, 3}, {3, 2}, {1, 3}, {4, 2}}) {
        ExecContext ctx(tst::exec_cfg(n));
        Gate g{GateKind::CNOT, tgt, ctrl, 0, 0};
        cvec amps = tst::random_amps(n, rng);
        DenseState ref;
        ref.n = n;
        ref.a.resize(amps.size());
        for (std::size_t i = 0; i < amps.size(); ++i) ref.a[i] = tst::sc(amps[i]);
        ref_apply(ref, g);
        VEdge out = mul(ctx, gate_to_dd(ctx, g), vector_from_dense(ctx, amps));
        CHECK(tst::max_diff_ref(to_dense(ctx, out, n), ref) < 1e-10);
    }
}

TEST_CASE("phase flip is a reflection about one basis state") {
    ExecContext ctx(tst::exec_cfg(3));
    MEdge m = phase_flip_dd(ctx, 5);
    cvec d = to_dense(ctx, m, 3);
    for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t c = 0; c < 8; ++c) {
            double want = r == c ? (r == 5 ? -1.0 : 1.0) : 0.0;
            CHECK(d[r * 8 + c].re == doctest::Approx(want).epsilon(1e-12));
            CHECK(d[r * 8 + c].im == doctest::Approx(0.0).epsilon(1e-12));
        }
}

TEST_CASE("whole grover iterations equal the decomposed gate list") {
    const int n = 5;
    std::uint64_t marked = grover_marked(n, 3);
    Circuit a = grover_circuit(n, marked);
    Circuit b = grover_circuit_decomposed(n, marked);
    DenseState ra = ref_run(a), rb = ref_run(b);
    // same probabilities everywhere (the decomposition differs by global phase)
    for (std::size_t i = 0; i < ra.a.size(); ++i)
        CHECK(std::norm(ra.a[i]) == doctest::Approx(std::norm(rb.a[i])).epsilon(1e-9));
}

TEST_CASE("iteration counts follow the square root schedule") {
    CHECK(grover_iterations(2) == 1);
    CHECK(grover_iterations(5) == 4);
    CHECK(grover_iterations(8) == 12);
    CHECK(grover_iterations(10) == 25);
    CHECK(grover_iterations(12) == 50);
    CHECK(grover_iterations(15) == 142);
    CHECK(grover_iterations(18) == 402);
    CHECK(grover_iterations(24) == 3216);
}

TEST_CASE("marked state depends on the seed but not the call") {
    CHECK(grover_marked(10, 1) == grover_marked(10, 1));
    CHECK(grover_marked(10, 1) < (1u << 10));
    bool any_diff = false;
    for (std::uint64_t s = 0; s < 8; ++s)
        if (grover_marked(10, s) != grover_marked(10, 0)) any_diff = true;
    CHECK(any_diff);
}
