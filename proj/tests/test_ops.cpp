#include <doctest.h>

#include <cmath>
#include <complex>

#include "helpers.hpp"
#include "parqdd/ops.hpp"

using namespace parqdd;
using tst::cvec;

TEST_CASE("dense round trip") {
    Xoshiro256 rng(11);
    for (int n = 1; n <= 6; ++n) {
        ExecContext ctx(tst::exec_cfg(n));
        cvec amps = tst::random_amps(n, rng);
        VEdge e = vector_from_dense(ctx, amps);
        cvec back = to_dense(ctx, e, n);
        CHECK(tst::max_diff(amps, back) < 1e-10);
    }
}

TEST_CASE("matrix dense round trip") {
    Xoshiro256 rng(12);
    for (int n = 1; n <= 4; ++n) {
        ExecContext ctx(tst::exec_cfg(n));
        cvec m = tst::random_matrix(n, rng);
        MEdge e = matrix_from_dense(ctx, m);
        cvec back = to_dense(ctx, e, n);
        CHECK(tst::max_diff(m, back) < 1e-10);
    }
}

TEST_CASE("basis states") {
    ExecContext ctx(tst::exec_cfg(4));
    for (std::uint64_t b : {0ull, 5ull, 15ull, 9ull}) {
        VEdge e = ctx.basis_state(b);
        cvec d = to_dense(ctx, e, 4);
        for (std::size_t i = 0; i < d.size(); ++i) {
            CHECK(d[i].re == (i == b ? 1.0 : 0.0));
            CHECK(d[i].im == 0.0);
        }
    }
}

TEST_CASE("add matches the dense oracle") {
    Xoshiro256 rng(13);
    for (int n = 1; n <= 6; ++n) {
        ExecContext ctx(tst::exec_cfg(n));
        cvec a = tst::random_amps(n, rng), b = tst::random_amps(n, rng);
        VEdge s = add(ctx, vector_from_dense(ctx, a), vector_from_dense(ctx, b));
        CHECK(tst::max_diff(to_dense(ctx, s, n), tst::dense_add(a, b)) < 1e-10);
    }
}

TEST_CASE("add shortcuts") {
    ExecContext ctx(tst::exec_cfg(3));
    Xoshiro256 rng(14);
    VEdge v = vector_from_dense(ctx, tst::random_amps(3, rng));
    VEdge z{TERMINAL, ComplexTable::ZERO};
    CHECK(add(ctx, v, z) == v);
    CHECK(add(ctx, z, v) == v);
    // x + x doubles the weight, same node
    VEdge d = add(ctx, v, v);
    CHECK(d.n == v.n);
    CHECK(ctx.cnums().value(d.w).re == doctest::Approx(2 * ctx.cnums().value(v.w).re));
}

TEST_CASE("matrix-vector multiply matches the dense oracle") {
    Xoshiro256 rng(15);
    for (int n = 1; n <= 5; ++n) {
        ExecContext ctx(tst::exec_cfg(n));
        cvec m = tst::random_matrix(n, rng), v = tst::random_amps(n, rng);
        VEdge r = mul(ctx, matrix_from_dense(ctx, m), vector_from_dense(ctx, v));
        CHECK(tst::max_diff(to_dense(ctx, r, n), tst::dense_mul_mv(m, v)) < 1e-9);
    }
}

TEST_CASE("matrix-matrix multiply matches the dense oracle") {
    Xoshiro256 rng(16);
    for (int n = 1; n <= 4; ++n) {
        ExecContext ctx(tst::exec_cfg(n));
        cvec a = tst::random_matrix(n, rng), b = tst::random_matrix(n, rng);
        MEdge r = mul(ctx, matrix_from_dense(ctx, a), matrix_from_dense(ctx, b));
        CHECK(tst::max_diff(to_dense(ctx, r, n), tst::dense_mul_mm(a, b, std::size_t(1) << n)) <
              1e-9);
    }
}

TEST_CASE("identity multiply returns the operand") {
    ExecContext ctx(tst::exec_cfg(5));
    Xoshiro256 rng(17);
    VEdge v = vector_from_dense(ctx, tst::random_amps(5, rng));
    VEdge r = mul(ctx, ctx.identity(4), v);
    CHECK(r.n == v.n);
    CHECK(r.w == v.w);

    MEdge m = matrix_from_dense(ctx, tst::random_matrix(5, rng));
    CHECK(mul(ctx, ctx.identity(4), m) == m);
    CHECK(mul(ctx, m, ctx.identity(4)) == m);
}

TEST_CASE("kron matches the dense oracle") {
    Xoshiro256 rng(18);
    ExecContext ctx(tst::exec_cfg(6));
    cvec hi = tst::random_amps(2, rng), lo = tst::random_amps(3, rng);
    VEdge loe = vector_from_dense(ctx, lo);
    VEdge hie = vector_from_dense(ctx, hi);
    VEdge k = kron(ctx, hie, loe, 3);
    CHECK(tst::max_diff(to_dense(ctx, k, 5), tst::dense_kron_v(hi, lo)) < 1e-10);

    cvec hm = tst::random_matrix(2, rng), lm = tst::random_matrix(2, rng);
    MEdge km = kron(ctx, matrix_from_dense(ctx, hm), matrix_from_dense(ctx, lm), 2);
    CHECK(tst::max_diff(to_dense(ctx, km, 4), tst::dense_kron_m(hm, 4, lm, 4)) < 1e-10);
}

TEST_CASE("amplitude walks match dense expansion") {
    Xoshiro256 rng(19);
    ExecContext ctx(tst::exec_cfg(6));
    cvec a = tst::random_amps(6, rng);
    VEdge e = vector_from_dense(ctx, a);
    cvec d = to_dense(ctx, e, 6);
    for (std::uint64_t i = 0; i < 64; ++i) {
        ComplexValue s = amplitude(ctx, e, 6, i);
        CHECK(std::abs(tst::sc(s) - tst::sc(d[i])) < 1e-12);
    }
}

TEST_CASE("norm2 matches dense expansion") {
    Xoshiro256 rng(20);
    ExecContext ctx(tst::exec_cfg(6));
    cvec a = tst::random_amps(6, rng);
    VEdge e = vector_from_dense(ctx, a);
    double want = 0;
    for (auto& v : a) want += v.norm2();
    CHECK(norm2(ctx, e) == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("scalar edges multiply through") {
    ExecContext ctx(tst::exec_cfg(2));
    auto& ct = ctx.cnums();
    VEdge v{TERMINAL, ct.intern({0.5, 0})};
    MEdge m{TERMINAL, ct.intern({0, 2})};
    VEdge r = mul(ctx, m, v);
    CHECK(r.n == TERMINAL);
    CHECK(ct.value(r.w).im == doctest::Approx(1.0));
}

TEST_CASE("construction is deterministic within a context") {
    Xoshiro256 rng(21);
    ExecContext ctx(tst::exec_cfg(5));
    cvec a = tst::random_amps(5, rng);
    VEdge e1 = vector_from_dense(ctx, a);
    VEdge e2 = vector_from_dense(ctx, a);
    CHECK(e1.n == e2.n);
    CHECK(e1.w == e2.w);
}

TEST_CASE("to_dense enforces its cap") {
    ExecContext ctx(tst::exec_cfg(16));
    VEdge e = ctx.basis_state(123);
    CHECK_THROWS_AS(to_dense(ctx, e, 16, 14), std::invalid_argument);
    CHECK_NOTHROW(to_dense(ctx, e, 16, 16));
}
