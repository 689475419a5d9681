#include <doctest.h>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "parqdd/complex.hpp"
#include "parqdd/rng.hpp"

using namespace parqdd;

TEST_CASE("reserved ids and exact lookups") {
    ComplexTable t;
    CHECK(t.intern({0.0, 0.0}) == ComplexTable::ZERO);
    CHECK(t.intern({1.0, 0.0}) == ComplexTable::ONE);
    CHECK(t.value(ComplexTable::ZERO).re == 0.0);
    CHECK(t.value(ComplexTable::ONE).re == 1.0);

    ComplexId a = t.intern({0.25, -0.75});
    CHECK(t.intern({0.25, -0.75}) == a);
    ComplexValue v = t.value(a);
    CHECK(v.re == 0.25);
    CHECK(v.im == -0.75);
}

TEST_CASE("negative zero folds onto zero") {
    ComplexTable t;
    CHECK(t.intern({-0.0, 0.0}) == ComplexTable::ZERO);
    CHECK(t.intern({0.0, -0.0}) == ComplexTable::ZERO);
    CHECK(t.intern({-0.0, -0.0}) == ComplexTable::ZERO);
}

TEST_CASE("tolerance coalesces near values") {
    ComplexTable t; // component tolerance 1e-12
    CHECK(t.intern({4e-13, -4e-13}) == ComplexTable::ZERO);
    ComplexId a = t.intern({0.5, 0.5});
    CHECK(t.intern({0.5 + 4e-13, 0.5 - 4e-13}) == a);
    CHECK(t.intern({0.5 + 5e-12, 0.5}) != a);
    CHECK(t.intern({1.0 - 1e-13, 0.0}) == ComplexTable::ONE);
}

TEST_CASE("non-finite input rejected") {
    ComplexTable t;
    CHECK_THROWS_AS(t.intern({INFINITY, 0.0}), std::domain_error);
    CHECK_THROWS_AS(t.intern({0.0, -INFINITY}), std::domain_error);
    CHECK_THROWS_AS(t.intern({NAN, 0.0}), std::domain_error);
}

TEST_CASE("arithmetic agrees with std::complex") {
    ComplexTable t;
    Xoshiro256 rng(7);
    for (int i = 0; i < 500; ++i) {
        ComplexValue av{2 * rng.unit_double() - 1, 2 * rng.unit_double() - 1};
        ComplexValue bv{2 * rng.unit_double() - 1, 2 * rng.unit_double() - 1};
        ComplexId a = t.intern(av), b = t.intern(bv);
        std::complex<double> ac(t.value(a).re, t.value(a).im);
        std::complex<double> bc(t.value(b).re, t.value(b).im);

        ComplexValue m = t.value(t.mul(a, b));
        CHECK(std::abs(std::complex<double>(m.re, m.im) - ac * bc) < 1e-11);
        ComplexValue s = t.value(t.add(a, b));
        CHECK(std::abs(std::complex<double>(s.re, s.im) - (ac + bc)) < 1e-11);
        ComplexValue n = t.value(t.neg(a));
        CHECK(n.re == -t.value(a).re);
        if (std::abs(bc) > 1e-6) {
            ComplexValue d = t.value(t.div(a, b));
            CHECK(std::abs(std::complex<double>(d.re, d.im) - ac / bc) < 1e-9);
        }
    }
}

TEST_CASE("multiplicative identities") {
    ComplexTable t;
    ComplexId a = t.intern({0.3, 0.4});
    CHECK(t.mul(a, ComplexTable::ONE) == a);
    CHECK(t.mul(ComplexTable::ONE, a) == a);
    CHECK(t.mul(a, ComplexTable::ZERO) == ComplexTable::ZERO);
    CHECK(t.add(a, ComplexTable::ZERO) == a);
    CHECK(t.div(a, a) == ComplexTable::ONE);
    CHECK(t.div(a, ComplexTable::ONE) == a);
    CHECK_THROWS_AS(t.div(a, ComplexTable::ZERO), std::domain_error);
}

TEST_CASE("ids survive segment growth") {
    ComplexTable t;
    std::vector<ComplexId> ids;
    const int kCount = 20000; // crosses several doubling segments
    ids.reserve(kCount);
    for (int i = 0; i < kCount; ++i) ids.push_back(t.intern({1.0 + i * 1e-3, -1.0}));
    for (int i = 0; i < kCount; ++i) {
        CHECK(t.intern({1.0 + i * 1e-3, -1.0}) == ids[i]);
        ComplexValue v = t.value(ids[i]);
        CHECK(v.re == doctest::Approx(1.0 + i * 1e-3).epsilon(1e-12));
    }
    CHECK(t.size() >= std::size_t(kCount));
}

TEST_CASE("capacity limit reported as length_error") {
    ComplexTable t(1e-12, 4, 64);
    bool threw = false;
    try {
        for (int i = 0; i < 200; ++i) t.intern({1.0 + i, 0.5});
    } catch (const std::length_error&) {
        threw = true;
    }
    CHECK(threw);
}
