#pragma once

// Shared test utilities: random dense states and independent dense oracles
// (std::complex arithmetic, no shared code with the package under test
// beyond the value types).

#include <complex>
#include <cstdint>
#include <vector>

#include <doctest.h>

#include "parqdd/complex.hpp"
#include "parqdd/context.hpp"
#include "parqdd/refsim.hpp"
#include "parqdd/rng.hpp"

namespace tst {

using parqdd::ComplexValue;
using cvec = std::vector<ComplexValue>;

inline parqdd::ExecConfig exec_cfg(int n) {
    parqdd::ExecConfig c;
    c.qubits = n;
    return c;
}

inline cvec random_amps(int n, parqdd::Xoshiro256& r) {
    cvec v(std::size_t(1) << n);
    for (auto& a : v) a = {2 * r.unit_double() - 1, 2 * r.unit_double() - 1};
    return v;
}

inline cvec random_matrix(int n, parqdd::Xoshiro256& r) {
    cvec v(std::size_t(1) << (2 * n));
    for (auto& a : v) a = {2 * r.unit_double() - 1, 2 * r.unit_double() - 1};
    return v;
}

inline std::complex<double> sc(ComplexValue v) { return {v.re, v.im}; }

inline double max_diff(const cvec& a, const cvec& b) {
    REQUIRE(a.size() == b.size());
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(sc(a[i]) - sc(b[i])));
    return m;
}

inline double max_diff_ref(const cvec& a, const parqdd::DenseState& st) {
    REQUIRE(a.size() == st.a.size());
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(sc(a[i]) - st.a[i]));
    return m;
}

inline cvec dense_add(const cvec& a, const cvec& b) {
    cvec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto s = sc(a[i]) + sc(b[i]);
        out[i] = {s.real(), s.imag()};
    }
    return out;
}

inline cvec dense_mul_mv(const cvec& m, const cvec& v) {
    std::size_t dim = v.size();
    cvec out(dim);
    for (std::size_t r = 0; r < dim; ++r) {
        std::complex<double> s = 0;
        for (std::size_t c = 0; c < dim; ++c) s += sc(m[r * dim + c]) * sc(v[c]);
        out[r] = {s.real(), s.imag()};
    }
    return out;
}

inline cvec dense_mul_mm(const cvec& a, const cvec& b, std::size_t dim) {
    cvec out(dim * dim);
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) {
            std::complex<double> s = 0;
            for (std::size_t k = 0; k < dim; ++k) s += sc(a[r * dim + k]) * sc(b[k * dim + c]);
            out[r * dim + c] = {s.real(), s.imag()};
        }
    return out;
}

// hi occupies the upper index bits, lo the lower ones (level 0 = bit 0)
inline cvec dense_kron_v(const cvec& hi, const cvec& lo) {
    cvec out(hi.size() * lo.size());
    for (std::size_t h = 0; h < hi.size(); ++h)
        for (std::size_t l = 0; l < lo.size(); ++l) {
            auto s = sc(hi[h]) * sc(lo[l]);
            out[h * lo.size() + l] = {s.real(), s.imag()};
        }
    return out;
}

inline cvec dense_kron_m(const cvec& hi, std::size_t hdim, const cvec& lo, std::size_t ldim) {
    std::size_t dim = hdim * ldim;
    cvec out(dim * dim);
    for (std::size_t rh = 0; rh < hdim; ++rh)
        for (std::size_t ch = 0; ch < hdim; ++ch)
            for (std::size_t rl = 0; rl < ldim; ++rl)
                for (std::size_t cl = 0; cl < ldim; ++cl) {
                    auto s = sc(hi[rh * hdim + ch]) * sc(lo[rl * ldim + cl]);
                    out[(rh * ldim + rl) * dim + (ch * ldim + cl)] = {s.real(), s.imag()};
                }
    return out;
}

} // namespace tst
