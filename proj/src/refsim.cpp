#include "parqdd/refsim.hpp"

#include <stdexcept>

namespace parqdd {

namespace {
using C = std::complex<double>;
}

DenseState ref_zero_state(int n) {
    if (n < 1 || n > 20) throw std::invalid_argument("reference simulator handles 1..20 qubits");
    DenseState st;
    st.n = n;
    st.a.assign(std::size_t{1} << n, C{0.0, 0.0});
    st.a[0] = C{1.0, 0.0};
    return st;
}

void ref_apply(DenseState& st, const Gate& g) {
    std::size_t size = st.a.size();
    switch (g.kind) {
    case GateKind::CNOT: {
        std::size_t cbit = std::size_t{1} << g.control;
        std::size_t tbit = std::size_t{1} << g.target;
        for (std::size_t i = 0; i < size; ++i)
            if ((i & cbit) && !(i & tbit)) std::swap(st.a[i], st.a[i | tbit]);
        return;
    }
    case GateKind::PHASE_FLIP:
        st.a[g.mask] = -st.a[g.mask];
        return;
    case GateKind::GROVER_ITER: {
        // oracle, then inversion about the mean
        st.a[g.mask] = -st.a[g.mask];
        C sum{0.0, 0.0};
        for (const C& v : st.a) sum += v;
        C mean = sum / double(size);
        for (C& v : st.a) v = 2.0 * mean - v;
        return;
    }
    default: {
        ComplexValue u[4];
        gate_unitary(g, u);
        C u00{u[0].re, u[0].im}, u01{u[1].re, u[1].im};
        C u10{u[2].re, u[2].im}, u11{u[3].re, u[3].im};
        std::size_t tbit = std::size_t{1} << g.target;
        for (std::size_t i = 0; i < size; ++i) {
            if (i & tbit) continue;
            C a0 = st.a[i], a1 = st.a[i | tbit];
            st.a[i] = u00 * a0 + u01 * a1;
            st.a[i | tbit] = u10 * a0 + u11 * a1;
        }
        return;
    }
    }
}

DenseState ref_run(const Circuit& c) {
    DenseState st = ref_zero_state(c.qubits);
    for (const Gate& g : c.gates) ref_apply(st, g);
    return st;
}

} // namespace parqdd
