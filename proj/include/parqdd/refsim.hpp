#pragma once

#include <complex>
#include <vector>

#include "parqdd/circuit.hpp"

namespace parqdd {

// Plain statevector simulation with independent numerics, used as the
// correctness oracle. Capped at 20 qubits.
struct DenseState {
    int n = 0;
    std::vector<std::complex<double>> a;
};

DenseState ref_zero_state(int n);
void ref_apply(DenseState& st, const Gate& g);
DenseState ref_run(const Circuit& c);

} // namespace parqdd
