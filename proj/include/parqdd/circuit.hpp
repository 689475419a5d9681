#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "parqdd/context.hpp"
#include "parqdd/ops.hpp"

namespace parqdd {

// PHASE_FLIP negates the amplitude of one basis state (mask); GROVER_ITER is
// an engine-internal slot for a whole prebuilt Grover iteration. Neither has
// a text form.
enum class GateKind : std::uint8_t { H, X, Z, RX, RY, RZ, CNOT, PHASE_FLIP, GROVER_ITER };

struct Gate {
    GateKind kind = GateKind::H;
    int target = 0;
    int control = -1;      // CNOT only
    double angle = 0.0;    // RX/RY/RZ
    std::uint64_t mask = 0; // PHASE_FLIP/GROVER_ITER basis state
};

struct Circuit {
    int qubits = 1;
    std::vector<Gate> gates;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Text format: one statement per line, '#' starts a comment.
//   qubits <n>
//   h <q> | x <q> | z <q>
//   rx <q> <angle> | ry <q> <angle> | rz <q> <angle>
//   cnot <control> <target>
Circuit parse_circuit(std::istream& in);
Circuit parse_circuit(const std::string& text);
std::string serialize_circuit(const Circuit& c);

// Uniform gate mix: rx/ry/rz/cnot each with probability 1/4, rotation
// targets and angles uniform, cnot control uniform over the other qubits.
Circuit random_circuit(int qubits, int gates, std::uint64_t seed);

int grover_iterations(int qubits);
std::uint64_t grover_marked(int qubits, std::uint64_t seed);

// n Hadamards followed by grover_iterations(n) whole-iteration slots.
Circuit grover_circuit(int qubits, std::uint64_t marked);
// Same semantics spelled out gate by gate (phase flip + H/X sandwich per
// iteration; differs from grover_circuit by a global phase only).
Circuit grover_circuit_decomposed(int qubits, std::uint64_t marked);

// 2x2 unitary entries for single-qubit kinds, row-major. One definition
// serves both the DD builder and the dense reference simulator.
void gate_unitary(const Gate& g, ComplexValue u[4]);

// Full n-qubit operator DD for any gate kind.
MEdge gate_to_dd(ExecContext& ctx, const Gate& g);
MEdge phase_flip_dd(ExecContext& ctx, std::uint64_t mask);
MEdge grover_iteration_dd(ExecContext& ctx, std::uint64_t marked);

} // namespace parqdd
