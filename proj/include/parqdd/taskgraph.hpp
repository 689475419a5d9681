#pragma once

#include <cstdint>
#include <vector>

#include "parqdd/circuit.hpp"
#include "parqdd/strategy.hpp"

namespace parqdd {

// Operand of a task: a prebuilt gate DD, another task's result, or the
// initial state.
struct OpRef {
    enum Kind : std::uint8_t { GATE, NODE, STATE } kind = STATE;
    int idx = -1;

    static OpRef gate(int i) { return {GATE, i}; }
    static OpRef node(int i) { return {NODE, i}; }
    static OpRef state() { return {STATE, -1}; }
};

struct TaskNode {
    enum Kind : std::uint8_t { MULMM, MULMV, REDUCE } kind = MULMV;
    OpRef a; // MULMM: left matrix; MULMV: matrix; REDUCE: vector input
    OpRef b; // MULMM: right matrix; MULMV: vector input
    int batch = 0;
    int indegree = 0;
    std::vector<int> dependents;
};

struct TaskGraph {
    int qubits = 0;
    std::vector<TaskNode> nodes;
    int output = -1; // vector-producing node delivering the final state; -1: passthrough
};

// Per-node execution record, aligned with TaskGraph::nodes.
struct TaskTrace {
    std::vector<double> start_s, end_s; // relative to run start
    std::vector<int> worker;
};

// strategy must be one of the OUTER_* values. reduce_batch is the gate count
// per REDUCE barrier (OUTER_REDUCE only, >= 1); segments of OUTER_ASSOC
// follow the worker count.
TaskGraph build_taskgraph(const Circuit& c, Strategy strategy, unsigned workers,
                          int reduce_batch);

// Kahn check; throws std::logic_error if the dependency structure cycles or
// dependents/indegrees disagree.
void check_taskgraph(const TaskGraph& g);

} // namespace parqdd
