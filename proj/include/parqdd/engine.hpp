#pragma once

#include <memory>
#include <string>
#include <vector>

#include "parqdd/circuit.hpp"
#include "parqdd/strategy.hpp"
#include "parqdd/taskgraph.hpp"

namespace parqdd {

struct EngineConfig {
    Strategy strategy = Strategy::SEQUENTIAL;
    unsigned workers = 1;
    CacheScope cache_scope = CacheScope::GLOBAL;
    UniqueScope unique_scope = UniqueScope::GLOBAL;
    unsigned mul_cache_bits = 20;
    unsigned add_cache_bits = 18;
    int spawn_threshold = -1; // recursion spawns at node level >= this; <0: qubits-3
    int reduce_batch = 0;     // gates per barrier; 0: 1 with whole-iteration gates, 8 otherwise
    double timeout_s = 0;     // 0: unlimited
    std::size_t max_nodes = std::size_t{1} << 24; // per unique table
    std::size_t max_complex = std::size_t{1} << 26;
    bool experiment_mode = false; // unlocks per-worker unique tables
};

struct RunMetrics {
    RunStatus status = RunStatus::OK;
    double wall_s = 0;
    CacheStats cache;
    std::uint64_t spawns = 0;
    std::size_t peak_nodes = 0; // arena high water across tables
    std::size_t final_live = 0;
    std::vector<double> idle_s; // per worker
    double idle_frac = 0;       // mean worker idle / wall
    std::string error;
};

struct Simulation {
    std::unique_ptr<ExecContext> ctx; // owns every node `state` references
    VEdge state{};
    RunMetrics metrics;
    TaskTrace trace; // filled for outer strategies
};

// Simulates |0...0> through the circuit under the given configuration.
Simulation simulate(const Circuit& c, const EngineConfig& cfg);

// Single-worker replay of the OUTER_REDUCE task graph under a chosen
// ready-list policy, for scheduling-order comparisons.
enum class ReadyOrder { PROGRAM, RANDOM };

struct OrderedRun {
    double wall_s = 0;
    double mul_hit = 0;
    std::uint64_t mul_lookups = 0;
};

OrderedRun run_reduce_graph_ordered(const Circuit& c, const EngineConfig& cfg, ReadyOrder order,
                                    std::uint64_t order_seed);

// ---- CSV reporting ----

struct BenchRow {
    std::string benchmark;
    int n = 0;
    int depth = 0; // gate count
    Strategy strategy = Strategy::SEQUENTIAL;
    CacheScope cache = CacheScope::GLOBAL;
    UniqueScope unique = UniqueScope::GLOBAL;
    unsigned workers = 1;
    std::uint64_t seed = 0;
    RunMetrics metrics;
    double success_p = -1; // P(marked) for Grover rows; negative prints blank
};

std::string csv_header();
std::string csv_row(const BenchRow& r);

// Runs the circuit `reps` times and reports the median-wall repetition.
// marked >= 0 evaluates P(marked) on the final state.
BenchRow bench_run(const std::string& benchmark, const Circuit& c, const EngineConfig& cfg,
                   std::uint64_t seed, int reps, std::int64_t marked = -1);

} // namespace parqdd
