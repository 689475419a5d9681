// Command line front end: single simulations plus the benchmark sweeps that
// produce the CSV tables.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "parqdd/engine.hpp"
#include "parqdd/ops.hpp"
#include "parqdd/refsim.hpp"

using namespace parqdd;

namespace {

struct EngineOpts {
    std::string strategy = "sequential";
    std::string cache = "global";
    std::string unique = "global";
    unsigned workers = 1;
    double timeout_s = 0;
    int spawn_threshold = -1;
    int reduce_batch = 0;
    unsigned mul_bits = 20;
    unsigned add_bits = 18;
    bool experiment = false;
};

void add_engine_opts(CLI::App* app, EngineOpts& o) {
    app->add_option("--strategy", o.strategy, "sequential|outer-linear|outer-assoc|outer-reduce|inner-threads|inner-fibers")
        ->check(CLI::IsMember({"sequential", "outer-linear", "outer-assoc", "outer-reduce",
                               "inner-threads", "inner-fibers"}));
    app->add_option("--cache", o.cache, "operation cache scope: none|local|global")
        ->check(CLI::IsMember({"none", "local", "global"}));
    app->add_option("--unique", o.unique, "unique table scope: global|worker")
        ->check(CLI::IsMember({"global", "worker"}));
    app->add_option("-w,--workers", o.workers, "worker count");
    app->add_option("--timeout", o.timeout_s, "per-run timeout in seconds, 0 = none");
    app->add_option("--spawn-threshold", o.spawn_threshold,
                    "spawn children at node level >= this; -1 = qubits-3");
    app->add_option("--reduce-batch", o.reduce_batch,
                    "gates per barrier for outer-reduce; 0 = auto");
    app->add_option("--mul-bits", o.mul_bits, "log2 multiply cache slots");
    app->add_option("--add-bits", o.add_bits, "log2 add cache slots");
    app->add_flag("--experiment", o.experiment, "unlock experiment-only modes");
}

EngineConfig to_config(const EngineOpts& o) {
    EngineConfig cfg;
    cfg.strategy = *parse_strategy(o.strategy);
    cfg.cache_scope = *parse_cache_scope(o.cache);
    cfg.unique_scope = *parse_unique_scope(o.unique);
    cfg.workers = o.workers;
    cfg.timeout_s = o.timeout_s;
    cfg.spawn_threshold = o.spawn_threshold;
    cfg.reduce_batch = o.reduce_batch;
    cfg.mul_cache_bits = o.mul_bits;
    cfg.add_cache_bits = o.add_bits;
    cfg.experiment_mode = o.experiment;
    return cfg;
}

int cmd_simulate(const std::string& file, const std::vector<std::uint64_t>& rnd,
                 const std::vector<std::uint64_t>& grv, bool decomposed, const EngineOpts& opts,
                 bool csv, int dump, bool validate) {
    Circuit c;
    std::string name;
    std::int64_t marked = -1;
    if (!file.empty()) {
        std::ifstream in(file);
        if (!in) {
            std::fprintf(stderr, "cannot open %s\n", file.c_str());
            return 1;
        }
        c = parse_circuit(in);
        name = "file";
    } else if (rnd.size() == 3) {
        c = random_circuit(int(rnd[0]), int(rnd[1]), rnd[2]);
        name = "random";
    } else if (grv.size() == 2) {
        int n = int(grv[0]);
        marked = std::int64_t(grover_marked(n, grv[1]));
        c = decomposed ? grover_circuit_decomposed(n, std::uint64_t(marked))
                       : grover_circuit(n, std::uint64_t(marked));
        name = "grover";
    } else {
        std::fprintf(stderr, "need --circuit, --random n gates seed, or --grover n seed\n");
        return 1;
    }

    EngineConfig cfg = to_config(opts);
    Simulation sim = simulate(c, cfg);
    const RunMetrics& m = sim.metrics;

    if (csv) {
        BenchRow row;
        row.benchmark = name;
        row.n = c.qubits;
        row.depth = int(c.gates.size());
        row.strategy = cfg.strategy;
        row.cache = cfg.cache_scope;
        row.unique = cfg.unique_scope;
        row.workers = cfg.workers;
        row.seed = rnd.size() == 3 ? rnd[2] : (grv.size() == 2 ? grv[1] : 0);
        row.metrics = m;
        if (marked >= 0 && m.status == RunStatus::OK)
            row.success_p =
                amplitude(*sim.ctx, sim.state, c.qubits, std::uint64_t(marked)).norm2();
        std::printf("%s\n%s\n", csv_header().c_str(), csv_row(row).c_str());
    } else {
        std::printf("status      %s\n", to_string(m.status));
        std::printf("qubits      %d\n", c.qubits);
        std::printf("gates       %zu\n", c.gates.size());
        std::printf("wall_s      %.6f\n", m.wall_s);
        std::printf("peak_nodes  %zu\n", m.peak_nodes);
        std::printf("live_nodes  %zu\n", m.final_live);
        std::printf("mul_hit     %.4f  (%" PRIu64 " lookups)\n", m.cache.mul_hit_ratio(),
                    m.cache.mul_lookups());
        std::printf("add_hit     %.4f  (%" PRIu64 " lookups)\n", m.cache.add_hit_ratio(),
                    m.cache.add_lookups());
        std::printf("spawns      %" PRIu64 "\n", m.spawns);
        std::printf("idle_frac   %.4f\n", m.idle_frac);
        if (m.status == RunStatus::OK) {
            std::printf("norm2       %.12f\n", norm2(*sim.ctx, sim.state));
            if (marked >= 0)
                std::printf("P(marked)   %.9f  (marked=%" PRId64 ")\n",
                            amplitude(*sim.ctx, sim.state, c.qubits, std::uint64_t(marked))
                                .norm2(),
                            marked);
        } else {
            std::printf("error       %s\n", m.error.c_str());
        }
    }

    if (validate && m.status == RunStatus::OK) {
        sim.ctx->validate();
        std::printf("structure   ok\n");
    }
    if (dump > 0 && m.status == RunStatus::OK) {
        auto amps = to_dense(*sim.ctx, sim.state, c.qubits, dump);
        for (std::size_t i = 0; i < amps.size(); ++i)
            std::printf("  |%zu>  % .12f %+.12fi\n", i, amps[i].re, amps[i].im);
    }
    return m.status == RunStatus::OK ? 0 : 2;
}

void emit(std::ostream& out, const BenchRow& row) {
    out << csv_row(row) << "\n" << std::flush;
}

int cmd_bench_grover(const std::vector<int>& ns, const std::vector<std::string>& strategies,
                     const std::vector<std::string>& caches,
                     const std::vector<std::string>& uniques, const std::vector<unsigned>& workers,
                     std::uint64_t seed, int reps, bool decomposed, EngineOpts opts,
                     const std::string& out_path, bool header) {
    std::ofstream of;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        of.open(out_path);
        out = &of;
    }
    if (header) *out << csv_header() << "\n";
    for (int n : ns) {
        std::uint64_t marked = grover_marked(n, seed);
        Circuit c = decomposed ? grover_circuit_decomposed(n, marked) : grover_circuit(n, marked);
        for (const auto& sname : strategies)
            for (const auto& cname : caches)
                for (const auto& uname : uniques)
                    for (unsigned w : workers) {
                        opts.strategy = sname;
                        opts.cache = cname;
                        opts.unique = uname;
                        opts.workers = *parse_strategy(sname) == Strategy::SEQUENTIAL ? 1 : w;
                        EngineConfig cfg = to_config(opts);
                        BenchRow row = bench_run("grover", c, cfg, seed, reps,
                                                 std::int64_t(marked));
                        emit(*out, row);
                    }
    }
    return 0;
}

int cmd_bench_random(const std::vector<int>& ns, int gates,
                     const std::vector<std::string>& strategies,
                     const std::vector<std::string>& caches,
                     const std::vector<std::string>& uniques, const std::vector<unsigned>& workers,
                     std::uint64_t seed, int circuits, int reps, EngineOpts opts,
                     const std::string& out_path, bool header) {
    std::ofstream of;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        of.open(out_path);
        out = &of;
    }
    if (header) *out << csv_header() << "\n";
    for (int n : ns)
        for (int i = 0; i < circuits; ++i) {
            std::uint64_t s = seed + std::uint64_t(i);
            Circuit c = random_circuit(n, gates, s);
            for (const auto& sname : strategies)
                for (const auto& cname : caches)
                    for (const auto& uname : uniques)
                        for (unsigned w : workers) {
                            opts.strategy = sname;
                            opts.cache = cname;
                            opts.unique = uname;
                            opts.workers =
                                *parse_strategy(sname) == Strategy::SEQUENTIAL ? 1 : w;
                            EngineConfig cfg = to_config(opts);
                            BenchRow row = bench_run("random", c, cfg, s, reps);
                            emit(*out, row);
                        }
        }
    return 0;
}

int cmd_order(int n, std::uint64_t seed, int reps, EngineOpts opts) {
    std::uint64_t marked = grover_marked(n, seed);
    Circuit c = grover_circuit_decomposed(n, marked);
    EngineConfig cfg = to_config(opts);
    std::printf("order,n,rep,wall_s,mul_hit,mul_lookups\n");
    for (int r = 0; r < reps; ++r) {
        OrderedRun p = run_reduce_graph_ordered(c, cfg, ReadyOrder::PROGRAM, 0);
        std::printf("program,%d,%d,%.6f,%.4f,%" PRIu64 "\n", n, r, p.wall_s, p.mul_hit,
                    p.mul_lookups);
        OrderedRun q = run_reduce_graph_ordered(c, cfg, ReadyOrder::RANDOM, seed + unsigned(r));
        std::printf("random,%d,%d,%.6f,%.4f,%" PRIu64 "\n", n, r, q.wall_s, q.mul_hit,
                    q.mul_lookups);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"decision diagram quantum circuit simulator"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "run one circuit and report metrics");
    std::string file;
    std::vector<std::uint64_t> rnd, grv;
    bool decomposed = false, csv = false, validate = false;
    int dump = 0;
    EngineOpts sopts;
    sim->add_option("-c,--circuit", file, "circuit text file");
    sim->add_option("--random", rnd, "random circuit: n gates seed")->expected(3);
    sim->add_option("--grover", grv, "grover: n seed")->expected(2);
    sim->add_flag("--decomposed", decomposed, "spell grover iterations gate by gate");
    sim->add_flag("--csv", csv, "emit one CSV row instead of the summary");
    sim->add_flag("--validate", validate, "check structural invariants after the run");
    sim->add_option("--dump", dump, "print all amplitudes (qubit cap)");
    add_engine_opts(sim, sopts);

    // bench-grover
    auto* bg = app.add_subcommand("bench-grover", "grover sweep, CSV output");
    std::vector<int> g_ns{10};
    std::vector<std::string> g_strats{"sequential"}, g_caches{"global"}, g_uniques{"global"};
    std::vector<unsigned> g_workers{1};
    std::uint64_t g_seed = 1;
    int g_reps = 3;
    bool g_decomposed = false, g_no_header = false;
    std::string g_out;
    EngineOpts gopts;
    bg->add_option("-n,--qubits", g_ns, "qubit counts");
    bg->add_option("--strategies", g_strats, "strategies to sweep");
    bg->add_option("--caches", g_caches, "cache scopes to sweep");
    bg->add_option("--uniques", g_uniques, "unique table scopes to sweep");
    bg->add_option("--worker-counts", g_workers, "worker counts to sweep");
    bg->add_option("--seed", g_seed, "marked-state seed");
    bg->add_option("--reps", g_reps, "repetitions per config, median reported");
    bg->add_flag("--decomposed", g_decomposed, "gate-by-gate grover iterations");
    bg->add_flag("--no-header", g_no_header, "omit the CSV header");
    bg->add_option("-o,--out", g_out, "write CSV here instead of stdout");
    add_engine_opts(bg, gopts);

    // bench-random
    auto* br = app.add_subcommand("bench-random", "random circuit sweep, CSV output");
    std::vector<int> r_ns{14};
    int r_gates = 100, r_circuits = 1, r_reps = 3;
    std::vector<std::string> r_strats{"sequential"}, r_caches{"global"}, r_uniques{"global"};
    std::vector<unsigned> r_workers{1};
    std::uint64_t r_seed = 1;
    bool r_no_header = false;
    std::string r_out;
    EngineOpts ropts;
    br->add_option("-n,--qubits", r_ns, "qubit counts");
    br->add_option("--gates", r_gates, "gates per circuit");
    br->add_option("--circuits", r_circuits, "seeds per qubit count (seed, seed+1, ...)");
    br->add_option("--strategies", r_strats, "strategies to sweep");
    br->add_option("--caches", r_caches, "cache scopes to sweep");
    br->add_option("--uniques", r_uniques, "unique table scopes to sweep");
    br->add_option("--worker-counts", r_workers, "worker counts to sweep");
    br->add_option("--seed", r_seed, "base circuit seed");
    br->add_option("--reps", r_reps, "repetitions per config, median reported");
    br->add_flag("--no-header", r_no_header, "omit the CSV header");
    br->add_option("-o,--out", r_out, "write CSV here instead of stdout");
    add_engine_opts(br, ropts);

    // order-experiment
    auto* oe = app.add_subcommand("order-experiment",
                                  "ready-order replay of the reduce graph, program vs random");
    int o_n = 12, o_reps = 3;
    std::uint64_t o_seed = 1;
    EngineOpts oopts;
    oopts.mul_bits = 14;
    oe->add_option("-n,--qubits", o_n, "grover size");
    oe->add_option("--seed", o_seed, "marked-state and shuffle seed");
    oe->add_option("--reps", o_reps, "repetitions of each order");
    add_engine_opts(oe, oopts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(file, rnd, grv, decomposed, sopts, csv, dump, validate);
        if (bg->parsed())
            return cmd_bench_grover(g_ns, g_strats, g_caches, g_uniques, g_workers, g_seed,
                                    g_reps, g_decomposed, gopts, g_out, !g_no_header);
        if (br->parsed())
            return cmd_bench_random(r_ns, r_gates, r_strats, r_caches, r_uniques, r_workers,
                                    r_seed, r_circuits, r_reps, ropts, r_out, !r_no_header);
        if (oe->parsed()) return cmd_order(o_n, o_seed, o_reps, oopts);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
