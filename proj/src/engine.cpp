#include "parqdd/engine.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <mutex>
#include <thread>
#include <unordered_map>

#include <omp.h>

#include "parqdd/fiber_pool.hpp"
#include "parqdd/idle.hpp"
#include "parqdd/ops.hpp"
#include "parqdd/rng.hpp"

namespace parqdd {
namespace {

using clock_t_ = std::chrono::steady_clock;

// ---- gate DD memo ----
// Gate operators are reference-counted on first build so sweeps keep them.

struct GateKey {
    std::uint32_t kind;
    std::int32_t target;
    std::int32_t control;
    std::uint64_t angle_bits;
    std::uint64_t mask;
    bool operator==(const GateKey&) const = default;
};

struct GateKeyHash {
    std::size_t operator()(const GateKey& k) const {
        auto mix = [](std::uint64_t x) {
            x += 0x9e3779b97f4a7c15ull;
            x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
            x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
            return x ^ (x >> 31);
        };
        std::uint64_t h = mix(k.kind | (std::uint64_t(std::uint32_t(k.target)) << 8) |
                              (std::uint64_t(std::uint32_t(k.control)) << 40));
        h = mix(h ^ k.angle_bits);
        h = mix(h ^ k.mask);
        return std::size_t(h);
    }
};

struct GateMemo {
    explicit GateMemo(ExecContext& c) : ctx(c) {}
    ExecContext& ctx;
    std::unordered_map<GateKey, MEdge, GateKeyHash> map;

    MEdge get(const Gate& g) {
        GateKey k{std::uint32_t(g.kind), g.target, g.control,
                  std::bit_cast<std::uint64_t>(g.angle), g.mask};
        auto it = map.find(k);
        if (it != map.end()) return it->second;
        MEdge m = gate_to_dd(ctx, g);
        ctx.inc_ref(m); // pinned for the whole run
        map.emplace(k, m);
        return m;
    }
};

// ---- timeout ----

class Watchdog {
public:
    Watchdog(ExecContext& ctx, double seconds) {
        if (seconds <= 0) return;
        auto deadline = clock_t_::now() + std::chrono::duration_cast<clock_t_::duration>(
                                              std::chrono::duration<double>(seconds));
        th_ = std::thread([this, &ctx, deadline] {
            std::unique_lock<std::mutex> lk(mx_);
            if (!cv_.wait_until(lk, deadline, [this] { return stop_; }))
                ctx.request_cancel(CancelReason::TIMEOUT);
        });
    }
    ~Watchdog() {
        if (!th_.joinable()) return;
        {
            std::lock_guard<std::mutex> lk(mx_);
            stop_ = true;
        }
        cv_.notify_all();
        th_.join();
    }

private:
    std::thread th_;
    std::mutex mx_;
    std::condition_variable cv_;
    bool stop_ = false;
};

// ---- shared gate loop (sequential and both inner strategies) ----

VEdge gate_loop(ExecContext& ctx, const Circuit& c, GateMemo& memo, bool gc) {
    VEdge state = ctx.basis_state(0);
    ctx.inc_ref(state);
    for (const Gate& g : c.gates) {
        if (ctx.cancel.load(std::memory_order_relaxed)) throw RunCancelled{};
        MEdge op = memo.get(g);
        VEdge next = mul(ctx, op, state);
        ctx.inc_ref(next);
        ctx.dec_ref(state);
        state = next;
        // between gates every worker is drained, so sweeping is safe
        if (gc && ctx.wants_sweep()) ctx.sweep();
    }
    return state;
}

// ---- inner-threads backend ----

class OmpRunner : public ChildRunner {
public:
    OmpRunner(ExecContext& ctx, IdleRecorder& rec) : ctx_(ctx), rec_(rec) {}

    void run_children(FnRef f, const unsigned* idx, unsigned count) override {
        ctx_.worker_stats(tls_worker).spawns += count - 1;
#pragma omp taskgroup
        {
            for (unsigned j = 1; j < count; ++j) {
                unsigned i = idx[j];
#pragma omp task firstprivate(i) default(shared)
                {
                    double b = rec_.now();
                    ctx_.worker_stats(tls_worker).tasks_run++;
                    try {
                        f(i);
                    } catch (RunCancelled&) {
                    } catch (...) {
                        ctx_.record_failure(std::current_exception());
                    }
                    rec_.record(tls_worker, b, rec_.now());
                }
            }
            try {
                f(idx[0]);
            } catch (RunCancelled&) {
                ctx_.request_cancel(CancelReason::ERROR); // already cancelled in practice
            } catch (...) {
                ctx_.record_failure(std::current_exception());
            }
        }
        if (ctx_.cancel.load(std::memory_order_relaxed)) throw RunCancelled{};
    }

private:
    ExecContext& ctx_;
    IdleRecorder& rec_;
};

VEdge run_inner_threads(ExecContext& ctx, const Circuit& c, GateMemo& memo, unsigned workers,
                        IdleRecorder& rec, bool gc) {
    VEdge out{};
    std::exception_ptr ep;
    OmpRunner runner(ctx, rec);
    omp_set_dynamic(0);
#pragma omp parallel num_threads(int(workers)) default(shared)
    {
        tls_worker = unsigned(omp_get_thread_num());
#pragma omp master
        {
            ctx.spawner = &runner;
            try {
                out = gate_loop(ctx, c, memo, gc);
            } catch (...) {
                ep = std::current_exception();
                ctx.request_cancel(CancelReason::ERROR);
            }
            ctx.spawner = nullptr;
        }
    }
    tls_worker = 0;
    if (ep) std::rethrow_exception(ep);
    return out;
}

VEdge run_inner_fibers(ExecContext& ctx, const Circuit& c, GateMemo& memo, unsigned workers,
                       IdleRecorder& rec, bool gc) {
    VEdge out{};
    std::exception_ptr ep;
    FiberRunner runner(ctx, rec);
    run_with_fiber_pool(workers, [&] {
        ctx.spawner = &runner;
        try {
            out = gate_loop(ctx, c, memo, gc);
        } catch (...) {
            ep = std::current_exception();
            ctx.request_cancel(CancelReason::ERROR);
        }
        ctx.spawner = nullptr;
    });
    if (ep) std::rethrow_exception(ep);
    return out;
}

// ---- outer task-graph backend ----

struct OuterExec {
    ExecContext& ctx;
    const TaskGraph& g;
    const std::vector<MEdge>& dds;
    VEdge input; // referenced by the caller
    IdleRecorder& rec;

    std::vector<MEdge> mres;
    std::vector<VEdge> vres;
    std::unique_ptr<std::atomic<int>[]> pending;
    TaskTrace trace;
    std::atomic<std::size_t> remaining{0};
    std::atomic<bool> abort{false};
    VEdge held{}; // state kept referenced across REDUCE points

    struct alignas(64) WQ {
        std::mutex mx;
        std::deque<int> q;
    };
    std::unique_ptr<WQ[]> queues;
    unsigned nworkers = 1;

    std::mutex smx;
    std::condition_variable scv;
    std::uint64_t gen = 0;

    OuterExec(ExecContext& ctx_, const TaskGraph& g_, const std::vector<MEdge>& dds_,
              VEdge input_, IdleRecorder& rec_)
        : ctx(ctx_), g(g_), dds(dds_), input(input_), rec(rec_) {}

    MEdge matof(OpRef r) const {
        return r.kind == OpRef::GATE ? dds[std::size_t(r.idx)] : mres[std::size_t(r.idx)];
    }
    VEdge vecof(OpRef r) const {
        return r.kind == OpRef::STATE ? input : vres[std::size_t(r.idx)];
    }

    void bump() {
        {
            std::lock_guard<std::mutex> lk(smx);
            ++gen;
        }
        scv.notify_all();
    }

    void push(unsigned w, int id) {
        {
            std::lock_guard<std::mutex> lk(queues[w].mx);
            queues[w].q.push_back(id);
        }
        bump();
    }

    int take(unsigned w) {
        {
            std::lock_guard<std::mutex> lk(queues[w].mx);
            if (!queues[w].q.empty()) {
                int id = queues[w].q.back();
                queues[w].q.pop_back();
                return id;
            }
        }
        for (unsigned s = 1; s < nworkers; ++s) {
            unsigned v = (w + s) % nworkers;
            std::lock_guard<std::mutex> lk(queues[v].mx);
            if (!queues[v].q.empty()) {
                int id = queues[v].q.front();
                queues[v].q.pop_front();
                return id;
            }
        }
        return -1;
    }

    void run_task(unsigned w, int id) {
        const TaskNode& t = g.nodes[std::size_t(id)];
        double b = rec.now();
        bool ok = true;
        try {
            switch (t.kind) {
            case TaskNode::MULMM:
                mres[std::size_t(id)] = mul(ctx, matof(t.a), matof(t.b));
                break;
            case TaskNode::MULMV:
                vres[std::size_t(id)] = mul(ctx, matof(t.a), vecof(t.b));
                break;
            case TaskNode::REDUCE: {
                // quiescent by construction: everything before the barrier is
                // done, everything after depends on this node
                VEdge cur = vecof(t.a);
                ctx.inc_ref(cur);
                ctx.dec_ref(held);
                held = cur;
                vres[std::size_t(id)] = cur;
                if (ctx.wants_sweep()) ctx.sweep();
                break;
            }
            }
        } catch (RunCancelled&) {
            ok = false;
        } catch (...) {
            ctx.record_failure(std::current_exception());
            ok = false;
        }
        double e = rec.now();
        trace.start_s[std::size_t(id)] = b;
        trace.end_s[std::size_t(id)] = e;
        trace.worker[std::size_t(id)] = int(w);
        rec.record(w, b, e);
        ctx.worker_stats(w).tasks_run++;
        if (!ok) {
            abort.store(true, std::memory_order_relaxed);
            bump();
            return;
        }
        for (int d : t.dependents)
            if (pending[std::size_t(d)].fetch_sub(1, std::memory_order_acq_rel) == 1)
                push(w, d);
        if (remaining.fetch_sub(1, std::memory_order_acq_rel) == 1) bump();
    }

    void worker_loop(unsigned w) {
        tls_worker = w;
        for (;;) {
            if (abort.load(std::memory_order_relaxed) ||
                ctx.cancel.load(std::memory_order_relaxed))
                break;
            if (remaining.load(std::memory_order_acquire) == 0) break;
            int id = take(w);
            if (id >= 0) {
                run_task(w, id);
                continue;
            }
            std::uint64_t g0;
            {
                std::lock_guard<std::mutex> lk(smx);
                g0 = gen;
            }
            id = take(w); // racing push may have hit an empty-looking queue
            if (id >= 0) {
                run_task(w, id);
                continue;
            }
            std::unique_lock<std::mutex> lk(smx);
            scv.wait_for(lk, std::chrono::milliseconds(10), [&] { return gen != g0; });
        }
        tls_worker = 0;
    }

    void run(unsigned workers) {
        nworkers = workers;
        std::size_t n = g.nodes.size();
        mres.assign(n, MEdge{});
        vres.assign(n, VEdge{});
        pending.reset(new std::atomic<int>[n]);
        trace.start_s.assign(n, 0.0);
        trace.end_s.assign(n, 0.0);
        trace.worker.assign(n, -1);
        queues.reset(new WQ[workers]);
        held = input;
        ctx.inc_ref(held); // balanced by the dec in ~run path below
        remaining.store(n, std::memory_order_relaxed);
        unsigned rr = 0;
        for (std::size_t i = 0; i < n; ++i) {
            pending[i].store(g.nodes[i].indegree, std::memory_order_relaxed);
            if (g.nodes[i].indegree == 0) queues[rr++ % workers].q.push_back(int(i));
        }
        std::vector<std::thread> ths;
        ths.reserve(workers - 1);
        for (unsigned w = 1; w < workers; ++w)
            ths.emplace_back([this, w] { worker_loop(w); });
        worker_loop(0);
        for (auto& t : ths) t.join();
        ctx.worker_stats(0).spawns += n;
        ctx.dec_ref(held);
        if (abort.load(std::memory_order_relaxed) || ctx.cancel.load(std::memory_order_relaxed))
            throw RunCancelled{};
    }

    VEdge output() const { return g.output < 0 ? input : vres[std::size_t(g.output)]; }
};

int auto_reduce_batch(const Circuit& c) {
    for (const Gate& g : c.gates)
        if (g.kind == GateKind::GROVER_ITER) return 1;
    return 8;
}

VEdge run_outer(ExecContext& ctx, const Circuit& c, GateMemo& memo, const EngineConfig& cfg,
                IdleRecorder& rec, TaskTrace& trace_out) {
    std::vector<MEdge> dds;
    dds.reserve(c.gates.size());
    for (const Gate& g : c.gates) dds.push_back(memo.get(g));
    int batch = cfg.reduce_batch > 0 ? cfg.reduce_batch : auto_reduce_batch(c);
    TaskGraph g = build_taskgraph(c, cfg.strategy, cfg.workers, batch);
    check_taskgraph(g);
    VEdge input = ctx.basis_state(0);
    ctx.inc_ref(input);
    OuterExec ex(ctx, g, dds, input, rec);
    ex.run(cfg.workers);
    trace_out = std::move(ex.trace);
    VEdge out = ex.output();
    ctx.inc_ref(out);
    return out;
}

void validate_config(const Circuit& c, const EngineConfig& cfg) {
    if (cfg.workers < 1 || cfg.workers > kMaxWorkers)
        throw UnsupportedConfig("workers out of range");
    if (cfg.strategy == Strategy::SEQUENTIAL && cfg.workers != 1)
        throw UnsupportedConfig("sequential runs use exactly one worker");
    if (cfg.unique_scope == UniqueScope::PER_WORKER) {
        if (!cfg.experiment_mode)
            throw UnsupportedConfig("per-worker unique tables are an experiment-only mode");
        if (cfg.strategy != Strategy::INNER_THREADS && cfg.strategy != Strategy::INNER_FIBERS)
            throw UnsupportedConfig("per-worker unique tables need an inner strategy");
    }
    if (cfg.reduce_batch < 0) throw UnsupportedConfig("reduce_batch must be >= 0");
    if (c.qubits < 1) throw UnsupportedConfig("circuit needs at least one qubit");
}

ExecConfig make_exec_config(const Circuit& c, const EngineConfig& cfg) {
    ExecConfig xc;
    xc.qubits = c.qubits;
    xc.workers = cfg.workers;
    xc.per_worker_tables = cfg.unique_scope == UniqueScope::PER_WORKER;
    xc.cache.scope = cfg.cache_scope;
    xc.cache.mul_bits = cfg.mul_cache_bits;
    xc.cache.add_bits = cfg.add_cache_bits;
    xc.pkg.max_nodes = cfg.max_nodes;
    xc.max_complex = cfg.max_complex;
    return xc;
}

} // namespace

Simulation simulate(const Circuit& c, const EngineConfig& cfg) {
    validate_config(c, cfg);
    auto t0 = clock_t_::now();
    Simulation sim;
    sim.ctx = std::make_unique<ExecContext>(make_exec_config(c, cfg));
    ExecContext& ctx = *sim.ctx;
    ctx.spawn_level = cfg.spawn_threshold >= 0 ? cfg.spawn_threshold : c.qubits - 3;
    bool gc = cfg.unique_scope == UniqueScope::GLOBAL;

    IdleRecorder rec;
    rec.start(cfg.workers);
    GateMemo memo(ctx);
    RunMetrics& m = sim.metrics;
    VEdge state{};
    {
        Watchdog dog(ctx, cfg.timeout_s);
        try {
            try {
                switch (cfg.strategy) {
                case Strategy::SEQUENTIAL:
                    state = gate_loop(ctx, c, memo, gc);
                    break;
                case Strategy::INNER_THREADS:
                    state = run_inner_threads(ctx, c, memo, cfg.workers, rec, gc);
                    break;
                case Strategy::INNER_FIBERS:
                    state = run_inner_fibers(ctx, c, memo, cfg.workers, rec, gc);
                    break;
                case Strategy::OUTER_LINEAR:
                case Strategy::OUTER_ASSOC:
                case Strategy::OUTER_REDUCE:
                    state = run_outer(ctx, c, memo, cfg, rec, sim.trace);
                    break;
                }
            } catch (RunCancelled&) {
                ctx.rethrow_failure(); // a recorded error outranks the timeout
                m.status = RunStatus::TIMEOUT;
                m.error = "timed out";
            }
        } catch (const std::bad_alloc&) {
            m.status = RunStatus::OOM;
            m.error = "allocation failure";
        } catch (const std::length_error& e) {
            m.status = RunStatus::OOM;
            m.error = e.what();
        }
    }
    m.wall_s = std::chrono::duration<double>(clock_t_::now() - t0).count();
    m.cache = ctx.cache_stats();
    m.spawns = ctx.total_spawns();
    m.peak_nodes = ctx.allocated_nodes();
    m.final_live = ctx.live_nodes();
    m.idle_s = rec.idle_seconds();
    double idle_sum = 0;
    for (double v : m.idle_s) idle_sum += v;
    m.idle_frac = (m.wall_s > 0 && !m.idle_s.empty())
                      ? idle_sum / double(m.idle_s.size()) / m.wall_s
                      : 0.0;
    if (m.status == RunStatus::OK) sim.state = state;
    return sim;
}

OrderedRun run_reduce_graph_ordered(const Circuit& c, const EngineConfig& cfg, ReadyOrder order,
                                    std::uint64_t order_seed) {
    EngineConfig ec = cfg;
    ec.strategy = Strategy::OUTER_REDUCE;
    ec.workers = 1;
    validate_config(c, ec);

    auto t0 = clock_t_::now();
    ExecContext ctx(make_exec_config(c, ec));
    GateMemo memo(ctx);
    std::vector<MEdge> dds;
    dds.reserve(c.gates.size());
    for (const Gate& g : c.gates) dds.push_back(memo.get(g));
    int batch = ec.reduce_batch > 0 ? ec.reduce_batch : auto_reduce_batch(c);
    TaskGraph g = build_taskgraph(c, Strategy::OUTER_REDUCE, 1, batch);
    check_taskgraph(g);

    std::size_t n = g.nodes.size();
    std::vector<MEdge> mres(n);
    std::vector<VEdge> vres(n);
    std::vector<int> pending(n);
    VEdge input = ctx.basis_state(0);
    ctx.inc_ref(input);
    VEdge held = input;
    ctx.inc_ref(held);

    std::vector<int> ready;
    for (std::size_t i = 0; i < n; ++i) {
        pending[i] = g.nodes[i].indegree;
        if (pending[i] == 0) ready.push_back(int(i));
    }
    Xoshiro256 rng(order_seed);

    auto matof = [&](OpRef r) {
        return r.kind == OpRef::GATE ? dds[std::size_t(r.idx)] : mres[std::size_t(r.idx)];
    };
    auto vecof = [&](OpRef r) {
        return r.kind == OpRef::STATE ? input : vres[std::size_t(r.idx)];
    };

    while (!ready.empty()) {
        std::size_t pick = 0;
        if (order == ReadyOrder::RANDOM) {
            pick = std::size_t(rng.below(ready.size()));
        } else {
            for (std::size_t i = 1; i < ready.size(); ++i)
                if (ready[i] < ready[pick]) pick = i; // lowest id first: program order
        }
        int id = ready[pick];
        ready[pick] = ready.back();
        ready.pop_back();

        const TaskNode& t = g.nodes[std::size_t(id)];
        switch (t.kind) {
        case TaskNode::MULMM:
            mres[std::size_t(id)] = mul(ctx, matof(t.a), matof(t.b));
            break;
        case TaskNode::MULMV:
            vres[std::size_t(id)] = mul(ctx, matof(t.a), vecof(t.b));
            break;
        case TaskNode::REDUCE: {
            VEdge cur = vecof(t.a);
            ctx.inc_ref(cur);
            ctx.dec_ref(held);
            held = cur;
            vres[std::size_t(id)] = cur;
            if (ctx.wants_sweep()) ctx.sweep();
            break;
        }
        }
        for (int d : t.dependents)
            if (--pending[std::size_t(d)] == 0) ready.push_back(d);
    }

    OrderedRun out;
    out.wall_s = std::chrono::duration<double>(clock_t_::now() - t0).count();
    CacheStats cs = ctx.cache_stats();
    out.mul_hit = cs.mul_hit_ratio();
    out.mul_lookups = cs.mul_lookups();
    return out;
}

std::string csv_header() {
    return "benchmark,n,depth,strategy,cache,unique,workers,seed,wall_s,mul_hit,add_hit,"
           "idle_frac,peak_nodes,success_p,status";
}

std::string csv_row(const BenchRow& r) {
    char buf[512];
    char succ[32] = "";
    if (r.success_p >= 0) std::snprintf(succ, sizeof succ, "%.6f", r.success_p);
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%s,%s,%s,%u,%llu,%.6f,%.4f,%.4f,%.4f,%zu,%s,%s",
                  r.benchmark.c_str(), r.n, r.depth, to_string(r.strategy), to_string(r.cache),
                  to_string(r.unique), r.workers, (unsigned long long)r.seed, r.metrics.wall_s,
                  r.metrics.cache.mul_hit_ratio(), r.metrics.cache.add_hit_ratio(),
                  r.metrics.idle_frac, r.metrics.peak_nodes, succ, to_string(r.metrics.status));
    return buf;
}

BenchRow bench_run(const std::string& benchmark, const Circuit& c, const EngineConfig& cfg,
                   std::uint64_t seed, int reps, std::int64_t marked) {
    if (reps < 1) reps = 1;
    struct Rep {
        RunMetrics m;
        double p = -1;
    };
    std::vector<Rep> runs;
    runs.reserve(std::size_t(reps));
    for (int r = 0; r < reps; ++r) {
        Simulation sim = simulate(c, cfg);
        Rep rep;
        rep.m = std::move(sim.metrics);
        if (marked >= 0 && rep.m.status == RunStatus::OK)
            rep.p = amplitude(*sim.ctx, sim.state, c.qubits, std::uint64_t(marked)).norm2();
        runs.push_back(std::move(rep));
    }
    std::vector<std::size_t> idx(runs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return runs[a].m.wall_s < runs[b].m.wall_s; });
    const Rep& med = runs[idx[idx.size() / 2]];

    BenchRow row;
    row.benchmark = benchmark;
    row.n = c.qubits;
    row.depth = int(c.gates.size());
    row.strategy = cfg.strategy;
    row.cache = cfg.cache_scope;
    row.unique = cfg.unique_scope;
    row.workers = cfg.workers;
    row.seed = seed;
    row.metrics = med.m;
    row.success_p = med.p;
    return row;
}

} // namespace parqdd
