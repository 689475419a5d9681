#pragma once

#include <atomic>
#include <cassert>
#include <cstdint>
#include <exception>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "parqdd/complex.hpp"
#include "parqdd/node.hpp"
#include "parqdd/opcache.hpp"
#include "parqdd/package.hpp"

namespace parqdd {

inline constexpr unsigned kMaxWorkers = 16;

// Which worker the current thread acts as. Set by the engines; 0 outside.
extern thread_local unsigned tls_worker;

// Thrown from the cancellation poll; engines map it to a run status.
struct RunCancelled {};

enum class CancelReason : int { NONE = 0, TIMEOUT = 1, ERROR = 2 };

// Non-owning callable reference, cheap enough to pass through spawn paths.
class FnRef {
public:
    template <typename F>
    FnRef(F& f) : obj_(&f), call_(+[](void* o, unsigned i) { (*static_cast<F*>(o))(i); }) {}
    void operator()(unsigned i) const { call_(obj_, i); }

private:
    void* obj_;
    void (*call_)(void*, unsigned);
};

// Backend hook for parallel recursion. run_children runs f(idx[j]) for all j
// and returns once every child finished; implementations may hand children to
// other workers. Exceptions from children must propagate to the caller.
class ChildRunner {
public:
    virtual ~ChildRunner() = default;
    virtual void run_children(FnRef f, const unsigned* idx, unsigned count) = 0;
};

struct alignas(64) WorkerStats {
    CacheStats cache;
    std::uint64_t spawns = 0;       // children handed to the scheduler
    std::uint64_t tasks_run = 0;    // scheduled units executed on this worker
};

struct UnsupportedConfig : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ExecConfig {
    int qubits = 1;
    unsigned workers = 1;
    bool per_worker_tables = false;
    CacheConfig cache;
    PackageConfig pkg;
    double tolerance = 1e-12;
    std::size_t max_complex = std::size_t{1} << 26;
};

// Everything one simulation run owns: the number table, the node tables, the
// operation caches, spawn plumbing, per-worker counters, GC bookkeeping.
class ExecContext {
public:
    explicit ExecContext(const ExecConfig& cfg);

    int qubits() const { return qubits_; }
    unsigned workers() const { return workers_; }

    ComplexTable& cnums() { return cnums_; }
    const ComplexTable& cnums() const { return cnums_; }

    Package& package(unsigned tag) { return *packages_[tag]; }
    unsigned package_count() const { return unsigned(packages_.size()); }
    Package& local_package() {
        return *packages_[per_worker_tables_ ? tls_worker : 0];
    }

    VectorNode& vnode(NodeId id) {
        return packages_[table_tag(id)]->vnode_at(node_index(id));
    }
    MatrixNode& mnode(NodeId id) {
        return packages_[table_tag(id)]->mnode_at(node_index(id));
    }
    int vlevel(VEdge e) { return e.n == TERMINAL ? -1 : vnode(e.n).level; }
    int mlevel(MEdge e) { return e.n == TERMINAL ? -1 : mnode(e.n).level; }

    VEdge make_vnode(int level, const VEdge (&c)[2]) {
        return local_package().make_vnode(level, c);
    }
    MEdge make_mnode(int level, const MEdge (&c)[4]) {
        return local_package().make_mnode(level, c);
    }

    // ---- prebuilt structure ----
    // identity(l) spans levels l..0; is_identity recognizes only these
    // shared-package instances, which is all the multiply fast path needs.
    MEdge identity(int level) const {
        assert(level >= 0 && level < qubits_);
        return identity_[level];
    }
    bool is_identity(NodeId id, int level) const {
        return level >= 0 && level < qubits_ && identity_[level].n == id;
    }
    VEdge basis_state(std::uint64_t bits);

    // ---- operation cache ----
    bool cache_get(OpKind k, NodeId a, NodeId b, ComplexId ratio, NodeId& rn, ComplexId& rw) {
        OpCache* c = cache_for(tls_worker);
        if (!c) return false;
        auto& st = stats_[tls_worker].cache;
        st.lookups[unsigned(k)]++;
        if (!c->get(k, a, b, ratio, rn, rw)) return false;
        st.hits[unsigned(k)]++;
        return true;
    }
    // Probe without stats, for spawn-worthiness checks.
    bool cache_peek(OpKind k, NodeId a, NodeId b, ComplexId ratio) {
        OpCache* c = cache_for(tls_worker);
        NodeId rn;
        ComplexId rw;
        return c && c->get(k, a, b, ratio, rn, rw);
    }
    void cache_put(OpKind k, NodeId a, NodeId b, ComplexId ratio, NodeId rn, ComplexId rw) {
        if (OpCache* c = cache_for(tls_worker)) c->put(k, a, b, ratio, rn, rw);
    }
    void clear_caches() {
        for (auto& c : caches_) c->clear();
    }
    CacheScope cache_scope() const { return cache_scope_; }

    // ---- reference counting / GC ----
    void inc_ref(VEdge e);
    void inc_ref(MEdge e);
    void dec_ref(VEdge e);
    void dec_ref(MEdge e);

    std::size_t live_nodes() const;
    std::size_t allocated_nodes() const; // arena high water, tracks peak live
    bool wants_sweep() const { return live_nodes() > watermark_; }
    // Quiescent callers only: unlinks dead nodes, invalidates caches,
    // adjusts the sweep watermark. Returns nodes freed.
    std::size_t sweep();

    // Structural integrity check over every live node; throws on violation.
    void validate();

    // ---- spawn plumbing ----
    ChildRunner* spawner = nullptr;
    int spawn_level = 127; // spawn only at node level >= this

    WorkerStats& worker_stats(unsigned w) { return stats_[w]; }
    CacheStats cache_stats() const;
    std::uint64_t total_spawns() const;

    // ---- cancellation ----
    std::atomic<bool> cancel{false};
    std::atomic<int> cancel_reason{int(CancelReason::NONE)};

    void request_cancel(CancelReason r) {
        int expected = int(CancelReason::NONE);
        cancel_reason.compare_exchange_strong(expected, int(r));
        cancel.store(true, std::memory_order_relaxed);
    }
    // First failure wins; later ones are dropped.
    void record_failure(std::exception_ptr ep) {
        std::lock_guard<std::mutex> lk(fail_mx_);
        if (!failure_) failure_ = ep;
        request_cancel(CancelReason::ERROR);
    }
    void rethrow_failure() {
        std::exception_ptr ep;
        {
            std::lock_guard<std::mutex> lk(fail_mx_);
            ep = failure_;
        }
        if (ep) std::rethrow_exception(ep);
    }

private:
    OpCache* cache_for(unsigned worker) {
        switch (cache_scope_) {
        case CacheScope::NONE: return nullptr;
        case CacheScope::GLOBAL: return caches_[0].get();
        case CacheScope::LOCAL: return caches_[worker].get();
        }
        return nullptr;
    }

    template <typename E> void inc_ref_impl(E e);
    template <typename E> void dec_ref_impl(E e);

    int qubits_;
    unsigned workers_;
    bool per_worker_tables_;
    CacheScope cache_scope_;
    ComplexTable cnums_;
    std::vector<std::unique_ptr<Package>> packages_;
    std::vector<std::unique_ptr<OpCache>> caches_;
    std::vector<MEdge> identity_;
    std::vector<WorkerStats> stats_;
    std::size_t watermark_;
    std::mutex fail_mx_;
    std::exception_ptr failure_;
};

extern thread_local std::uint32_t tls_poll_counter;

inline void poll_cancel(ExecContext& ctx) {
    if ((++tls_poll_counter & 0x3ffu) == 0 && ctx.cancel.load(std::memory_order_relaxed))
        throw RunCancelled{};
}

} // namespace parqdd
