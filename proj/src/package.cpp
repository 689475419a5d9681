#include "parqdd/context.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace parqdd {

thread_local unsigned tls_worker = 0;
thread_local std::uint32_t tls_poll_counter = 0;

namespace {
constexpr std::size_t kMinWatermark = std::size_t{1} << 14;
}

ExecContext::ExecContext(const ExecConfig& cfg)
    : qubits_(cfg.qubits),
      workers_(cfg.workers),
      per_worker_tables_(cfg.per_worker_tables),
      cache_scope_(cfg.cache.scope),
      cnums_(cfg.tolerance, 18, cfg.max_complex),
      watermark_(kMinWatermark) {
    if (cfg.qubits < 1 || cfg.qubits > 30)
        throw UnsupportedConfig("qubit count out of range");
    if (cfg.workers < 1 || cfg.workers > kMaxWorkers)
        throw UnsupportedConfig("worker count out of range");
    if (cfg.per_worker_tables && cfg.workers >= kMaxTables)
        throw UnsupportedConfig("too many workers for per-worker tables");

    unsigned npkg = cfg.per_worker_tables ? cfg.workers : 1;
    packages_.reserve(npkg);
    for (unsigned t = 0; t < npkg; ++t)
        packages_.push_back(std::make_unique<Package>(cnums_, t, cfg.pkg));

    switch (cfg.cache.scope) {
    case CacheScope::NONE:
        break;
    case CacheScope::GLOBAL:
        caches_.push_back(std::make_unique<OpCache>(cfg.cache.mul_bits, cfg.cache.add_bits));
        break;
    case CacheScope::LOCAL:
        for (unsigned w = 0; w < cfg.workers; ++w)
            caches_.push_back(std::make_unique<OpCache>(cfg.cache.mul_bits, cfg.cache.add_bits));
        break;
    }

    stats_.resize(std::max(1u, cfg.workers));

    identity_.resize(qubits_);
    MEdge below = mone;
    for (int l = 0; l < qubits_; ++l) {
        MEdge c[4] = {below, mzero, mzero, below};
        identity_[l] = packages_[0]->make_mnode(l, c);
        below = identity_[l];
    }
    inc_ref(identity_[qubits_ - 1]); // pinned: is_identity addresses these slots
}

VEdge ExecContext::basis_state(std::uint64_t bits) {
    VEdge e = vone;
    for (int l = 0; l < qubits_; ++l) {
        VEdge c[2] = {vzero, vzero};
        c[(bits >> l) & 1u] = e;
        e = make_vnode(l, c);
    }
    return e;
}

template <typename E>
void ExecContext::inc_ref_impl(E e) {
    if (e.n == TERMINAL) return;
    auto& nd = [&]() -> auto& {
        if constexpr (std::is_same_v<E, VEdge>) return vnode(e.n);
        else return mnode(e.n);
    }();
    if (nd.ref.fetch_add(1, std::memory_order_acq_rel) == 0) {
        for (auto child : nd.c) inc_ref_impl(child);
    }
}

template <typename E>
void ExecContext::dec_ref_impl(E e) {
    if (e.n == TERMINAL) return;
    auto& nd = [&]() -> auto& {
        if constexpr (std::is_same_v<E, VEdge>) return vnode(e.n);
        else return mnode(e.n);
    }();
    std::uint32_t prev = nd.ref.fetch_sub(1, std::memory_order_acq_rel);
    assert(prev != 0);
    if (prev == 1) {
        for (auto child : nd.c) dec_ref_impl(child);
    }
}

void ExecContext::inc_ref(VEdge e) { inc_ref_impl(e); }
void ExecContext::inc_ref(MEdge e) { inc_ref_impl(e); }
void ExecContext::dec_ref(VEdge e) { dec_ref_impl(e); }
void ExecContext::dec_ref(MEdge e) { dec_ref_impl(e); }

std::size_t ExecContext::live_nodes() const {
    std::size_t s = 0;
    for (const auto& p : packages_) s += p->live_nodes();
    return s;
}

std::size_t ExecContext::allocated_nodes() const {
    std::size_t s = 0;
    for (const auto& p : packages_) s += p->allocated_nodes();
    return s;
}

std::size_t ExecContext::sweep() {
    clear_caches();
    std::size_t freed = 0;
    for (auto& p : packages_) {
        freed += p->vtab().sweep();
        freed += p->mtab().sweep();
    }
    watermark_ = std::max(kMinWatermark, 2 * live_nodes());
    return freed;
}

CacheStats ExecContext::cache_stats() const {
    CacheStats out;
    for (const auto& w : stats_) out.merge(w.cache);
    return out;
}

std::uint64_t ExecContext::total_spawns() const {
    std::uint64_t s = 0;
    for (const auto& w : stats_) s += w.spawns;
    return s;
}

namespace {

template <typename NodeT>
void check_node(ExecContext& ctx, int qubits, NodeId id, const NodeT& nd,
                std::vector<std::pair<NodeId, NodeT*>>& recheck) {
    std::ostringstream err;
    auto die = [&](const char* what) {
        err << "node " << std::hex << id << std::dec << " level " << int(nd.level) << ": " << what;
        throw std::runtime_error(err.str());
    };
    if (nd.level < 0 || nd.level >= qubits) die("level out of range");
    int first = -1;
    for (unsigned i = 0; i < NodeT::kChildren; ++i) {
        auto e = nd.c[i];
        if (e.w == ComplexTable::ZERO) {
            if (e.n != TERMINAL) die("zero-weight child must target TERMINAL");
            continue;
        }
        if (first < 0) {
            first = int(i);
            if (e.w != ComplexTable::ONE) die("first nonzero child weight must be one");
        }
        if (e.w >= ctx.cnums().size()) die("child weight id out of range");
        if (nd.level == 0) {
            if (e.n != TERMINAL) die("level-0 child must be a scalar");
        } else {
            if (e.n == TERMINAL) die("nonzero child skips levels");
            int cl;
            if constexpr (std::is_same_v<NodeT, VectorNode>) cl = ctx.vnode(e.n).level;
            else cl = ctx.mnode(e.n).level;
            if (cl != nd.level - 1) die("child level mismatch");
        }
    }
    if (first < 0) die("all-zero node exists");
    recheck.push_back({id, const_cast<NodeT*>(&nd)});
}

} // namespace

void ExecContext::validate() {
    std::vector<std::pair<NodeId, VectorNode*>> vns;
    std::vector<std::pair<NodeId, MatrixNode*>> mns;
    for (auto& p : packages_) {
        p->vtab().for_each([&](NodeId id, const VectorNode& nd) {
            check_node(*this, qubits_, id, nd, vns);
        });
        p->mtab().for_each([&](NodeId id, const MatrixNode& nd) {
            check_node(*this, qubits_, id, nd, mns);
        });
    }
    // Hash-consing check: re-making any live node must find that node.
    for (auto [id, nd] : vns) {
        VEdge again = packages_[table_tag(id)]->make_vnode(nd->level, nd->c);
        if (again.n != id || again.w != ComplexTable::ONE)
            throw std::runtime_error("vector node not canonical under re-make");
    }
    for (auto [id, nd] : mns) {
        MEdge again = packages_[table_tag(id)]->make_mnode(nd->level, nd->c);
        if (again.n != id || again.w != ComplexTable::ONE)
            throw std::runtime_error("matrix node not canonical under re-make");
    }
}

} // namespace parqdd
