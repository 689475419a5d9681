#pragma once

#include <atomic>
#include <cassert>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <stdexcept>

#include "parqdd/complex.hpp"
#include "parqdd/node.hpp"

namespace parqdd {

// Append-only segmented storage: index 0 lives in a 2^kBaseBits slot segment
// and each further segment doubles. Indices stay stable forever, so lock-free
// readers never chase a reallocation.
template <typename T, unsigned kBaseBits = 12>
class SegArena {
public:
    static constexpr std::uint32_t kBase = 1u << kBaseBits;
    static constexpr unsigned kMaxSegments = 20;

    SegArena() {
        for (auto& s : segments_) s.store(nullptr, std::memory_order_relaxed);
    }
    ~SegArena() {
        for (auto& s : segments_) {
            T* p = s.load(std::memory_order_relaxed);
            if (p) ::operator delete[](p, std::align_val_t{alignof(T)});
        }
    }
    SegArena(const SegArena&) = delete;
    SegArena& operator=(const SegArena&) = delete;

    T& operator[](std::uint32_t idx) {
        unsigned seg = segment_of(idx);
        T* base = segments_[seg].load(std::memory_order_acquire);
        assert(base);
        return base[idx - first_index(seg)];
    }
    const T& operator[](std::uint32_t idx) const {
        return const_cast<SegArena*>(this)->operator[](idx);
    }

    // Ensures storage for idx exists (elements default-constructed).
    void reserve_index(std::uint32_t idx) {
        unsigned seg = segment_of(idx);
        if (segments_[seg].load(std::memory_order_acquire)) return;
        std::uint32_t count = kBase << seg;
        T* fresh = static_cast<T*>(::operator new[](sizeof(T) * count, std::align_val_t{alignof(T)}));
        for (std::uint32_t i = 0; i < count; ++i) new (fresh + i) T();
        T* expected = nullptr;
        if (!segments_[seg].compare_exchange_strong(expected, fresh, std::memory_order_acq_rel)) {
            ::operator delete[](fresh, std::align_val_t{alignof(T)}); // lost the race
        }
    }

    static unsigned segment_of(std::uint32_t idx) {
        return 31u - static_cast<unsigned>(__builtin_clz((idx >> kBaseBits) + 1u));
    }
    static std::uint32_t first_index(unsigned seg) {
        return (kBase << seg) - kBase;
    }

private:
    std::atomic<T*> segments_[kMaxSegments];
};

struct TableStats {
    std::size_t live_nodes = 0;
    std::size_t allocated = 0;   // high-water slot count
    std::size_t buckets = 0;
    std::size_t buckets_used = 0;
    std::size_t collisions = 0;  // live nodes beyond the first in their bucket
    std::size_t max_chain = 0;
    double avg_chain = 0.0;      // over non-empty buckets
};

// Hash-consing table for one node kind. Insertions are lock-free: bucket
// chains are singly linked through the node's own `next` field and extended
// by CAS at the head; a loser re-searches and adopts the winner's node.
// Removal happens only in sweep(), which the caller runs at a safe point
// with no concurrent access.
template <typename NodeT>
class UniqueTable {
public:
    using EdgeT = typename NodeT::EdgeT;
    static constexpr unsigned kChildren = NodeT::kChildren;

    UniqueTable(ComplexTable& cnums, unsigned tag, unsigned bucket_bits, std::size_t max_nodes)
        : cnums_(cnums), tag_(tag), bucket_mask_((std::size_t{1} << bucket_bits) - 1),
          max_nodes_(max_nodes),
          buckets_(new std::atomic<NodeId>[std::size_t{1} << bucket_bits]) {
        assert(tag < kMaxTables);
        for (std::size_t i = 0; i <= bucket_mask_; ++i)
            buckets_[i].store(TERMINAL, std::memory_order_relaxed);
        free_head_.store(kFreeNil, std::memory_order_relaxed);
        high_water_.store(0, std::memory_order_relaxed);
        live_.store(0, std::memory_order_relaxed);
    }

    // children[i].w == ZERO must come with children[i].n == TERMINAL.
    // Normalizes by the first nonzero child weight and hash-conses the node.
    EdgeT make_node(int level, const EdgeT* children) {
        EdgeT norm[kChildren];
        int first = -1;
        for (unsigned i = 0; i < kChildren; ++i) {
            assert(children[i].w != ComplexTable::ZERO || children[i].n == TERMINAL);
            if (first < 0 && children[i].w != ComplexTable::ZERO) first = static_cast<int>(i);
        }
        if (first < 0) return EdgeT{TERMINAL, ComplexTable::ZERO};

        ComplexId w0 = children[first].w;
        for (unsigned i = 0; i < kChildren; ++i) {
            if (static_cast<int>(i) < first || children[i].w == ComplexTable::ZERO) {
                norm[i] = EdgeT{TERMINAL, ComplexTable::ZERO};
            } else if (static_cast<int>(i) == first) {
                norm[i] = EdgeT{children[i].n, ComplexTable::ONE};
            } else {
                ComplexId wi = cnums_.div(children[i].w, w0);
                norm[i] = wi == ComplexTable::ZERO ? EdgeT{TERMINAL, ComplexTable::ZERO}
                                                   : EdgeT{children[i].n, wi};
            }
        }

        std::size_t bucket = hash_node(level, norm) & bucket_mask_;
        NodeId head = buckets_[bucket].load(std::memory_order_acquire);
        if (NodeId found = search_chain(head, level, norm); found != TERMINAL)
            return EdgeT{compose_node_id(tag_, found), w0};

        NodeId slot = acquire_slot();
        NodeT& nd = arena_[slot];
        for (unsigned i = 0; i < kChildren; ++i) nd.c[i] = norm[i];
        nd.level = static_cast<std::int8_t>(level);
        nd.ref.store(0, std::memory_order_relaxed);

        for (;;) {
            nd.next.store(head, std::memory_order_relaxed);
            if (buckets_[bucket].compare_exchange_weak(head, compose_node_id(tag_, slot),
                                                       std::memory_order_release,
                                                       std::memory_order_acquire)) {
                live_.fetch_add(1, std::memory_order_relaxed);
                return EdgeT{compose_node_id(tag_, slot), w0};
            }
            // Someone else extended the chain; they may have inserted the
            // same node. Scan only the new prefix.
            if (NodeId found = search_chain(head, level, norm, compose_node_id(tag_, slot));
                found != TERMINAL) {
                release_slot(slot);
                return EdgeT{compose_node_id(tag_, found), w0};
            }
        }
    }

    NodeT& node_at(NodeId index) {
        assert(index <= high_water_.load(std::memory_order_relaxed));
        return arena_[index];
    }
    const NodeT& node_at(NodeId index) const {
        return const_cast<UniqueTable*>(this)->node_at(index);
    }

    std::size_t live_nodes() const { return live_.load(std::memory_order_relaxed); }

    // Fresh slots ever handed out. The free list is preferred over fresh
    // allocation, so this tracks the peak simultaneous node count.
    std::size_t allocated() const { return next_fresh_.load(std::memory_order_relaxed); }

    // Single-threaded. Unlinks ref==0 nodes and recycles their slots.
    // Returns the number of nodes freed.
    std::size_t sweep() {
        std::size_t freed = 0;
        for (std::size_t b = 0; b <= bucket_mask_; ++b) {
            NodeId cur = buckets_[b].load(std::memory_order_relaxed);
            NodeId kept_head = TERMINAL;
            NodeId kept_tail = TERMINAL;
            while (cur != TERMINAL) {
                NodeT& nd = arena_[node_index(cur)];
                NodeId nxt = nd.next.load(std::memory_order_relaxed);
                if (nd.ref.load(std::memory_order_relaxed) == 0) {
                    release_slot(node_index(cur));
                    ++freed;
                } else {
                    if (kept_head == TERMINAL) kept_head = cur;
                    else arena_[node_index(kept_tail)].next.store(cur, std::memory_order_relaxed);
                    kept_tail = cur;
                }
                cur = nxt;
            }
            if (kept_tail != TERMINAL)
                arena_[node_index(kept_tail)].next.store(TERMINAL, std::memory_order_relaxed);
            buckets_[b].store(kept_head, std::memory_order_relaxed);
        }
        live_.fetch_sub(freed, std::memory_order_relaxed);
        return freed;
    }

    TableStats lookup_stats() const {
        TableStats st;
        st.buckets = bucket_mask_ + 1;
        st.allocated = high_water_.load(std::memory_order_relaxed);
        for (std::size_t b = 0; b <= bucket_mask_; ++b) {
            std::size_t len = 0;
            for (NodeId cur = buckets_[b].load(std::memory_order_relaxed); cur != TERMINAL;
                 cur = arena_[node_index(cur)].next.load(std::memory_order_relaxed))
                ++len;
            if (!len) continue;
            ++st.buckets_used;
            st.live_nodes += len;
            st.collisions += len - 1;
            if (len > st.max_chain) st.max_chain = len;
        }
        st.avg_chain = st.buckets_used ? double(st.live_nodes) / double(st.buckets_used) : 0.0;
        return st;
    }

    // Visits every chained node. Single-threaded use only.
    template <typename F>
    void for_each(F&& f) const {
        for (std::size_t b = 0; b <= bucket_mask_; ++b) {
            for (NodeId cur = buckets_[b].load(std::memory_order_relaxed); cur != TERMINAL;
                 cur = arena_[node_index(cur)].next.load(std::memory_order_relaxed)) {
                f(compose_node_id(tag_, node_index(cur)), arena_[node_index(cur)]);
            }
        }
    }

private:
    // Free list: Treiber stack over recycled slots. The upper half of the
    // head word is a generation counter so a pop racing a pop cannot ABA.
    // Pushes happen only in sweep (quiescent), pops race freely.
    static constexpr std::uint64_t kFreeNil = 0xffffffffull;

    NodeId acquire_slot() {
        std::uint64_t head = free_head_.load(std::memory_order_acquire);
        while ((head & 0xffffffffull) != kFreeNil) {
            NodeId idx = static_cast<NodeId>(head & 0xffffffffull);
            NodeId nxt = arena_[idx].next.load(std::memory_order_relaxed);
            std::uint64_t gen = head >> 32;
            std::uint64_t want = ((gen + 1) << 32) | nxt;
            if (free_head_.compare_exchange_weak(head, want, std::memory_order_acq_rel,
                                                 std::memory_order_acquire))
                return idx;
        }
        NodeId idx = next_fresh_.fetch_add(1, std::memory_order_relaxed);
        if (idx >= max_nodes_ || idx > kNodeIndexMask)
            throw std::length_error("unique table full");
        arena_.reserve_index(idx);
        // keep high_water monotone under concurrent allocation
        std::uint32_t hw = high_water_.load(std::memory_order_relaxed);
        while (idx > hw && !high_water_.compare_exchange_weak(hw, idx, std::memory_order_relaxed)) {}
        return idx;
    }

    void release_slot(NodeId idx) {
        std::uint64_t head = free_head_.load(std::memory_order_relaxed);
        for (;;) {
            arena_[idx].next.store(static_cast<NodeId>(head & 0xffffffffull),
                                   std::memory_order_relaxed);
            std::uint64_t gen = head >> 32;
            std::uint64_t want = ((gen + 1) << 32) | idx;
            if (free_head_.compare_exchange_weak(head, want, std::memory_order_acq_rel,
                                                 std::memory_order_relaxed))
                return;
        }
    }

    NodeId search_chain(NodeId from, int level, const EdgeT* norm, NodeId stop = TERMINAL) const {
        for (NodeId cur = from; cur != stop && cur != TERMINAL;) {
            const NodeT& nd = arena_[node_index(cur)];
            if (nd.level == level) {
                bool eq = true;
                for (unsigned i = 0; i < kChildren; ++i)
                    if (!(nd.c[i] == norm[i])) { eq = false; break; }
                if (eq) return node_index(cur);
            }
            cur = nd.next.load(std::memory_order_acquire);
        }
        return TERMINAL;
    }

    static std::uint64_t mix64(std::uint64_t x) {
        x ^= x >> 30; x *= 0xbf58476d1ce4e5b9ull;
        x ^= x >> 27; x *= 0x94d049bb133111ebull;
        x ^= x >> 31;
        return x;
    }

    std::size_t hash_node(int level, const EdgeT* norm) const {
        std::uint64_t h = static_cast<std::uint64_t>(level) + 0x9e3779b97f4a7c15ull;
        for (unsigned i = 0; i < kChildren; ++i) {
            h = mix64(h ^ norm[i].n);
            h = mix64(h ^ norm[i].w);
        }
        return static_cast<std::size_t>(h);
    }

    ComplexTable& cnums_;
    unsigned tag_;
    std::size_t bucket_mask_;
    std::size_t max_nodes_;
    std::unique_ptr<std::atomic<NodeId>[]> buckets_;
    SegArena<NodeT> arena_;
    std::atomic<std::uint64_t> free_head_{kFreeNil};
    std::atomic<NodeId> next_fresh_{0};
    std::atomic<std::uint32_t> high_water_{0};
    std::atomic<std::size_t> live_{0};
};

} // namespace parqdd
