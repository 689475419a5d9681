#pragma once

#include <atomic>
#include <cstdint>
#include <cstring>
#include <memory>
#include <vector>

#include "parqdd/complex.hpp"
#include "parqdd/node.hpp"

namespace parqdd {

enum class OpKind : std::uint8_t { ADD_VV = 0, ADD_MM = 1, MUL_MV = 2, MUL_MM = 3 };
inline constexpr unsigned kOpKinds = 4;
inline bool is_mul(OpKind k) { return k == OpKind::MUL_MV || k == OpKind::MUL_MM; }

enum class CacheScope : std::uint8_t { NONE, LOCAL, GLOBAL };

struct CacheConfig {
    CacheScope scope = CacheScope::GLOBAL;
    unsigned mul_bits = 20; // slots in the shared-by-mul-kinds array
    unsigned add_bits = 18;
};

struct CacheStats {
    std::uint64_t lookups[kOpKinds] = {0, 0, 0, 0};
    std::uint64_t hits[kOpKinds] = {0, 0, 0, 0};

    void merge(const CacheStats& o) {
        for (unsigned i = 0; i < kOpKinds; ++i) {
            lookups[i] += o.lookups[i];
            hits[i] += o.hits[i];
        }
    }
    std::uint64_t mul_lookups() const {
        return lookups[unsigned(OpKind::MUL_MV)] + lookups[unsigned(OpKind::MUL_MM)];
    }
    std::uint64_t mul_hits() const {
        return hits[unsigned(OpKind::MUL_MV)] + hits[unsigned(OpKind::MUL_MM)];
    }
    std::uint64_t add_lookups() const {
        return lookups[unsigned(OpKind::ADD_VV)] + lookups[unsigned(OpKind::ADD_MM)];
    }
    std::uint64_t add_hits() const {
        return hits[unsigned(OpKind::ADD_VV)] + hits[unsigned(OpKind::ADD_MM)];
    }
    double mul_hit_ratio() const {
        auto l = mul_lookups();
        return l ? double(mul_hits()) / double(l) : 0.0;
    }
    double add_hit_ratio() const {
        auto l = add_lookups();
        return l ? double(add_hits()) / double(l) : 0.0;
    }
};

// Direct-mapped computed-result cache, one entry array for the two mul kinds
// and one for the two add kinds. Entries carry an epoch so invalidation after
// a sweep is a counter bump, not a wipe.
//
// Shared (GLOBAL) access runs a per-entry seqlock: a writer CASes the version
// from even to odd, fills the entry, then publishes even+2. A writer finding
// the version odd, or losing the CAS, simply drops its update; losing a cached
// result is harmless. Readers snapshot the version before and after copying
// the payload and discard torn reads. LOCAL instances are touched by a single
// worker, where the same protocol degenerates to uncontended atomics.
class OpCache {
public:
    struct Entry {
        std::atomic<std::uint32_t> ver{0};
        std::uint32_t a = 0, b = 0;
        std::uint32_t ratio = 0;
        std::uint32_t meta = 0; // kind in low 2 bits, epoch above
        std::uint32_t rn = 0, rw = 0;
    };

    OpCache(unsigned mul_bits, unsigned add_bits)
        : mul_mask_((std::size_t{1} << mul_bits) - 1),
          add_mask_((std::size_t{1} << add_bits) - 1),
          mul_(new Entry[std::size_t{1} << mul_bits]),
          add_(new Entry[std::size_t{1} << add_bits]) {}

    bool get(OpKind kind, NodeId a, NodeId b, ComplexId ratio, NodeId& rn, ComplexId& rw) {
        Entry& e = slot(kind, a, b, ratio);
        std::uint32_t v1 = e.ver.load(std::memory_order_acquire);
        if (v1 & 1u) return false;
        std::uint32_t ea = e.a, eb = e.b, er = e.ratio, em = e.meta, ern = e.rn, erw = e.rw;
        std::atomic_thread_fence(std::memory_order_acquire);
        if (e.ver.load(std::memory_order_relaxed) != v1) return false;
        if (em != meta_word(kind) || ea != a || eb != b || er != ratio) return false;
        rn = ern;
        rw = erw;
        return true;
    }

    void put(OpKind kind, NodeId a, NodeId b, ComplexId ratio, NodeId rn, ComplexId rw) {
        Entry& e = slot(kind, a, b, ratio);
        std::uint32_t v = e.ver.load(std::memory_order_relaxed);
        if (v & 1u) return; // writer active, drop
        if (!e.ver.compare_exchange_strong(v, v + 1, std::memory_order_acquire,
                                           std::memory_order_relaxed))
            return;
        e.a = a;
        e.b = b;
        e.ratio = ratio;
        e.meta = meta_word(kind);
        e.rn = rn;
        e.rw = rw;
        e.ver.store(v + 2, std::memory_order_release);
    }

    // Invalidate everything. Safe-point only.
    void clear() { epoch_.fetch_add(1u << 2, std::memory_order_relaxed); }

private:
    std::uint32_t meta_word(OpKind kind) const {
        return epoch_.load(std::memory_order_relaxed) | unsigned(kind);
    }

    static std::uint64_t mix64(std::uint64_t x) {
        x ^= x >> 30; x *= 0xbf58476d1ce4e5b9ull;
        x ^= x >> 27; x *= 0x94d049bb133111ebull;
        x ^= x >> 31;
        return x;
    }

    Entry& slot(OpKind kind, NodeId a, NodeId b, ComplexId ratio) {
        std::uint64_t h = mix64((std::uint64_t(a) << 32) | b);
        h = mix64(h ^ (std::uint64_t(ratio) << 8) ^ unsigned(kind));
        return is_mul(kind) ? mul_[h & mul_mask_] : add_[h & add_mask_];
    }

    std::size_t mul_mask_, add_mask_;
    std::unique_ptr<Entry[]> mul_;
    std::unique_ptr<Entry[]> add_;
    // Starts past zero so a zero-initialized entry can never match a key.
    std::atomic<std::uint32_t> epoch_{1u << 2}; // bumped at safe points only
};

} // namespace parqdd
