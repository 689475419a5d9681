#include "parqdd/complex.hpp"

#include <cassert>
#include <cstdlib>
#include <stdexcept>

namespace parqdd {

namespace {

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

std::uint64_t cell_hash(std::int64_t gx, std::int64_t gy) {
    return mix64(static_cast<std::uint64_t>(gx) * 0x9e3779b97f4a7c15ULL ^
                 mix64(static_cast<std::uint64_t>(gy)));
}

} // namespace

ComplexTable::ComplexTable(double tolerance, unsigned bucket_bits, std::size_t max_entries)
    : tol_(tolerance), mask_((std::size_t{1} << bucket_bits) - 1), max_entries_(max_entries) {
    buckets_ = std::make_unique<std::atomic<ComplexId>[]>(mask_ + 1);
    for (std::size_t i = 0; i <= mask_; ++i)
        buckets_[i].store(kNil, std::memory_order_relaxed);
    ComplexId zero = intern({0.0, 0.0});
    ComplexId one = intern({1.0, 0.0});
    assert(zero == ZERO && one == ONE);
    (void)zero;
    (void)one;
}

ComplexTable::~ComplexTable() {
    for (auto& seg : segments_) {
        if (Entry* p = seg.load(std::memory_order_relaxed)) std::free(p);
    }
}

ComplexId ComplexTable::search_chain(ComplexId head, ComplexValue v) const {
    for (ComplexId cur = head; cur != kNil;) {
        const Entry& e = entry(cur);
        if (std::abs(e.re - v.re) < tol_ && std::abs(e.im - v.im) < tol_) return cur;
        cur = e.next.load(std::memory_order_acquire);
    }
    return kNil;
}

ComplexTable::Entry* ComplexTable::segment_for(ComplexId id, unsigned& seg_out,
                                               std::size_t& off_out) {
    const std::uint64_t biased = (static_cast<std::uint64_t>(id) >> kBaseBits) + 1;
    const unsigned seg = 63u - static_cast<unsigned>(__builtin_clzll(biased));
    seg_out = seg;
    off_out = id - ((kBase << seg) - kBase);
    Entry* p = segments_[seg].load(std::memory_order_acquire);
    if (p == nullptr) {
        Entry* fresh = static_cast<Entry*>(std::calloc(kBase << seg, sizeof(Entry)));
        if (fresh == nullptr) throw std::bad_alloc{};
        Entry* expected = nullptr;
        if (segments_[seg].compare_exchange_strong(expected, fresh,
                                                   std::memory_order_acq_rel)) {
            p = fresh;
        } else {
            std::free(fresh);
            p = expected;
        }
    }
    return p;
}

ComplexId ComplexTable::intern(ComplexValue v) {
    if (!std::isfinite(v.re) || !std::isfinite(v.im))
        throw std::domain_error("non-finite amplitude");
    if (v.re == 0.0) v.re = 0.0; // collapse -0.0
    if (v.im == 0.0) v.im = 0.0;

    const std::int64_t gx = std::llround(v.re / tol_);
    const std::int64_t gy = std::llround(v.im / tol_);
    const std::size_t home = cell_hash(gx, gy) & mask_;

    ComplexId found = search_chain(buckets_[home].load(std::memory_order_acquire), v);
    if (found != kNil) return found;
    for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
            if (dx == 0 && dy == 0) continue;
            const std::size_t b = cell_hash(gx + dx, gy + dy) & mask_;
            if (b == home) continue;
            found = search_chain(buckets_[b].load(std::memory_order_acquire), v);
            if (found != kNil) return found;
        }
    }

    const std::size_t slot = count_.fetch_add(1, std::memory_order_acq_rel);
    if (slot >= max_entries_) throw std::length_error("complex table full");
    const ComplexId id = static_cast<ComplexId>(slot);
    unsigned seg;
    std::size_t off;
    Entry* base = segment_for(id, seg, off);
    Entry& e = base[off];
    e.re = v.re;
    e.im = v.im;

    ComplexId head = buckets_[home].load(std::memory_order_acquire);
    while (true) {
        e.next.store(head, std::memory_order_relaxed);
        if (buckets_[home].compare_exchange_weak(head, id, std::memory_order_acq_rel,
                                                 std::memory_order_acquire))
            return id;
        // Lost the race: someone else published to this bucket. They may have
        // inserted an equal value, so re-check before retrying. Our slot is
        // abandoned if we adopt theirs (harmless, rare).
        found = search_chain(head, v);
        if (found != kNil) return found;
    }
}

ComplexId ComplexTable::div(ComplexId a, ComplexId b) {
    if (b == ONE) return a;
    if (a == b) return ONE;
    if (a == ZERO) return ZERO;
    ComplexValue vb = value(b);
    if (vb.re == 0.0 && vb.im == 0.0) throw std::domain_error("division by zero weight");
    return intern(value(a) / vb);
}

} // namespace parqdd
