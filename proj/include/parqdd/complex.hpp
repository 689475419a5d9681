#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>

namespace parqdd {

using ComplexId = std::uint32_t;

struct ComplexValue {
    double re = 0.0;
    double im = 0.0;

    friend ComplexValue operator*(ComplexValue a, ComplexValue b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend ComplexValue operator+(ComplexValue a, ComplexValue b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend ComplexValue operator-(ComplexValue a, ComplexValue b) {
        return {a.re - b.re, a.im - b.im};
    }
    friend ComplexValue operator/(ComplexValue a, ComplexValue b) {
        const double d = b.re * b.re + b.im * b.im;
        return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
    }
    double norm2() const { return re * re + im * im; }
};

// Interned complex amplitudes. Every weight in the package is a ComplexId;
// structural equality of DDs reduces to integer comparison. Lookup-or-insert
// is linearizable per bucket (CAS on the chain head; losers re-search and
// adopt the winner). Entries are immutable and never evicted, so ids stay
// valid for the lifetime of the table.
//
// Near-equal values (within tolerance but not bit-equal) hash to neighboring
// grid cells, all of which are probed; which value becomes the stored
// representative under concurrent insertion is order-dependent. Equal values
// always converge to a single id.
class ComplexTable {
  public:
    static constexpr ComplexId ZERO = 0;
    static constexpr ComplexId ONE = 1;

    explicit ComplexTable(double tolerance = 1e-12, unsigned bucket_bits = 18,
                          std::size_t max_entries = std::size_t{1} << 26);
    ~ComplexTable();

    ComplexTable(const ComplexTable&) = delete;
    ComplexTable& operator=(const ComplexTable&) = delete;

    // Throws std::domain_error on non-finite input.
    ComplexId intern(ComplexValue v);

    ComplexValue value(ComplexId id) const {
        const Entry& e = entry(id);
        return {e.re, e.im};
    }

    ComplexId mul(ComplexId a, ComplexId b) {
        if (a == ZERO || b == ZERO) return ZERO;
        if (a == ONE) return b;
        if (b == ONE) return a;
        return intern(value(a) * value(b));
    }

    ComplexId add(ComplexId a, ComplexId b) {
        if (a == ZERO) return b;
        if (b == ZERO) return a;
        return intern(value(a) + value(b));
    }

    // Divisor must be nonzero (throws std::domain_error otherwise).
    ComplexId div(ComplexId a, ComplexId b);

    ComplexId neg(ComplexId a) {
        if (a == ZERO) return ZERO;
        ComplexValue v = value(a);
        return intern({-v.re, -v.im});
    }

    std::size_t size() const { return count_.load(std::memory_order_acquire); }
    double tolerance() const { return tol_; }

  private:
    struct Entry {
        double re;
        double im;
        std::atomic<ComplexId> next;
    };

    // Doubling segments: segment s holds kBase << s entries, so capacity
    // grows geometrically while published entries never move.
    static constexpr unsigned kBaseBits = 12;
    static constexpr std::size_t kBase = std::size_t{1} << kBaseBits;
    static constexpr unsigned kMaxSegments = 40;
    static constexpr ComplexId kNil = 0xffffffffu;

    Entry& entry(ComplexId id) const {
        const std::uint64_t biased = (static_cast<std::uint64_t>(id) >> kBaseBits) + 1;
        const unsigned seg = 63u - static_cast<unsigned>(__builtin_clzll(biased));
        const std::size_t off = id - ((kBase << seg) - kBase);
        return segments_[seg].load(std::memory_order_acquire)[off];
    }

    Entry* segment_for(ComplexId id, unsigned& seg_out, std::size_t& off_out);
    ComplexId search_chain(ComplexId head, ComplexValue v) const;

    double tol_;
    std::size_t mask_;
    std::size_t max_entries_;
    std::unique_ptr<std::atomic<ComplexId>[]> buckets_;
    mutable std::atomic<Entry*> segments_[kMaxSegments] = {};
    std::atomic<std::size_t> count_{0};
};

} // namespace parqdd
