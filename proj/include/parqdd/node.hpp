#pragma once

#include <atomic>
#include <cstdint>

#include "parqdd/complex.hpp"

namespace parqdd {

using NodeId = std::uint32_t;

// Top bits select the owning table. Tag 0 is the shared table; nonzero tags
// appear only in the per-worker unique-table experiment. Tag 15 is reserved
// so TERMINAL never collides with a real slot.
inline constexpr unsigned kTableTagBits = 4;
inline constexpr unsigned kNodeIndexBits = 32 - kTableTagBits;
inline constexpr NodeId kNodeIndexMask = (NodeId{1} << kNodeIndexBits) - 1;
inline constexpr unsigned kMaxTables = 15;
inline constexpr NodeId TERMINAL = 0xffffffffu;

inline unsigned table_tag(NodeId id) { return id >> kNodeIndexBits; }
inline NodeId node_index(NodeId id) { return id & kNodeIndexMask; }
inline NodeId compose_node_id(unsigned tag, NodeId index) {
    return (static_cast<NodeId>(tag) << kNodeIndexBits) | index;
}

// Vector and matrix edges share layout but are distinct types; mixing them
// up is a compile error rather than a runtime surprise.
struct VEdge {
    NodeId n = TERMINAL;
    ComplexId w = ComplexTable::ZERO;
    bool operator==(const VEdge&) const = default;
};

struct MEdge {
    NodeId n = TERMINAL;
    ComplexId w = ComplexTable::ZERO;
    bool operator==(const MEdge&) const = default;
};

inline constexpr VEdge vzero{TERMINAL, ComplexTable::ZERO};
inline constexpr VEdge vone{TERMINAL, ComplexTable::ONE};
inline constexpr MEdge mzero{TERMINAL, ComplexTable::ZERO};
inline constexpr MEdge mone{TERMINAL, ComplexTable::ONE};

template <typename E> inline bool is_zero(E e) { return e.w == ComplexTable::ZERO; }
template <typename E> inline bool is_terminal(E e) { return e.n == TERMINAL; }

// Nodes are immutable after publication; only the reference count and the
// intrusive chain link change afterwards. Children of a level-l node point
// to level l-1 nodes, or to TERMINAL (scalars below level 0, and the
// canonical zero edge at any level).
struct VectorNode {
    static constexpr unsigned kChildren = 2;
    using EdgeT = VEdge;
    VEdge c[2];
    std::atomic<NodeId> next{TERMINAL};
    std::atomic<std::uint32_t> ref{0};
    std::int8_t level = 0;
};

struct MatrixNode {
    static constexpr unsigned kChildren = 4;
    using EdgeT = MEdge;
    MEdge c[4]; // row-major quadrants: e00 e01 e10 e11
    std::atomic<NodeId> next{TERMINAL};
    std::atomic<std::uint32_t> ref{0};
    std::int8_t level = 0;
};

} // namespace parqdd
