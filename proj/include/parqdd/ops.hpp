#pragma once

#include <cstdint>
#include <vector>

#include "parqdd/context.hpp"

namespace parqdd {

// All binary operations factor edge weights out before consulting the
// operation cache: multiplies are cached on node ids alone, adds on the
// pair of node ids plus the interned weight ratio.

VEdge add(ExecContext& ctx, VEdge x, VEdge y);
MEdge add(ExecContext& ctx, MEdge x, MEdge y);
VEdge mul(ExecContext& ctx, MEdge m, VEdge v);
MEdge mul(ExecContext& ctx, MEdge a, MEdge b);

// Tensor product; hi is lifted above lo_levels levels occupied by lo.
VEdge kron(ExecContext& ctx, VEdge hi, VEdge lo, int lo_levels);
MEdge kron(ExecContext& ctx, MEdge hi, MEdge lo, int lo_levels);

// Single basis amplitude in O(n).
ComplexValue amplitude(ExecContext& ctx, VEdge root, int n, std::uint64_t idx);

// Squared 2-norm, memoized per call.
double norm2(ExecContext& ctx, VEdge root);

// Dense expansion guarded by a qubit cap (default 14; hard limit 24).
std::vector<ComplexValue> to_dense(ExecContext& ctx, VEdge root, int n, int cap = 14);
std::vector<ComplexValue> to_dense(ExecContext& ctx, MEdge root, int n, int cap = 14);

// Inverse direction, mainly for tests and oracles. Sizes must be powers
// of two: 2^n amplitudes, or 2^n * 2^n row-major matrix entries.
VEdge vector_from_dense(ExecContext& ctx, const std::vector<ComplexValue>& amp);
MEdge matrix_from_dense(ExecContext& ctx, const std::vector<ComplexValue>& m);

} // namespace parqdd
