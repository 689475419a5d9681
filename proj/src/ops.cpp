#include "parqdd/ops.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace parqdd {

namespace {

template <typename E> struct ETraits;
template <> struct ETraits<VEdge> {
    using Node = VectorNode;
    static constexpr OpKind add_kind = OpKind::ADD_VV;
    static constexpr unsigned kChildren = 2;
};
template <> struct ETraits<MEdge> {
    using Node = MatrixNode;
    static constexpr OpKind add_kind = OpKind::ADD_MM;
    static constexpr unsigned kChildren = 4;
};

template <typename E>
const typename ETraits<E>::Node& node_of(ExecContext& ctx, NodeId id) {
    if constexpr (std::is_same_v<E, VEdge>) return ctx.vnode(id);
    else return ctx.mnode(id);
}

template <typename E>
E make_node(ExecContext& ctx, int level, const E (&c)[ETraits<E>::kChildren]) {
    if constexpr (std::is_same_v<E, VEdge>) return ctx.make_vnode(level, c);
    else return ctx.make_mnode(level, c);
}

template <typename E>
E scale_edge(ExecContext& ctx, E e, ComplexId f) {
    if (e.w == ComplexTable::ZERO) return E{TERMINAL, ComplexTable::ZERO};
    if (f == ComplexTable::ONE) return e;
    ComplexId w = ctx.cnums().mul(e.w, f);
    if (w == ComplexTable::ZERO) return E{TERMINAL, ComplexTable::ZERO};
    return E{e.n, w};
}

// ---- addition ----

template <typename E>
E add_rec(ExecContext& ctx, E x, E y) {
    auto& ct = ctx.cnums();
    if (x.w == ComplexTable::ZERO) return y;
    if (y.w == ComplexTable::ZERO) return x;
    if (x.n == TERMINAL && y.n == TERMINAL) {
        ComplexId w = ct.add(x.w, y.w);
        return w == ComplexTable::ZERO ? E{TERMINAL, ComplexTable::ZERO} : E{TERMINAL, w};
    }
    poll_cancel(ctx);
    assert(x.n != TERMINAL && y.n != TERMINAL);
    if (x.n == y.n) {
        ComplexId w = ct.add(x.w, y.w);
        return w == ComplexTable::ZERO ? E{TERMINAL, ComplexTable::ZERO} : E{x.n, w};
    }
    // Work relative to x: result cached for (x.n, y.n, y/x) with x's root
    // weight stripped to one.
    ComplexId ratio = ct.div(y.w, x.w);
    if (ratio == ComplexTable::ZERO) return x; // y vanishes next to x at tolerance
    NodeId rn;
    ComplexId rw;
    if (ctx.cache_get(ETraits<E>::add_kind, x.n, y.n, ratio, rn, rw))
        return scale_edge(ctx, E{rn, rw}, x.w);
    const auto& xn = node_of<E>(ctx, x.n);
    const auto& yn = node_of<E>(ctx, y.n);
    assert(xn.level == yn.level);
    E out[ETraits<E>::kChildren];
    for (unsigned i = 0; i < ETraits<E>::kChildren; ++i)
        out[i] = add_rec(ctx, xn.c[i], scale_edge(ctx, yn.c[i], ratio));
    E res = make_node(ctx, xn.level, out);
    ctx.cache_put(ETraits<E>::add_kind, x.n, y.n, ratio, res.n, res.w);
    return scale_edge(ctx, res, x.w);
}

// ---- multiplication ----

// Resolutions that need no recursion and no cache entry.
bool mul_trivial(ExecContext& ctx, MEdge x, VEdge y, VEdge& out) {
    if (x.w == ComplexTable::ZERO || y.w == ComplexTable::ZERO) {
        out = vzero;
        return true;
    }
    if (x.n == TERMINAL) {
        assert(y.n == TERMINAL);
        out = scale_edge(ctx, VEdge{TERMINAL, y.w}, x.w);
        return true;
    }
    if (ctx.is_identity(x.n, ctx.mnode(x.n).level)) {
        out = scale_edge(ctx, y, x.w);
        return true;
    }
    return false;
}

bool mul_trivial(ExecContext& ctx, MEdge x, MEdge y, MEdge& out) {
    if (x.w == ComplexTable::ZERO || y.w == ComplexTable::ZERO) {
        out = mzero;
        return true;
    }
    if (x.n == TERMINAL) {
        assert(y.n == TERMINAL);
        out = scale_edge(ctx, MEdge{TERMINAL, y.w}, x.w);
        return true;
    }
    int level = ctx.mnode(x.n).level;
    if (ctx.is_identity(x.n, level)) {
        out = scale_edge(ctx, y, x.w);
        return true;
    }
    if (ctx.is_identity(y.n, level)) {
        out = scale_edge(ctx, x, y.w);
        return true;
    }
    return false;
}

template <typename R, typename B>
bool mul_cheap(ExecContext& ctx, OpKind kind, MEdge a, B b) {
    R t;
    if (mul_trivial(ctx, a, b, t)) return true;
    return ctx.cache_peek(kind, a.n, b.n, ComplexTable::ONE);
}

// Runs the child units, handing expensive ones to the spawner when the
// recursion sits at or above the spawn level. A child whose inputs are
// already cached is not worth a task; it runs inline first.
template <unsigned K, typename F, typename CheapF>
void run_units(ExecContext& ctx, int level, F& f, CheapF&& cheap) {
    if (ctx.spawner && level >= ctx.spawn_level) {
        unsigned heavy[K];
        unsigned nh = 0;
        bool flag[K];
        for (unsigned i = 0; i < K; ++i) flag[i] = cheap(i);
        for (unsigned i = 0; i < K; ++i)
            if (flag[i]) f(i);
            else heavy[nh++] = i;
        if (nh == 1) f(heavy[0]);
        else if (nh > 1) ctx.spawner->run_children(FnRef(f), heavy, nh);
        return;
    }
    for (unsigned i = 0; i < K; ++i) f(i);
}

VEdge mul_rec(ExecContext& ctx, MEdge x, VEdge y) {
    VEdge out;
    if (mul_trivial(ctx, x, y, out)) return out;
    poll_cancel(ctx);
    const MatrixNode& mn = ctx.mnode(x.n);
    const VectorNode& vn = ctx.vnode(y.n);
    assert(mn.level == vn.level);
    int level = mn.level;
    ComplexId f = ctx.cnums().mul(x.w, y.w);
    NodeId rn;
    ComplexId rw;
    if (ctx.cache_get(OpKind::MUL_MV, x.n, y.n, ComplexTable::ONE, rn, rw))
        return scale_edge(ctx, VEdge{rn, rw}, f);
    VEdge res_c[2];
    auto unit = [&](unsigned i) {
        VEdge p0 = mul_rec(ctx, mn.c[2 * i + 0], vn.c[0]);
        VEdge p1 = mul_rec(ctx, mn.c[2 * i + 1], vn.c[1]);
        res_c[i] = add_rec(ctx, p0, p1);
    };
    run_units<2>(ctx, level, unit, [&](unsigned i) {
        return mul_cheap<VEdge>(ctx, OpKind::MUL_MV, mn.c[2 * i + 0], vn.c[0]) &&
               mul_cheap<VEdge>(ctx, OpKind::MUL_MV, mn.c[2 * i + 1], vn.c[1]);
    });
    VEdge res = ctx.make_vnode(level, res_c);
    ctx.cache_put(OpKind::MUL_MV, x.n, y.n, ComplexTable::ONE, res.n, res.w);
    return scale_edge(ctx, res, f);
}

MEdge mul_rec(ExecContext& ctx, MEdge x, MEdge y) {
    MEdge out;
    if (mul_trivial(ctx, x, y, out)) return out;
    poll_cancel(ctx);
    const MatrixNode& an = ctx.mnode(x.n);
    const MatrixNode& bn = ctx.mnode(y.n);
    assert(an.level == bn.level);
    int level = an.level;
    ComplexId f = ctx.cnums().mul(x.w, y.w);
    NodeId rn;
    ComplexId rw;
    if (ctx.cache_get(OpKind::MUL_MM, x.n, y.n, ComplexTable::ONE, rn, rw))
        return scale_edge(ctx, MEdge{rn, rw}, f);
    MEdge res_c[4];
    auto unit = [&](unsigned u) {
        unsigned i = u >> 1, j = u & 1;
        MEdge p0 = mul_rec(ctx, an.c[2 * i + 0], bn.c[0 + j]);
        MEdge p1 = mul_rec(ctx, an.c[2 * i + 1], bn.c[2 + j]);
        res_c[u] = add_rec(ctx, p0, p1);
    };
    run_units<4>(ctx, level, unit, [&](unsigned u) {
        unsigned i = u >> 1, j = u & 1;
        return mul_cheap<MEdge>(ctx, OpKind::MUL_MM, an.c[2 * i + 0], bn.c[0 + j]) &&
               mul_cheap<MEdge>(ctx, OpKind::MUL_MM, an.c[2 * i + 1], bn.c[2 + j]);
    });
    MEdge res = ctx.make_mnode(level, res_c);
    ctx.cache_put(OpKind::MUL_MM, x.n, y.n, ComplexTable::ONE, res.n, res.w);
    return scale_edge(ctx, res, f);
}

// ---- kron ----

template <typename E>
struct KronCtx {
    ExecContext& ctx;
    E lo;
    int lo_levels;
    std::unordered_map<NodeId, E> memo;

    E edge(E hi) {
        if (hi.w == ComplexTable::ZERO) return E{TERMINAL, ComplexTable::ZERO};
        E base = hi.n == TERMINAL ? lo : node(hi.n);
        return scale_edge(ctx, base, hi.w);
    }
    E node(NodeId id) {
        if (auto it = memo.find(id); it != memo.end()) return it->second;
        const auto& nd = node_of<E>(ctx, id);
        E out[ETraits<E>::kChildren];
        for (unsigned i = 0; i < ETraits<E>::kChildren; ++i) out[i] = edge(nd.c[i]);
        E res = make_node(ctx, nd.level + lo_levels, out);
        memo.emplace(id, res);
        return res;
    }
};

// ---- dense conversion ----

void fill_dense(ExecContext& ctx, VEdge e, int level, std::size_t base, ComplexValue acc,
                std::vector<ComplexValue>& out) {
    if (e.w == ComplexTable::ZERO) return;
    acc = acc * ctx.cnums().value(e.w);
    if (level < 0) {
        assert(e.n == TERMINAL);
        out[base] = acc;
        return;
    }
    const VectorNode& nd = ctx.vnode(e.n);
    assert(nd.level == level);
    fill_dense(ctx, nd.c[0], level - 1, base, acc, out);
    fill_dense(ctx, nd.c[1], level - 1, base | (std::size_t{1} << level), acc, out);
}

void fill_dense_m(ExecContext& ctx, MEdge e, int level, std::size_t rbase, std::size_t cbase,
                  ComplexValue acc, std::size_t ncols, std::vector<ComplexValue>& out) {
    if (e.w == ComplexTable::ZERO) return;
    acc = acc * ctx.cnums().value(e.w);
    if (level < 0) {
        assert(e.n == TERMINAL);
        out[rbase * ncols + cbase] = acc;
        return;
    }
    const MatrixNode& nd = ctx.mnode(e.n);
    assert(nd.level == level);
    std::size_t bit = std::size_t{1} << level;
    fill_dense_m(ctx, nd.c[0], level - 1, rbase, cbase, acc, ncols, out);
    fill_dense_m(ctx, nd.c[1], level - 1, rbase, cbase | bit, acc, ncols, out);
    fill_dense_m(ctx, nd.c[2], level - 1, rbase | bit, cbase, acc, ncols, out);
    fill_dense_m(ctx, nd.c[3], level - 1, rbase | bit, cbase | bit, acc, ncols, out);
}

void check_dense_cap(int n, int cap) {
    if (n > 24) throw std::invalid_argument("dense expansion above 24 qubits");
    if (n > cap) throw std::invalid_argument("dense expansion exceeds cap");
}

int log2_exact(std::size_t sz) {
    int n = 0;
    while ((std::size_t{1} << n) < sz) ++n;
    if ((std::size_t{1} << n) != sz) throw std::invalid_argument("size not a power of two");
    return n;
}

VEdge dense_to_vec(ExecContext& ctx, const std::vector<ComplexValue>& amp, std::size_t base,
                   int level) {
    if (level < 0) {
        ComplexValue v = amp[base];
        ComplexId w = ctx.cnums().intern(v);
        return w == ComplexTable::ZERO ? vzero : VEdge{TERMINAL, w};
    }
    VEdge c[2] = {dense_to_vec(ctx, amp, base, level - 1),
                  dense_to_vec(ctx, amp, base | (std::size_t{1} << level), level - 1)};
    return ctx.make_vnode(level, c);
}

MEdge dense_to_mat(ExecContext& ctx, const std::vector<ComplexValue>& m, std::size_t rbase,
                   std::size_t cbase, int level, std::size_t ncols) {
    if (level < 0) {
        ComplexValue v = m[rbase * ncols + cbase];
        ComplexId w = ctx.cnums().intern(v);
        return w == ComplexTable::ZERO ? mzero : MEdge{TERMINAL, w};
    }
    std::size_t bit = std::size_t{1} << level;
    MEdge c[4] = {dense_to_mat(ctx, m, rbase, cbase, level - 1, ncols),
                  dense_to_mat(ctx, m, rbase, cbase | bit, level - 1, ncols),
                  dense_to_mat(ctx, m, rbase | bit, cbase, level - 1, ncols),
                  dense_to_mat(ctx, m, rbase | bit, cbase | bit, level - 1, ncols)};
    return ctx.make_mnode(level, c);
}

double node_norm(ExecContext& ctx, NodeId id, std::unordered_map<NodeId, double>& memo) {
    if (auto it = memo.find(id); it != memo.end()) return it->second;
    const VectorNode& nd = ctx.vnode(id);
    double s = 0;
    for (auto c : nd.c) {
        if (c.w == ComplexTable::ZERO) continue;
        double w2 = ctx.cnums().value(c.w).norm2();
        s += w2 * (c.n == TERMINAL ? 1.0 : node_norm(ctx, c.n, memo));
    }
    memo.emplace(id, s);
    return s;
}

} // namespace

VEdge add(ExecContext& ctx, VEdge x, VEdge y) { return add_rec(ctx, x, y); }
MEdge add(ExecContext& ctx, MEdge x, MEdge y) { return add_rec(ctx, x, y); }
VEdge mul(ExecContext& ctx, MEdge m, VEdge v) { return mul_rec(ctx, m, v); }
MEdge mul(ExecContext& ctx, MEdge a, MEdge b) { return mul_rec(ctx, a, b); }

VEdge kron(ExecContext& ctx, VEdge hi, VEdge lo, int lo_levels) {
    KronCtx<VEdge> k{ctx, lo, lo_levels, {}};
    return k.edge(hi);
}

MEdge kron(ExecContext& ctx, MEdge hi, MEdge lo, int lo_levels) {
    KronCtx<MEdge> k{ctx, lo, lo_levels, {}};
    return k.edge(hi);
}

ComplexValue amplitude(ExecContext& ctx, VEdge root, int n, std::uint64_t idx) {
    if (root.w == ComplexTable::ZERO) return {0.0, 0.0};
    ComplexValue acc = ctx.cnums().value(root.w);
    NodeId cur = root.n;
    for (int l = n - 1; l >= 0; --l) {
        assert(cur != TERMINAL);
        const VectorNode& nd = ctx.vnode(cur);
        assert(nd.level == l);
        VEdge c = nd.c[(idx >> l) & 1u];
        if (c.w == ComplexTable::ZERO) return {0.0, 0.0};
        acc = acc * ctx.cnums().value(c.w);
        cur = c.n;
    }
    assert(cur == TERMINAL);
    return acc;
}

double norm2(ExecContext& ctx, VEdge root) {
    if (root.w == ComplexTable::ZERO) return 0.0;
    double w2 = ctx.cnums().value(root.w).norm2();
    if (root.n == TERMINAL) return w2;
    std::unordered_map<NodeId, double> memo;
    return w2 * node_norm(ctx, root.n, memo);
}

std::vector<ComplexValue> to_dense(ExecContext& ctx, VEdge root, int n, int cap) {
    check_dense_cap(n, cap);
    std::vector<ComplexValue> out(std::size_t{1} << n, ComplexValue{0.0, 0.0});
    assert(root.w == ComplexTable::ZERO || n == 0 || ctx.vnode(root.n).level == n - 1);
    fill_dense(ctx, root, n - 1, 0, ComplexValue{1.0, 0.0}, out);
    return out;
}

std::vector<ComplexValue> to_dense(ExecContext& ctx, MEdge root, int n, int cap) {
    check_dense_cap(n, cap);
    std::size_t ncols = std::size_t{1} << n;
    std::vector<ComplexValue> out(ncols * ncols, ComplexValue{0.0, 0.0});
    fill_dense_m(ctx, root, n - 1, 0, 0, ComplexValue{1.0, 0.0}, ncols, out);
    return out;
}

VEdge vector_from_dense(ExecContext& ctx, const std::vector<ComplexValue>& amp) {
    int n = log2_exact(amp.size());
    return dense_to_vec(ctx, amp, 0, n - 1);
}

MEdge matrix_from_dense(ExecContext& ctx, const std::vector<ComplexValue>& m) {
    int n2 = log2_exact(m.size());
    if (n2 & 1) throw std::invalid_argument("matrix size not square");
    int n = n2 / 2;
    return dense_to_mat(ctx, m, 0, 0, n - 1, std::size_t{1} << n);
}

} // namespace parqdd
