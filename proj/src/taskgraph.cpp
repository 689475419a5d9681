#include "parqdd/taskgraph.hpp"

#include <cassert>
#include <stdexcept>

namespace parqdd {

namespace {

struct Builder {
    TaskGraph g;

    int add_node(TaskNode::Kind kind, OpRef a, OpRef b, int batch) {
        TaskNode n;
        n.kind = kind;
        n.a = a;
        n.b = b;
        n.batch = batch;
        int id = int(g.nodes.size());
        if (a.kind == OpRef::NODE) {
            g.nodes[a.idx].dependents.push_back(id);
            ++n.indegree;
        }
        if (b.kind == OpRef::NODE) {
            g.nodes[b.idx].dependents.push_back(id);
            ++n.indegree;
        }
        g.nodes.push_back(std::move(n));
        return id;
    }

    // Balanced product tree over gates [lo, hi); the operator applying
    // later gates multiplies from the left.
    OpRef product_tree(int lo, int hi, int batch) {
        assert(hi > lo);
        if (hi - lo == 1) return OpRef::gate(lo);
        int mid = lo + (hi - lo) / 2;
        OpRef left = product_tree(lo, mid, batch);
        OpRef right = product_tree(mid, hi, batch);
        return OpRef::node(add_node(TaskNode::MULMM, right, left, batch));
    }
};

} // namespace

TaskGraph build_taskgraph(const Circuit& c, Strategy strategy, unsigned workers,
                          int reduce_batch) {
    Builder b;
    b.g.qubits = c.qubits;
    int m = int(c.gates.size());
    if (m == 0) return std::move(b.g);

    switch (strategy) {
    case Strategy::OUTER_LINEAR: {
        OpRef v = OpRef::state();
        for (int i = 0; i < m; ++i)
            v = OpRef::node(b.add_node(TaskNode::MULMV, OpRef::gate(i), v, i));
        b.g.output = v.idx;
        break;
    }
    case Strategy::OUTER_ASSOC: {
        // Contiguous gate segments, one per worker, each combined into a
        // product up front; the products then apply to the state in order.
        int segs = int(workers);
        if (segs > m) segs = m;
        if (segs < 1) segs = 1;
        std::vector<OpRef> prod;
        int base = m / segs, extra = m % segs;
        int lo = 0;
        for (int s = 0; s < segs; ++s) {
            int len = base + (s < extra ? 1 : 0);
            prod.push_back(b.product_tree(lo, lo + len, s));
            lo += len;
        }
        OpRef v = OpRef::state();
        for (int s = 0; s < segs; ++s)
            v = OpRef::node(b.add_node(TaskNode::MULMV, prod[s], v, s));
        b.g.output = v.idx;
        break;
    }
    case Strategy::OUTER_REDUCE: {
        if (reduce_batch < 1) throw std::invalid_argument("reduce batch must be >= 1");
        OpRef v = OpRef::state();
        int prev_reduce = -1;
        int batch_no = 0;
        for (int lo = 0; lo < m; lo += reduce_batch, ++batch_no) {
            int hi = lo + reduce_batch;
            if (hi > m) hi = m;
            std::size_t first = b.g.nodes.size();
            OpRef p = b.product_tree(lo, hi, batch_no);
            int mv = b.add_node(TaskNode::MULMV, p, v, batch_no);
            int red = b.add_node(TaskNode::REDUCE, OpRef::node(mv), OpRef::state(), batch_no);
            // The barrier: every root of this batch hangs off the previous
            // REDUCE, so nothing here starts before it finished.
            if (prev_reduce >= 0) {
                for (std::size_t i = first; i < std::size_t(red); ++i) {
                    if (b.g.nodes[i].indegree == 0) {
                        b.g.nodes[prev_reduce].dependents.push_back(int(i));
                        ++b.g.nodes[i].indegree;
                    }
                }
            }
            v = OpRef::node(red);
            prev_reduce = red;
        }
        b.g.output = v.idx;
        break;
    }
    default:
        throw std::invalid_argument("not an outer strategy");
    }
    return std::move(b.g);
}

void check_taskgraph(const TaskGraph& g) {
    std::vector<int> indeg(g.nodes.size(), 0);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        for (int d : g.nodes[i].dependents) {
            if (d < 0 || std::size_t(d) >= g.nodes.size())
                throw std::logic_error("dependent out of range");
            ++indeg[d];
        }
    }
    std::vector<int> ready;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        if (indeg[i] != g.nodes[i].indegree)
            throw std::logic_error("indegree disagrees with dependent lists");
        if (indeg[i] == 0) ready.push_back(int(i));
    }
    std::size_t seen = 0;
    while (!ready.empty()) {
        int id = ready.back();
        ready.pop_back();
        ++seen;
        for (int d : g.nodes[id].dependents)
            if (--indeg[d] == 0) ready.push_back(d);
    }
    if (seen != g.nodes.size()) throw std::logic_error("task graph has a cycle");
    if (g.output >= 0) {
        const TaskNode& out = g.nodes[g.output];
        if (out.kind == TaskNode::MULMM) throw std::logic_error("output node is not a vector");
    }
}

} // namespace parqdd
