#pragma once

#include <cstdint>
#include <vector>

#include "parqdd/complex.hpp"
#include "parqdd/node.hpp"
#include "parqdd/unique_table.hpp"

namespace parqdd {

struct PackageConfig {
    unsigned vector_bucket_bits = 17;
    unsigned matrix_bucket_bits = 15;
    std::size_t max_nodes = std::size_t{1} << 26;
};

// One pair of unique tables (vector + matrix) sharing a complex table.
// A run normally has a single package; the per-worker unique-table
// experiment instantiates one per worker, distinguished by the id tag.
class Package {
public:
    Package(ComplexTable& cnums, unsigned tag, const PackageConfig& cfg)
        : tag_(tag),
          vtab_(cnums, tag, cfg.vector_bucket_bits, cfg.max_nodes),
          mtab_(cnums, tag, cfg.matrix_bucket_bits, cfg.max_nodes) {}

    VEdge make_vnode(int level, const VEdge (&c)[2]) { return vtab_.make_node(level, c); }
    MEdge make_mnode(int level, const MEdge (&c)[4]) { return mtab_.make_node(level, c); }

    VectorNode& vnode_at(NodeId index) { return vtab_.node_at(index); }
    MatrixNode& mnode_at(NodeId index) { return mtab_.node_at(index); }

    UniqueTable<VectorNode>& vtab() { return vtab_; }
    UniqueTable<MatrixNode>& mtab() { return mtab_; }
    unsigned tag() const { return tag_; }

    std::size_t live_nodes() const { return vtab_.live_nodes() + mtab_.live_nodes(); }
    std::size_t allocated_nodes() const { return vtab_.allocated() + mtab_.allocated(); }

private:
    unsigned tag_;
    UniqueTable<VectorNode> vtab_;
    UniqueTable<MatrixNode> mtab_;
};

} // namespace parqdd
