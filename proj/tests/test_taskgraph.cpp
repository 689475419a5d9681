#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "parqdd/taskgraph.hpp"

using namespace parqdd;

namespace {
Circuit chain_circuit(int qubits, int gates) {
    Circuit c;
    c.qubits = qubits;
    for (int i = 0; i < gates; ++i) {
        Gate g;
        g.kind = GateKind::H;
        g.target = i % qubits;
        c.gates.push_back(g);
    }
    return c;
}
} // namespace

TEST_CASE("linear graphs chain one task per gate") {
    Circuit c = chain_circuit(4, 6);
    TaskGraph g = build_taskgraph(c, Strategy::OUTER_LINEAR, 4, 0);
    check_taskgraph(g);
    REQUIRE(g.nodes.size() == 6);
    CHECK(g.output == 5);
    for (int i = 0; i < 6; ++i) {
        const TaskNode& n = g.nodes[std::size_t(i)];
        CHECK(n.kind == TaskNode::MULMV);
        CHECK(n.a.kind == OpRef::GATE);
        CHECK(n.a.idx == i);
        if (i == 0) {
            CHECK(n.b.kind == OpRef::STATE);
            CHECK(n.indegree == 0);
        } else {
            CHECK(n.b.kind == OpRef::NODE);
            CHECK(n.b.idx == i - 1);
            CHECK(n.indegree == 1);
        }
    }
}

TEST_CASE("assoc graphs build one product per segment") {
    Circuit c = chain_circuit(4, 10);
    TaskGraph g = build_taskgraph(c, Strategy::OUTER_ASSOC, 4, 0);
    check_taskgraph(g);
    // segments 3,3,2,2: (2+2+1+1) products plus 4 applications
    REQUIRE(g.nodes.size() == 10);
    int mm = 0, mv = 0;
    for (const auto& n : g.nodes) {
        if (n.kind == TaskNode::MULMM) ++mm;
        if (n.kind == TaskNode::MULMV) ++mv;
    }
    CHECK(mm == 6);
    CHECK(mv == 4);
    CHECK(g.nodes[std::size_t(g.output)].kind == TaskNode::MULMV);

    // more workers than gates degrades to one gate per segment, no products
    TaskGraph g1 = build_taskgraph(chain_circuit(4, 3), Strategy::OUTER_ASSOC, 8, 0);
    check_taskgraph(g1);
    CHECK(g1.nodes.size() == 3);
    for (const auto& n : g1.nodes) CHECK(n.kind == TaskNode::MULMV);
}

TEST_CASE("reduce graphs put a barrier after every batch") {
    Circuit c = chain_circuit(4, 10);
    TaskGraph g = build_taskgraph(c, Strategy::OUTER_REDUCE, 4, 3);
    check_taskgraph(g);
    // batches 3,3,3,1: 4 nodes each for the first three, 2 for the last
    REQUIRE(g.nodes.size() == 14);

    std::vector<int> reduces;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        if (g.nodes[i].kind == TaskNode::REDUCE) reduces.push_back(int(i));
    REQUIRE(reduces.size() == 4);
    CHECK(g.output == reduces.back());

    // every task of batch k+1 that would otherwise be a root hangs off REDUCE k
    for (std::size_t k = 0; k + 1 < reduces.size(); ++k) {
        int red = reduces[k];
        int next_batch = g.nodes[std::size_t(red)].batch + 1;
        std::vector<int> expect_roots;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            const TaskNode& n = g.nodes[i];
            if (n.batch != next_batch || n.kind == TaskNode::REDUCE) continue;
            bool depends_on_own_batch =
                (n.a.kind == OpRef::NODE && g.nodes[std::size_t(n.a.idx)].batch == next_batch) ||
                (n.b.kind == OpRef::NODE && g.nodes[std::size_t(n.b.idx)].batch == next_batch);
            if (!depends_on_own_batch) expect_roots.push_back(int(i));
        }
        for (int r : expect_roots) {
            const auto& deps = g.nodes[std::size_t(red)].dependents;
            CHECK(std::find(deps.begin(), deps.end(), r) != deps.end());
        }
    }

    // reduce chain is totally ordered
    for (std::size_t k = 0; k + 1 < reduces.size(); ++k)
        CHECK(g.nodes[std::size_t(reduces[k])].batch <
              g.nodes[std::size_t(reduces[k + 1])].batch);
}

TEST_CASE("reduce batch one alternates apply and barrier") {
    Circuit c = chain_circuit(3, 5);
    TaskGraph g = build_taskgraph(c, Strategy::OUTER_REDUCE, 2, 1);
    check_taskgraph(g);
    REQUIRE(g.nodes.size() == 10);
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        CHECK(g.nodes[i].kind == (i % 2 == 0 ? TaskNode::MULMV : TaskNode::REDUCE));
}

TEST_CASE("builders reject bad arguments") {
    Circuit c = chain_circuit(3, 5);
    CHECK_THROWS_AS(build_taskgraph(c, Strategy::OUTER_REDUCE, 2, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_taskgraph(c, Strategy::SEQUENTIAL, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_taskgraph(c, Strategy::INNER_FIBERS, 2, 0), std::invalid_argument);
}

TEST_CASE("empty circuits produce empty graphs") {
    Circuit c;
    c.qubits = 3;
    for (Strategy s : {Strategy::OUTER_LINEAR, Strategy::OUTER_ASSOC, Strategy::OUTER_REDUCE}) {
        TaskGraph g = build_taskgraph(c, s, 4, 1);
        check_taskgraph(g);
        CHECK(g.nodes.empty());
        CHECK(g.output == -1);
    }
}

TEST_CASE("kahn check catches tampering") {
    Circuit c = chain_circuit(3, 4);
    TaskGraph g = build_taskgraph(c, Strategy::OUTER_LINEAR, 1, 0);

    TaskGraph cyc = g;
    cyc.nodes[1].dependents.push_back(0);
    cyc.nodes[0].indegree++;
    CHECK_THROWS_AS(check_taskgraph(cyc), std::logic_error);

    TaskGraph bad = g;
    bad.nodes[2].indegree++;
    CHECK_THROWS_AS(check_taskgraph(bad), std::logic_error);

    TaskGraph oob = g;
    oob.nodes[0].dependents.push_back(99);
    CHECK_THROWS_AS(check_taskgraph(oob), std::logic_error);
}

TEST_CASE("every builder output passes the check across sizes") {
    for (int gates : {1, 2, 3, 7, 16, 33}) {
        Circuit c = chain_circuit(5, gates);
        for (unsigned workers : {1u, 2u, 5u, 8u}) {
            check_taskgraph(build_taskgraph(c, Strategy::OUTER_LINEAR, workers, 0));
            check_taskgraph(build_taskgraph(c, Strategy::OUTER_ASSOC, workers, 0));
            for (int batch : {1, 2, 8})
                check_taskgraph(build_taskgraph(c, Strategy::OUTER_REDUCE, workers, batch));
        }
    }
}
