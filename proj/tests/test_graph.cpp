#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "sea/error.hpp"
#include "sea/graph.hpp"
#include "sea/rng.hpp"

using namespace sea;

namespace {

Graph make_path(int n) {
    Graph::Builder b;
    b.num_nodes = n;
    for (int i = 0; i + 1 < n; ++i) b.edges.emplace_back(i, i + 1);
    return b.build();
}

Graph make_cycle(int n) {
    Graph::Builder b;
    b.num_nodes = n;
    for (int i = 0; i < n; ++i) b.edges.emplace_back(i, (i + 1) % n);
    return b.build();
}

std::string write_temp(const std::string& contents) {
    static int counter = 0;
    std::string path = "test_graph_tmp_" + std::to_string(counter++) + ".jsonl";
    std::ofstream f(path, std::ios::binary);
    f << contents;
    return path;
}

// Hop distances within k via boolean adjacency-matrix powers.
std::vector<std::vector<int>> bool_power_distances(const Graph& g, int max_k) {
    const int n = g.num_nodes();
    std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
    std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
    for (int u = 0; u < n; ++u) {
        reach[u][u] = 1;
        dist[u][u] = 0;
    }
    std::vector<std::vector<char>> frontier = reach;
    for (int k = 1; k <= max_k; ++k) {
        std::vector<std::vector<char>> next(n, std::vector<char>(n, 0));
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v)
                if (frontier[u][v])
                    for (int w : g.neighbors(v)) next[u][w] = 1;
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v)
                if (next[u][v] && !reach[u][v]) {
                    reach[u][v] = 1;
                    dist[u][v] = k;
                }
        frontier = next;
    }
    return dist;
}

std::vector<int> to_vec(std::span<const int> s) {
    return {s.begin(), s.end()};
}

Graph random_graph(Rng& rng, int n, double p) {
    Graph::Builder b;
    b.num_nodes = n;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (rng.u01() < p) b.edges.emplace_back(u, v);
    return b.build();
}

}  // namespace

TEST_CASE("builder produces symmetric sorted adjacency") {
    Graph::Builder b;
    b.num_nodes = 4;
    b.edges = {{2, 0}, {1, 3}, {0, 1}};
    Graph g = b.build();
    CHECK(g.num_edges() == 3);
    for (int u = 0; u < 4; ++u) {
        auto nb = g.neighbors(u);
        CHECK(std::is_sorted(nb.begin(), nb.end()));
        for (int v : nb) {
            CHECK(v != u);
            CHECK(g.has_edge(v, u));
        }
    }
    CHECK(g.has_edge(0, 2));
    CHECK(g.has_edge(2, 0));
}

TEST_CASE("builder rejects bad edges") {
    Graph::Builder b;
    b.num_nodes = 2;
    b.edges = {{0, 5}};
    CHECK_THROWS_WITH_AS(b.build(),
                         doctest::Contains("node index out of range"), Error);
    b.edges = {{1, 1}};
    CHECK_THROWS_AS(b.build(), Error);
    b.edges = {{0, 1}, {1, 0}};
    CHECK_THROWS_WITH_AS(b.build(), doctest::Contains("duplicate edge"), Error);
}

TEST_CASE("jsonl: smallest valid record") {
    auto path = write_temp(
        R"({"num_nodes":2,"edges":[[0,1]],"node_feat":[0,0],"y_graph":1.0})"
        "\n");
    auto graphs = load_jsonl_dataset(path);
    REQUIRE(graphs.size() == 1);
    const Graph& g = graphs[0];
    CHECK(g.num_nodes() == 2);
    REQUIRE(g.neighbors(0).size() == 1);
    CHECK(g.neighbors(0)[0] == 1);
    CHECK(g.neighbors(1)[0] == 0);
    CHECK(g.y_graph() == 1.0);
    CHECK(g.node_feature_kind() == NodeFeatureKind::Token);
    std::remove(path.c_str());
}

TEST_CASE("jsonl: node index out of range reports the line") {
    auto path = write_temp(
        R"({"num_nodes":2,"edges":[[0,5]],"node_feat":[0,0],"y_graph":1.0})"
        "\n");
    CHECK_THROWS_WITH_AS(load_jsonl_dataset(path),
                         doctest::Contains("node index out of range"), Error);
    try {
        load_jsonl_dataset(path);
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
    std::remove(path.c_str());
}

TEST_CASE("jsonl: three lines give three graphs in order") {
    auto path = write_temp(
        R"({"num_nodes":1,"node_feat":[0],"y_graph":1.0})"
        "\n"
        R"({"num_nodes":2,"edges":[[0,1]],"node_feat":[0,1],"y_graph":2.0})"
        "\n"
        R"({"num_nodes":3,"node_feat":[0,1,2],"y_graph":3.0})"
        "\n");
    auto graphs = load_jsonl_dataset(path);
    REQUIRE(graphs.size() == 3);
    CHECK(graphs[0].num_nodes() == 1);
    CHECK(graphs[1].num_nodes() == 2);
    CHECK(graphs[2].num_nodes() == 3);
    CHECK(graphs[2].y_graph() == 3.0);
    std::remove(path.c_str());
}

TEST_CASE("jsonl: mixed target kinds rejected") {
    auto path = write_temp(
        R"({"num_nodes":1,"node_feat":[0],"y_graph":1.0})"
        "\n"
        R"({"num_nodes":1,"node_feat":[0],"y_node":[0]})"
        "\n");
    CHECK_THROWS_WITH_AS(load_jsonl_dataset(path),
                         doctest::Contains("mixed target kinds"), Error);
    std::remove(path.c_str());
}

TEST_CASE("jsonl: parse failure reports line number") {
    auto path = write_temp("not json\n");
    CHECK_THROWS_WITH_AS(load_jsonl_dataset(path),
                         doctest::Contains("line 1"), Error);
    std::remove(path.c_str());
}

TEST_CASE("jsonl round trip preserves structure") {
    SbmConfig cfg;
    cfg.num_graphs = 3;
    cfg.nodes_per_block = 4;
    cfg.num_blocks = 2;
    cfg.p_intra = 0.8;
    cfg.p_inter = 0.2;
    cfg.feature_vocab = 5;
    cfg.seed = 3;
    auto graphs = generate_sbm(cfg);
    std::string path = write_temp("");
    save_jsonl_dataset(graphs, path);
    auto loaded = load_jsonl_dataset(path);
    REQUIRE(loaded.size() == graphs.size());
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        CHECK(loaded[i].num_nodes() == graphs[i].num_nodes());
        CHECK(loaded[i].edges() == graphs[i].edges());
        CHECK(loaded[i].node_tokens() == graphs[i].node_tokens());
        CHECK(loaded[i].y_node() == graphs[i].y_node());
    }
    std::remove(path.c_str());
}

TEST_CASE("sbm: degenerate probabilities give two triangles") {
    SbmConfig cfg;
    cfg.num_graphs = 1;
    cfg.nodes_per_block = 3;
    cfg.num_blocks = 2;
    cfg.p_intra = 1.0;
    cfg.p_inter = 0.0;
    auto graphs = generate_sbm(cfg);
    REQUIRE(graphs.size() == 1);
    const Graph& g = graphs[0];
    CHECK(g.num_edges() == 6);  // two triangles
    CHECK(g.y_node() == std::vector<int>{0, 0, 0, 1, 1, 1});
    for (auto [u, v] : g.edges()) CHECK(u / 3 == v / 3);
}

TEST_CASE("sbm: zero probabilities give an edgeless graph") {
    SbmConfig cfg;
    cfg.num_graphs = 1;
    cfg.nodes_per_block = 4;
    cfg.num_blocks = 2;
    cfg.p_intra = 0.0;
    cfg.p_inter = 0.0;
    auto graphs = generate_sbm(cfg);
    CHECK(graphs[0].num_edges() == 0);
}

TEST_CASE("sbm: same seed reproduces, different seed varies") {
    SbmConfig cfg;
    cfg.num_graphs = 2;
    cfg.nodes_per_block = 10;
    cfg.num_blocks = 2;
    cfg.p_intra = 0.8;
    cfg.p_inter = 0.1;
    cfg.feature_vocab = 7;
    cfg.seed = 7;
    auto a = generate_sbm(cfg);
    auto b = generate_sbm(cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].edges() == b[i].edges());
        CHECK(a[i].node_tokens() == b[i].node_tokens());
    }
    cfg.seed = 8;
    auto c = generate_sbm(cfg);
    CHECK(a[0].edges() != c[0].edges());
}

TEST_CASE("sbm: invalid config rejected") {
    SbmConfig cfg;
    cfg.p_intra = 0.2;
    cfg.p_inter = 0.5;  // inter above intra
    CHECK_THROWS_AS(generate_sbm(cfg), Error);
}

TEST_CASE("sbm: edge count statistics over 100 seeds") {
    // With all pair probabilities equal, the total is Binomial(pairs*trials, p).
    const double p = 0.3;
    const int n = 12, trials = 100;
    const double pairs = n * (n - 1) / 2.0;
    long total = 0;
    for (int s = 0; s < trials; ++s) {
        SbmConfig cfg;
        cfg.num_graphs = 1;
        cfg.nodes_per_block = n / 2;
        cfg.num_blocks = 2;
        cfg.p_intra = p;
        cfg.p_inter = p;
        cfg.seed = 1000 + s;
        total += generate_sbm(cfg)[0].num_edges();
    }
    const double mean = pairs * trials * p;
    const double sigma = std::sqrt(pairs * trials * p * (1 - p));
    CHECK(std::abs(total - mean) <= 3.0 * sigma);
}

TEST_CASE("khop: path graph rings from an endpoint") {
    Graph g = make_path(4);
    KHopIndex idx = khop_index(g, 2);
    CHECK(to_vec(idx.ring(0, 0)) == std::vector<int>{0});
    CHECK(to_vec(idx.ring(0, 1)) == std::vector<int>{1});
    CHECK(to_vec(idx.ring(0, 2)) == std::vector<int>{2});
}

TEST_CASE("khop: star center reaches all leaves in one hop") {
    Graph::Builder b;
    b.num_nodes = 6;
    for (int leaf = 1; leaf <= 5; ++leaf) b.edges.emplace_back(0, leaf);
    Graph g = b.build();
    KHopIndex idx = khop_index(g, 1);
    CHECK(to_vec(idx.ring(0, 1)) == std::vector<int>{1, 2, 3, 4, 5});
    for (int leaf = 1; leaf <= 5; ++leaf)
        CHECK(to_vec(idx.ring(leaf, 1)) == std::vector<int>{0});
}

TEST_CASE("khop: C6 ring sizes") {
    Graph g = make_cycle(6);
    KHopIndex idx = khop_index(g, 2);
    for (int u = 0; u < 6; ++u) {
        CHECK(idx.ring(u, 1).size() == 2);
        CHECK(idx.ring(u, 2).size() == 2);
    }
}

TEST_CASE("khop: max_k must be positive") {
    CHECK_THROWS_AS(khop_index(make_path(3), 0), Error);
}

TEST_CASE("khop matches boolean adjacency-power oracle") {
    Rng rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng.bounded(49));
        Graph g = random_graph(rng, n, 0.15);
        const int k = 1 + static_cast<int>(rng.bounded(4));
        KHopIndex idx = khop_index(g, k);
        auto dist = bool_power_distances(g, k);
        for (int u = 0; u < n; ++u) {
            for (int r = 0; r <= k; ++r) {
                std::vector<int> expect;
                for (int v = 0; v < n; ++v)
                    if (dist[u][v] == r) expect.push_back(v);
                CHECK(to_vec(idx.ring(u, r)) == expect);
            }
        }
    }
}

TEST_CASE("khop rings are disjoint and frontier-connected") {
    Rng rng(123);
    Graph g = random_graph(rng, 30, 0.12);
    const int k = 3;
    KHopIndex idx = khop_index(g, k);
    for (int u = 0; u < g.num_nodes(); ++u) {
        std::set<int> seen;
        for (int r = 0; r <= k; ++r)
            for (int v : idx.ring(u, r)) CHECK(seen.insert(v).second);
        for (int r = 1; r <= k; ++r) {
            for (int v : idx.ring(u, r)) {
                bool linked = false;
                for (int w : idx.ring(u, r - 1))
                    if (g.has_edge(v, w)) linked = true;
                CHECK(linked);
            }
        }
    }
}

TEST_CASE("khop independent of adjacency input order") {
    Rng rng(5);
    Graph a = random_graph(rng, 20, 0.2);
    Graph::Builder b;
    b.num_nodes = 20;
    b.edges = a.edges();
    std::reverse(b.edges.begin(), b.edges.end());
    for (auto& e : b.edges) std::swap(e.first, e.second);
    Graph g2 = b.build();
    KHopIndex i1 = khop_index(a, 3);
    KHopIndex i2 = khop_index(g2, 3);
    CHECK(i1.rings == i2.rings);
}

TEST_CASE("batch: offsets and graph ids") {
    Graph::Builder b1;
    b1.num_nodes = 2;
    b1.node_tokens = {0, 1};
    Graph::Builder b2;
    b2.num_nodes = 3;
    b2.edges = {{0, 1}};
    b2.node_tokens = {1, 2, 0};
    GraphBatch bt = batch({b1.build(), b2.build()});
    CHECK(bt.merged.num_nodes() == 5);
    CHECK(bt.node_offset == std::vector<int>{0, 2});
    CHECK(bt.graph_id == std::vector<int>{0, 0, 1, 1, 1});
    CHECK(bt.merged.has_edge(2, 3));  // (0,1) of the second graph
    CHECK_FALSE(bt.merged.has_edge(1, 2));
    CHECK(bt.local_index(4) == 2);
}

TEST_CASE("batch: single graph is an identity merge") {
    Graph g = make_path(4);
    GraphBatch bt = batch(std::vector<Graph>{g});
    CHECK(bt.merged.num_nodes() == 4);
    CHECK(bt.merged.edges() == g.edges());
}

TEST_CASE("batch: no cross-graph edges") {
    Rng rng(2);
    std::vector<Graph> graphs;
    for (int i = 0; i < 4; ++i) graphs.push_back(random_graph(rng, 6, 0.4));
    GraphBatch bt = batch(graphs);
    for (auto [u, v] : bt.merged.edges())
        CHECK(bt.graph_id[u] == bt.graph_id[v]);
    int total = 0;
    for (const Graph& g : graphs) total += g.num_nodes();
    CHECK(bt.merged.num_nodes() == total);
}

TEST_CASE("khop parallel output equals single-threaded output") {
    Rng rng(71);
    Graph g = random_graph(rng, 40, 0.15);
    setenv("SEA_THREADS", "1", 1);
    KHopIndex seq = khop_index(g, 3);
    setenv("SEA_THREADS", "4", 1);
    KHopIndex par = khop_index(g, 3);
    unsetenv("SEA_THREADS");
    CHECK(seq.rings == par.rings);
}

TEST_CASE("batch: mixed feature kinds rejected") {
    Graph::Builder b1;
    b1.num_nodes = 1;
    b1.node_tokens = {0};
    Graph::Builder b2;
    b2.num_nodes = 1;
    b2.node_dense = {0.5, 0.5};
    b2.node_dense_dim = 2;
    CHECK_THROWS_WITH_AS(batch({b1.build(), b2.build()}),
                         doctest::Contains("mixed node feature"), Error);
}
