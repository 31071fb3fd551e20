#include "sea/graph.hpp"

#include <algorithm>
#include <queue>

#include "sea/error.hpp"
#include "sea/parallel.hpp"
#include "sea/rng.hpp"

namespace sea {

Graph Graph::Builder::build() const {
    require(num_nodes > 0, "graph: num_nodes must be positive, got ", num_nodes);
    Graph g;
    g.num_nodes_ = num_nodes;

    // Canonicalize and validate the undirected edge list.
    std::vector<std::pair<int, int>> canon(edges.size());
    std::vector<int> order(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto [u, v] = edges[i];
        require(u >= 0 && u < num_nodes && v >= 0 && v < num_nodes,
                "graph: node index out of range (edge [", u, ",", v,
                "], num_nodes ", num_nodes, ")");
        require(u != v, "graph: self-loop at node ", u);
        canon[i] = {std::min(u, v), std::max(u, v)};
        order[i] = static_cast<int>(i);
    }
    {
        auto sorted = canon;
        std::sort(sorted.begin(), sorted.end());
        auto dup = std::adjacent_find(sorted.begin(), sorted.end());
        require(dup == sorted.end(), "graph: duplicate edge [",
                dup == sorted.end() ? 0 : dup->first, ",",
                dup == sorted.end() ? 0 : dup->second, "]");
    }
    g.edges_ = canon;

    // CSR with both directions, neighbors sorted ascending.
    g.offsets_.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
    for (auto [u, v] : canon) {
        ++g.offsets_[u + 1];
        ++g.offsets_[v + 1];
    }
    for (int u = 0; u < num_nodes; ++u) g.offsets_[u + 1] += g.offsets_[u];
    g.adj_.resize(g.offsets_[num_nodes]);
    g.edge_of_slot_.resize(g.offsets_[num_nodes]);
    std::vector<int> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (std::size_t e = 0; e < canon.size(); ++e) {
        auto [u, v] = canon[e];
        g.adj_[cursor[u]] = v;
        g.edge_of_slot_[cursor[u]++] = static_cast<int>(e);
        g.adj_[cursor[v]] = u;
        g.edge_of_slot_[cursor[v]++] = static_cast<int>(e);
    }
    for (int u = 0; u < num_nodes; ++u) {
        int lo = g.offsets_[u], hi = g.offsets_[u + 1];
        std::vector<int> idx(hi - lo);
        for (int i = 0; i < hi - lo; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            return g.adj_[lo + a] < g.adj_[lo + b];
        });
        std::vector<int> a2(hi - lo), e2(hi - lo);
        for (int i = 0; i < hi - lo; ++i) {
            a2[i] = g.adj_[lo + idx[i]];
            e2[i] = g.edge_of_slot_[lo + idx[i]];
        }
        std::copy(a2.begin(), a2.end(), g.adj_.begin() + lo);
        std::copy(e2.begin(), e2.end(), g.edge_of_slot_.begin() + lo);
    }

    // Node features.
    if (!node_tokens.empty()) {
        require(node_dense.empty(), "graph: both token and dense node features given");
        require(static_cast<int>(node_tokens.size()) == num_nodes,
                "graph: node_feat length ", node_tokens.size(),
                " != num_nodes ", num_nodes);
        for (auto t : node_tokens)
            require(t >= 0, "graph: negative node token ", t);
        g.node_kind_ = NodeFeatureKind::Token;
        g.node_tokens_ = node_tokens;
    } else if (!node_dense.empty()) {
        require(node_dense_dim > 0, "graph: node_dense_dim must be positive");
        require(static_cast<int>(node_dense.size()) == num_nodes * node_dense_dim,
                "graph: dense node feature size mismatch");
        g.node_kind_ = NodeFeatureKind::Dense;
        g.node_dense_ = node_dense;
        g.node_dense_dim_ = node_dense_dim;
    }

    // Edge features.
    if (!edge_tokens.empty()) {
        require(edge_dense.empty(), "graph: both token and dense edge features given");
        require(edge_tokens.size() == edges.size(),
                "graph: edge_feat length ", edge_tokens.size(), " != edges ",
                edges.size());
        for (auto t : edge_tokens)
            require(t >= 0, "graph: negative edge token ", t);
        g.edge_kind_ = EdgeFeatureKind::Token;
        g.edge_tokens_ = edge_tokens;
    } else if (!edge_dense.empty()) {
        require(edge_dense_dim > 0, "graph: edge_dense_dim must be positive");
        require(edge_dense.size() == edges.size() * static_cast<std::size_t>(edge_dense_dim),
                "graph: dense edge feature size mismatch");
        g.edge_kind_ = EdgeFeatureKind::Dense;
        g.edge_dense_ = edge_dense;
        g.edge_dense_dim_ = edge_dense_dim;
    }

    // Target: exactly one kind may be present.
    require(!(y_graph.has_value() && !y_node.empty()),
            "graph: both y_graph and y_node given");
    if (y_graph.has_value()) {
        g.target_kind_ = TargetKind::GraphScalar;
        g.y_graph_ = y_graph;
    } else if (!y_node.empty()) {
        require(static_cast<int>(y_node.size()) == num_nodes,
                "graph: y_node length ", y_node.size(), " != num_nodes ", num_nodes);
        for (int c : y_node) require(c >= 0, "graph: negative node label ", c);
        g.target_kind_ = TargetKind::NodeLabels;
        g.y_node_ = y_node;
    }
    return g;
}

bool Graph::has_edge(int u, int v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

double Graph::y_graph() const {
    require(y_graph_.has_value(), "graph: no graph-level target present");
    return *y_graph_;
}

KHopIndex khop_index(const Graph& g, int max_k) {
    require(max_k >= 1, "khop_index: max_k must be >= 1, got ", max_k);
    const int n = g.num_nodes();
    KHopIndex idx;
    idx.max_k = max_k;
    idx.rings.resize(n);

    parallel_for(n, [&](int u) {
        auto& rings = idx.rings[u];
        rings.assign(static_cast<std::size_t>(max_k) + 1, {});
        std::vector<int> dist(n, -1);
        dist[u] = 0;
        rings[0] = {u};
        std::vector<int> frontier = {u};
        for (int r = 1; r <= max_k && !frontier.empty(); ++r) {
            std::vector<int> next;
            for (int w : frontier) {
                for (int v : g.neighbors(w)) {
                    if (dist[v] < 0) {
                        dist[v] = r;
                        next.push_back(v);
                    }
                }
            }
            std::sort(next.begin(), next.end());
            rings[r] = next;
            frontier = std::move(next);
        }
    });
    return idx;
}

GraphBatch batch(const std::vector<const Graph*>& graphs) {
    require(!graphs.empty(), "batch: empty graph list");
    const Graph& first = *graphs.front();
    for (const Graph* g : graphs) {
        require(g->node_feature_kind() == first.node_feature_kind() &&
                    g->node_dense_dim() == first.node_dense_dim(),
                "batch: mixed node feature kinds or dims");
        require(g->edge_feature_kind() == first.edge_feature_kind() &&
                    g->edge_dense_dim() == first.edge_dense_dim(),
                "batch: mixed edge feature kinds or dims");
        require(g->target_kind() == first.target_kind(),
                "batch: mixed target kinds");
    }

    GraphBatch b;
    b.num_graphs = static_cast<int>(graphs.size());
    Graph::Builder m;
    int offset = 0;
    for (int gi = 0; gi < b.num_graphs; ++gi) {
        const Graph& g = *graphs[gi];
        b.node_offset.push_back(offset);
        for (int u = 0; u < g.num_nodes(); ++u) b.graph_id.push_back(gi);
        for (auto [u, v] : g.edges()) m.edges.emplace_back(u + offset, v + offset);
        m.node_tokens.insert(m.node_tokens.end(), g.node_tokens().begin(),
                             g.node_tokens().end());
        m.node_dense.insert(m.node_dense.end(), g.node_dense().begin(),
                            g.node_dense().end());
        m.edge_tokens.insert(m.edge_tokens.end(), g.edge_tokens().begin(),
                             g.edge_tokens().end());
        m.edge_dense.insert(m.edge_dense.end(), g.edge_dense().begin(),
                            g.edge_dense().end());
        if (g.target_kind() == TargetKind::NodeLabels)
            m.y_node.insert(m.y_node.end(), g.y_node().begin(), g.y_node().end());
        offset += g.num_nodes();
    }
    m.num_nodes = offset;
    m.node_dense_dim = first.node_dense_dim();
    m.edge_dense_dim = first.edge_dense_dim();
    // Graph-level targets stay per member graph; the merged graph carries none.
    b.merged = m.build();
    return b;
}

GraphBatch batch(const std::vector<Graph>& graphs) {
    std::vector<const Graph*> ptrs;
    ptrs.reserve(graphs.size());
    for (const Graph& g : graphs) ptrs.push_back(&g);
    return batch(ptrs);
}

void SbmConfig::validate() const {
    require(num_graphs >= 1, "sbm: num_graphs must be >= 1");
    require(nodes_per_block >= 1, "sbm: nodes_per_block must be >= 1");
    require(num_blocks >= 1, "sbm: num_blocks must be >= 1");
    require(p_intra >= 0.0 && p_intra <= 1.0, "sbm: p_intra out of [0,1]");
    require(p_inter >= 0.0 && p_inter <= 1.0, "sbm: p_inter out of [0,1]");
    require(p_inter <= p_intra, "sbm: p_inter must not exceed p_intra");
    require(feature_vocab >= 1, "sbm: feature_vocab must be >= 1");
}

std::vector<Graph> generate_sbm(const SbmConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const int n = cfg.nodes_per_block * cfg.num_blocks;
    std::vector<Graph> out;
    out.reserve(cfg.num_graphs);
    for (int gi = 0; gi < cfg.num_graphs; ++gi) {
        Graph::Builder b;
        b.num_nodes = n;
        for (int u = 0; u < n; ++u) {
            for (int v = u + 1; v < n; ++v) {
                bool same = (u / cfg.nodes_per_block) == (v / cfg.nodes_per_block);
                double p = same ? cfg.p_intra : cfg.p_inter;
                if (rng.u01() < p) b.edges.emplace_back(u, v);
            }
        }
        b.node_tokens.resize(n);
        for (int u = 0; u < n; ++u)
            b.node_tokens[u] = static_cast<std::int64_t>(
                rng.bounded(static_cast<std::uint64_t>(cfg.feature_vocab)));
        b.y_node.resize(n);
        for (int u = 0; u < n; ++u) b.y_node[u] = u / cfg.nodes_per_block;
        out.push_back(b.build());
    }
    return out;
}

}  // namespace sea
