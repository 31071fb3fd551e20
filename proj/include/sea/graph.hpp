#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sea {

enum class NodeFeatureKind { None, Token, Dense };
enum class EdgeFeatureKind { None, Token, Dense };
enum class TargetKind { None, GraphScalar, NodeLabels };

// Immutable undirected graph in CSR form. Each undirected edge is stored in
// both directions; neighbor lists are sorted ascending and contain neither
// self-loops nor duplicates.
class Graph {
public:
    struct Builder {
        int num_nodes = 0;
        std::vector<std::pair<int, int>> edges;  // undirected, validated on build
        std::vector<std::int64_t> node_tokens;
        std::vector<double> node_dense;  // row-major (num_nodes x node_dense_dim)
        int node_dense_dim = 0;
        std::vector<std::int64_t> edge_tokens;  // aligned with `edges`
        std::vector<double> edge_dense;         // row-major (edges x edge_dense_dim)
        int edge_dense_dim = 0;
        std::optional<double> y_graph;
        std::vector<int> y_node;

        Graph build() const;
    };

    int num_nodes() const { return num_nodes_; }
    int num_edges() const { return static_cast<int>(edges_.size()); }

    std::span<const int> neighbors(int u) const {
        return {adj_.data() + offsets_[u],
                adj_.data() + offsets_[static_cast<std::size_t>(u) + 1]};
    }
    int degree(int u) const { return offsets_[u + 1] - offsets_[u]; }

    // Undirected edge id for the CSR slot holding neighbor v of u.
    std::span<const int> neighbor_edge_ids(int u) const {
        return {edge_of_slot_.data() + offsets_[u],
                edge_of_slot_.data() + offsets_[static_cast<std::size_t>(u) + 1]};
    }

    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    bool has_edge(int u, int v) const;

    NodeFeatureKind node_feature_kind() const { return node_kind_; }
    EdgeFeatureKind edge_feature_kind() const { return edge_kind_; }
    TargetKind target_kind() const { return target_kind_; }

    const std::vector<std::int64_t>& node_tokens() const { return node_tokens_; }
    const std::vector<double>& node_dense() const { return node_dense_; }
    int node_dense_dim() const { return node_dense_dim_; }

    const std::vector<std::int64_t>& edge_tokens() const { return edge_tokens_; }
    const std::vector<double>& edge_dense() const { return edge_dense_; }
    int edge_dense_dim() const { return edge_dense_dim_; }

    double y_graph() const;
    const std::vector<int>& y_node() const { return y_node_; }

private:
    friend struct Builder;
    int num_nodes_ = 0;
    std::vector<int> offsets_;       // size num_nodes + 1
    std::vector<int> adj_;           // sorted per node
    std::vector<int> edge_of_slot_;  // undirected edge id per CSR slot
    std::vector<std::pair<int, int>> edges_;  // canonical (u < v)

    NodeFeatureKind node_kind_ = NodeFeatureKind::None;
    EdgeFeatureKind edge_kind_ = EdgeFeatureKind::None;
    TargetKind target_kind_ = TargetKind::None;
    std::vector<std::int64_t> node_tokens_;
    std::vector<double> node_dense_;
    int node_dense_dim_ = 0;
    std::vector<std::int64_t> edge_tokens_;
    std::vector<double> edge_dense_;
    int edge_dense_dim_ = 0;
    std::optional<double> y_graph_;
    std::vector<int> y_node_;
};

// Per node, per hop distance r in {0..max_k}, the sorted list of nodes at
// exactly distance r. Ring 0 is {u}; unreachable nodes appear in no ring.
struct KHopIndex {
    int max_k = 0;
    std::vector<std::vector<std::vector<int>>> rings;  // [node][r]

    std::span<const int> ring(int u, int r) const { return rings[u][r]; }
};

KHopIndex khop_index(const Graph& g, int max_k);

// Disjoint union of graphs with node indices offset per member.
struct GraphBatch {
    Graph merged;
    std::vector<int> graph_id;     // per merged node
    std::vector<int> node_offset;  // per graph, first merged node index
    int num_graphs = 0;

    int local_index(int merged_node) const {
        return merged_node - node_offset[graph_id[merged_node]];
    }
};

GraphBatch batch(const std::vector<const Graph*>& graphs);
GraphBatch batch(const std::vector<Graph>& graphs);

struct SbmConfig {
    int num_graphs = 1;
    int nodes_per_block = 1;
    int num_blocks = 2;
    double p_intra = 0.0;
    double p_inter = 0.0;
    int feature_vocab = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

// Seeded stochastic block model sampler; node label = block index, node
// feature uniform over the vocabulary. Identical config + seed gives
// bit-identical output.
std::vector<Graph> generate_sbm(const SbmConfig& cfg);

std::vector<Graph> load_jsonl_dataset(const std::string& path);
void save_jsonl_dataset(const std::vector<Graph>& graphs, const std::string& path);

}  // namespace sea
