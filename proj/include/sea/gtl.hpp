#pragma once

#include <optional>

#include "sea/graph.hpp"
#include "sea/params.hpp"
#include "sea/tensor.hpp"

namespace sea {

struct LayerConfig {
    int num_heads = 4;
    int model_dim = 32;
    bool use_edge_features = false;
    bool use_bias = false;
    bool include_self = false;  // whether u attends to itself
    bool residual = true;

    int head_dim() const { return model_dim / num_heads; }
    void validate(bool strict_pairing) const;
};

// Flattened attention support: one entry per directed pair (u attends v),
// sorted by (u, ring, v). `slot` is the pair's position within u's support
// and addresses the padded (n x max_support) softmax layout.
struct Support {
    int num_nodes = 0;
    int max_support = 0;
    std::vector<int> src;
    std::vector<int> dst;
    std::vector<int> ring;     // hop distance of the pair (0 = self)
    std::vector<int> edge_id;  // undirected input edge id, -1 for virtual pairs
    std::vector<int> slot;
    std::vector<int> flat_index;  // src * max_support + slot
    std::vector<int> rings_present;  // sorted distinct ring values
    Tensor softmax_mask;             // (num_nodes, max_support), 0/1

    std::size_t num_pairs() const { return src.size(); }
};

// 1-hop support from the adjacency lists.
Support build_support(const GraphBatch& b, bool include_self);

// Union of k-hop rings 1..k from per-graph indexes (ring 0 when
// include_self). Indexes are per member graph, offsets applied here.
Support build_support(const GraphBatch& b,
                      const std::vector<const KHopIndex*>& khop, int k,
                      bool include_self);

// Parameter ids for one graph transformer layer. Projections may be shared
// across rings (one entry) or per ring (aligned with Support::rings_present).
struct GtlHeadParams {
    int q = -1, k = -1, v = -1, e = -1;
    int qb = -1, kb = -1, vb = -1, eb = -1;
};

struct GtlLayerParams {
    std::vector<std::vector<GtlHeadParams>> ring_heads;  // [ring slot][head]
    bool per_ring = false;
    int oh = -1, ohb = -1;
    int ffn_w1 = -1, ffn_b1 = -1, ffn_w2 = -1, ffn_b2 = -1;
    int oe = -1, oeb = -1;
    int effn_w1 = -1, effn_b1 = -1, effn_w2 = -1, effn_b2 = -1;
};

// Seeded dropout over attention weights and FFN hidden activations.
struct DropoutCtx {
    double rate = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t counter = 0;
};

struct GtlOutput {
    Tensor h;
    std::optional<Tensor> e;  // per-pair edge states when the edge channel is on
};

// One layer update: per-head neighbor attention (scores softmaxed over each
// node's support), head concat + output projection, residual, then a
// d -> 2d -> d ReLU feedforward with its own residual. No normalization
// layers. The optional edge stream gets the per-head score vectors, its own
// projection, residual and feedforward.
GtlOutput gtl_forward(const std::vector<Tensor>& params, const Tensor& h,
                      const std::optional<Tensor>& e_pairs,
                      const Support& support, const GtlLayerParams& layer,
                      const LayerConfig& cfg, DropoutCtx* dropout = nullptr);

// Per-edge raw attention scores for one head (pre-softmax), exposed for
// testing against direct evaluation.
Tensor attention_scores(const std::vector<Tensor>& params, const Tensor& h,
                        const std::optional<Tensor>& e_pairs,
                        const Support& support, const GtlHeadParams& head,
                        const LayerConfig& cfg);

enum class ReadoutKind { Sum, Mean, Max };

// Permutation-invariant pooling of node states into per-graph vectors.
Tensor readout(const Tensor& h, const std::vector<int>& graph_id,
               int num_graphs, ReadoutKind kind = ReadoutKind::Sum);

}  // namespace sea
