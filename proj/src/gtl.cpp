#include "sea/gtl.hpp"

#include <algorithm>
#include <cmath>

#include "sea/error.hpp"
#include "sea/rng.hpp"

namespace sea {

void LayerConfig::validate(bool strict_pairing) const {
    require(num_heads >= 1 && model_dim >= 1, "layer: heads and dim must be >= 1");
    require(model_dim % num_heads == 0, "layer: model_dim ", model_dim,
            " not divisible by num_heads ", num_heads);
    if (strict_pairing) {
        const bool ok = (num_heads == 4 && model_dim == 32) ||
                        (num_heads == 8 && model_dim == 64) ||
                        (num_heads == 8 && model_dim == 56);
        require(ok, "layer: strict mode allows (heads,dim) in {(4,32),(8,64),(8,56)}, got (",
                num_heads, ",", model_dim, ")");
    }
}

namespace {

// rings_present lists the configured rings (not just those with pairs in
// this batch) so per-ring parameter slots always line up with it.
void finalize_support(Support& s, std::vector<int> rings) {
    const std::size_t pairs = s.src.size();
    s.slot.resize(pairs);
    s.flat_index.resize(pairs);
    std::vector<int> count(s.num_nodes, 0);
    for (std::size_t p = 0; p < pairs; ++p) s.slot[p] = count[s.src[p]]++;
    s.max_support = count.empty() ? 0 : *std::max_element(count.begin(), count.end());
    if (s.max_support == 0) s.max_support = 1;  // keep the padded layout nonempty
    for (std::size_t p = 0; p < pairs; ++p)
        s.flat_index[p] = s.src[p] * s.max_support + s.slot[p];
    s.softmax_mask = Tensor({static_cast<std::size_t>(s.num_nodes),
                             static_cast<std::size_t>(s.max_support)});
    for (std::size_t p = 0; p < pairs; ++p)
        s.softmax_mask.at(s.src[p], s.slot[p]) = 1.0;
    s.rings_present = std::move(rings);
}

std::vector<int> ring_list(int k, bool include_self) {
    std::vector<int> rings;
    if (include_self) rings.push_back(0);
    for (int r = 1; r <= k; ++r) rings.push_back(r);
    return rings;
}

}  // namespace

Support build_support(const GraphBatch& b, bool include_self) {
    Support s;
    s.num_nodes = b.merged.num_nodes();
    for (int u = 0; u < s.num_nodes; ++u) {
        if (include_self) {
            s.src.push_back(u);
            s.dst.push_back(u);
            s.ring.push_back(0);
            s.edge_id.push_back(-1);
        }
        auto nbs = b.merged.neighbors(u);
        auto eids = b.merged.neighbor_edge_ids(u);
        for (std::size_t i = 0; i < nbs.size(); ++i) {
            s.src.push_back(u);
            s.dst.push_back(nbs[i]);
            s.ring.push_back(1);
            s.edge_id.push_back(eids[i]);
        }
    }
    finalize_support(s, ring_list(1, include_self));
    return s;
}

Support build_support(const GraphBatch& b,
                      const std::vector<const KHopIndex*>& khop, int k,
                      bool include_self) {
    require(static_cast<int>(khop.size()) == b.num_graphs,
            "support: khop index count != graph count");
    Support s;
    s.num_nodes = b.merged.num_nodes();
    for (int u = 0; u < s.num_nodes; ++u) {
        const int gi = b.graph_id[u];
        const int off = b.node_offset[gi];
        const KHopIndex& kh = *khop[gi];
        require(kh.max_k >= k, "support: khop index covers ", kh.max_k,
                " hops, need ", k);
        const int lu = u - off;
        if (include_self) {
            s.src.push_back(u);
            s.dst.push_back(u);
            s.ring.push_back(0);
            s.edge_id.push_back(-1);
        }
        for (int r = 1; r <= k; ++r) {
            for (int lv : kh.ring(lu, r)) {
                s.src.push_back(u);
                s.dst.push_back(lv + off);
                s.ring.push_back(r);
                // Ring-1 pairs sit on a real edge of the merged graph.
                int eid = -1;
                if (r == 1) {
                    auto nbs = b.merged.neighbors(u);
                    auto eids = b.merged.neighbor_edge_ids(u);
                    auto it = std::lower_bound(nbs.begin(), nbs.end(), lv + off);
                    eid = eids[it - nbs.begin()];
                }
                s.edge_id.push_back(eid);
            }
        }
    }
    finalize_support(s, ring_list(k, include_self));
    return s;
}

namespace {

int ring_slot(const Support& s, int ring) {
    auto it = std::lower_bound(s.rings_present.begin(), s.rings_present.end(), ring);
    require(it != s.rings_present.end() && *it == ring,
            "support: ring ", ring, " not present");
    return static_cast<int>(it - s.rings_present.begin());
}

Tensor maybe_bias(const std::vector<Tensor>& params, Tensor x, int bias_id) {
    if (bias_id < 0) return x;
    return add_rowvec(std::move(x), params[bias_id]);
}

// Projects h with the (possibly per-ring) matrix for this head and gathers
// one row per pair, taking each pair's row from its ring's projection.
Tensor project_and_gather(const std::vector<Tensor>& params, const Tensor& h,
                          const Support& s,
                          const std::vector<std::vector<GtlHeadParams>>& ring_heads,
                          bool per_ring, int head, int which,
                          const std::vector<int>& pair_nodes) {
    auto pick = [&](const GtlHeadParams& hp) {
        switch (which) {
            case 0: return std::pair<int, int>{hp.q, hp.qb};
            case 1: return std::pair<int, int>{hp.k, hp.kb};
            default: return std::pair<int, int>{hp.v, hp.vb};
        }
    };
    if (!per_ring) {
        auto [w, bias] = pick(ring_heads[0][head]);
        Tensor proj = maybe_bias(params, matmul(h, params[w]), bias);
        return gather_rows(proj, pair_nodes);
    }
    // Stack per-ring projections vertically, then address row
    // ring_slot * n + node per pair.
    const int n = static_cast<int>(h.rows());
    std::vector<Tensor> stacked;
    for (std::size_t rs = 0; rs < s.rings_present.size(); ++rs) {
        auto [w, bias] = pick(ring_heads[rs][head]);
        stacked.push_back(maybe_bias(params, matmul(h, params[w]), bias));
    }
    Tensor all = concat_rows(stacked);
    std::vector<int> idx(pair_nodes.size());
    for (std::size_t p = 0; p < pair_nodes.size(); ++p)
        idx[p] = ring_slot(s, s.ring[p]) * n + pair_nodes[p];
    return gather_rows(all, idx);
}

// Per-head score vectors (pair x head_dim): elementwise product of the query
// and key rows scaled by 1/sqrt(d_k), times the projected edge term when the
// edge channel is on.
Tensor head_score_vectors(const std::vector<Tensor>& params, const Tensor& h,
                          const std::optional<Tensor>& e_pairs,
                          const Support& s,
                          const std::vector<std::vector<GtlHeadParams>>& ring_heads,
                          bool per_ring, int head, const LayerConfig& cfg) {
    Tensor q = project_and_gather(params, h, s, ring_heads, per_ring, head, 0, s.src);
    Tensor k = project_and_gather(params, h, s, ring_heads, per_ring, head, 1, s.dst);
    Tensor svec = scale(mul_elementwise(q, k),
                        1.0 / std::sqrt(static_cast<double>(cfg.head_dim())));
    if (cfg.use_edge_features) {
        require(e_pairs.has_value(), "gtl: edge channel enabled but no edge states");
        const GtlHeadParams& hp = ring_heads[0][head];
        Tensor ep = maybe_bias(params, matmul(*e_pairs, params[hp.e]), hp.eb);
        svec = mul_elementwise(svec, ep);
    }
    return svec;
}

Tensor apply_dropout(Tensor x, DropoutCtx* drop) {
    if (!drop || drop->rate <= 0.0) return x;
    const double keep = 1.0 - drop->rate;
    Tensor mask(x.shape());
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const double u = counter_u01(drop->seed, drop->counter, i, 0x5eaf00d);
        mask.values()[i] = u < drop->rate ? 0.0 : 1.0 / keep;
    }
    drop->counter++;
    return mul_elementwise(std::move(x), mask);
}

}  // namespace

Tensor attention_scores(const std::vector<Tensor>& params, const Tensor& h,
                        const std::optional<Tensor>& e_pairs,
                        const Support& support, const GtlHeadParams& head,
                        const LayerConfig& cfg) {
    std::vector<std::vector<GtlHeadParams>> rh{{head}};
    Tensor svec = head_score_vectors(params, h, e_pairs, support, rh, false, 0, cfg);
    return sum_rows(svec);
}

GtlOutput gtl_forward(const std::vector<Tensor>& params, const Tensor& h,
                      const std::optional<Tensor>& e_pairs,
                      const Support& support, const GtlLayerParams& layer,
                      const LayerConfig& cfg, DropoutCtx* dropout) {
    require(static_cast<int>(h.cols()) == cfg.model_dim,
            "gtl: state dim ", h.cols(), " != model dim ", cfg.model_dim);
    require(static_cast<int>(h.rows()) == support.num_nodes,
            "gtl: node count mismatch");
    if (layer.per_ring)
        require(layer.ring_heads.size() == support.rings_present.size(),
                "gtl: per-ring parameter count != rings present");

    const std::size_t n = h.rows();
    const std::size_t smax = support.max_support;

    std::vector<Tensor> head_outputs;
    std::vector<Tensor> head_svecs;  // kept for the edge stream
    for (int head = 0; head < cfg.num_heads; ++head) {
        Tensor svec = head_score_vectors(params, h, e_pairs, support,
                                         layer.ring_heads, layer.per_ring,
                                         head, cfg);
        if (cfg.use_edge_features) head_svecs.push_back(svec);
        Tensor score = sum_rows(svec);  // (pairs, 1)

        // Softmax over each node's support via the padded (n, smax) layout.
        Tensor padded = scatter_add_rows(score, support.flat_index, n * smax);
        padded = reshape(padded, {n, smax});
        Tensor weights = masked_row_softmax(padded, support.softmax_mask);
        weights = reshape(weights, {n * smax, 1});
        Tensor w_pair = gather_rows(weights, support.flat_index);
        w_pair = apply_dropout(std::move(w_pair), dropout);

        Tensor vals = project_and_gather(params, h, support, layer.ring_heads,
                                         layer.per_ring, head, 2, support.dst);
        Tensor messages = scale_rows(vals, w_pair);
        head_outputs.push_back(scatter_add_rows(messages, support.src, n));
    }

    Tensor attn = concat_last_dim(head_outputs);
    attn = maybe_bias(params, matmul(attn, params[layer.oh]), layer.ohb);
    Tensor h1 = cfg.residual ? add(h, attn) : attn;

    Tensor hidden = relu(maybe_bias(params, matmul(h1, params[layer.ffn_w1]),
                                    layer.ffn_b1));
    hidden = apply_dropout(std::move(hidden), dropout);
    Tensor ffn = maybe_bias(params, matmul(hidden, params[layer.ffn_w2]),
                            layer.ffn_b2);
    GtlOutput out;
    out.h = cfg.residual ? add(h1, ffn) : ffn;

    if (cfg.use_edge_features) {
        Tensor ecat = concat_last_dim(head_svecs);
        Tensor eproj = maybe_bias(params, matmul(ecat, params[layer.oe]),
                                  layer.oeb);
        Tensor e1 = cfg.residual ? add(*e_pairs, eproj) : eproj;
        Tensor ehidden = relu(maybe_bias(params, matmul(e1, params[layer.effn_w1]),
                                         layer.effn_b1));
        ehidden = apply_dropout(std::move(ehidden), dropout);
        Tensor effn = maybe_bias(params, matmul(ehidden, params[layer.effn_w2]),
                                 layer.effn_b2);
        out.e = cfg.residual ? add(e1, effn) : effn;
    }
    return out;
}

Tensor readout(const Tensor& h, const std::vector<int>& graph_id,
               int num_graphs, ReadoutKind kind) {
    require(graph_id.size() == h.rows(), "readout: graph_id size mismatch");
    switch (kind) {
        case ReadoutKind::Sum:
            return scatter_add_rows(h, graph_id, num_graphs);
        case ReadoutKind::Mean: {
            Tensor sums = scatter_add_rows(h, graph_id, num_graphs);
            Tensor inv({static_cast<std::size_t>(num_graphs), 1});
            std::vector<int> counts(num_graphs, 0);
            for (int g : graph_id) ++counts[g];
            for (int g = 0; g < num_graphs; ++g)
                inv.at(g, 0) = counts[g] > 0 ? 1.0 / counts[g] : 0.0;
            return scale_rows(sums, inv);
        }
        case ReadoutKind::Max:
            return scatter_max_rows(h, graph_id, num_graphs);
    }
    fail("readout: unknown kind");
}

}  // namespace sea
