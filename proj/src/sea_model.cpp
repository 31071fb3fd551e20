#include "sea/sea_model.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "sea/error.hpp"
#include "sea/optim.hpp"
#include "sea/rng.hpp"

namespace sea {

using nlohmann::json;

Variant variant_from_string(const std::string& s) {
    if (s == "sea_gnn") return Variant::SeaGnn;
    if (s == "sea_aggregated") return Variant::SeaAggregated;
    if (s == "sea_khop") return Variant::SeaKhop;
    fail("unknown variant: ", s);
}

std::string to_string(Variant v) {
    switch (v) {
        case Variant::SeaGnn: return "sea_gnn";
        case Variant::SeaAggregated: return "sea_aggregated";
        case Variant::SeaKhop: return "sea_khop";
    }
    fail("bad variant");
}

Task task_from_string(const std::string& s) {
    if (s == "graph_regression") return Task::GraphRegression;
    if (s == "graph_binary") return Task::GraphBinary;
    if (s == "node_classification") return Task::NodeClassification;
    fail("unknown task: ", s);
}

std::string to_string(Task t) {
    switch (t) {
        case Task::GraphRegression: return "graph_regression";
        case Task::GraphBinary: return "graph_binary";
        case Task::NodeClassification: return "node_classification";
    }
    fail("bad task");
}

Aggregate aggregate_from_string(const std::string& s) {
    if (s == "sum") return Aggregate::Sum;
    if (s == "mean") return Aggregate::Mean;
    if (s == "max") return Aggregate::Max;
    fail("unknown aggregate: ", s);
}

std::string to_string(Aggregate a) {
    switch (a) {
        case Aggregate::Sum: return "sum";
        case Aggregate::Mean: return "mean";
        case Aggregate::Max: return "max";
    }
    fail("bad aggregate");
}

void SeaConfig::validate() const {
    require(num_experts >= 1, "config: num_experts must be >= 1");
    require(khop >= 1, "config: khop must be >= 1");
    require(lpe_dim >= 1, "config: lpe_dim must be >= 1");
    require(epsilon0 >= 0.0 && epsilon0 <= 1.0, "config: epsilon0 out of [0,1]");
    require(epsilon_decay >= 0.0 && epsilon_decay <= 1.0,
            "config: epsilon_decay out of [0,1]");
    require(epsilon_floor >= 0.0 && epsilon_floor <= 1.0,
            "config: epsilon_floor out of [0,1]");
    layer_config().validate(strict_pairing);
}

double SeaConfig::epsilon_at(int epoch) const {
    return std::max(epsilon_floor,
                    epsilon0 * std::pow(epsilon_decay, static_cast<double>(epoch)));
}

LayerConfig SeaConfig::layer_config() const {
    LayerConfig lc;
    lc.num_heads = num_heads;
    lc.model_dim = model_dim;
    lc.use_edge_features = use_edge_features;
    lc.use_bias = use_bias;
    lc.include_self = include_self;
    lc.residual = residual;
    return lc;
}

static ReadoutKind readout_from_string(const std::string& s) {
    if (s == "sum") return ReadoutKind::Sum;
    if (s == "mean") return ReadoutKind::Mean;
    if (s == "max") return ReadoutKind::Max;
    fail("unknown readout: ", s);
}

static std::string to_string(ReadoutKind r) {
    switch (r) {
        case ReadoutKind::Sum: return "sum";
        case ReadoutKind::Mean: return "mean";
        case ReadoutKind::Max: return "max";
    }
    fail("bad readout");
}

std::string SeaConfig::to_json() const {
    json j;
    j["variant"] = sea::to_string(variant);
    j["num_experts"] = num_experts;
    j["khop"] = khop;
    j["augmented"] = augmented;
    j["aggregate"] = sea::to_string(aggregate);
    j["aggregate_mu"] = sea::to_string(aggregate_mu);
    j["task"] = sea::to_string(task);
    j["num_heads"] = num_heads;
    j["model_dim"] = model_dim;
    j["use_edge_features"] = use_edge_features;
    j["use_bias"] = use_bias;
    j["include_self"] = include_self;
    j["residual"] = residual;
    j["strict_pairing"] = strict_pairing;
    j["lpe_dim"] = lpe_dim;
    j["lpe_skip_trivial"] = lpe_skip_trivial;
    j["epsilon0"] = epsilon0;
    j["epsilon_decay"] = epsilon_decay;
    j["epsilon_floor"] = epsilon_floor;
    j["readout"] = to_string(readout);
    return j.dump();
}

SeaConfig SeaConfig::from_json(const std::string& text) {
    json j = json::parse(text);
    SeaConfig c;
    if (j.contains("variant")) c.variant = variant_from_string(j["variant"]);
    if (j.contains("num_experts")) c.num_experts = j["num_experts"];
    if (j.contains("khop")) c.khop = j["khop"];
    if (j.contains("augmented")) c.augmented = j["augmented"];
    if (j.contains("aggregate")) c.aggregate = aggregate_from_string(j["aggregate"]);
    if (j.contains("aggregate_mu"))
        c.aggregate_mu = aggregate_from_string(j["aggregate_mu"]);
    if (j.contains("task")) c.task = task_from_string(j["task"]);
    if (j.contains("num_heads")) c.num_heads = j["num_heads"];
    if (j.contains("model_dim")) c.model_dim = j["model_dim"];
    if (j.contains("use_edge_features")) c.use_edge_features = j["use_edge_features"];
    if (j.contains("use_bias")) c.use_bias = j["use_bias"];
    if (j.contains("include_self")) c.include_self = j["include_self"];
    if (j.contains("residual")) c.residual = j["residual"];
    if (j.contains("strict_pairing")) c.strict_pairing = j["strict_pairing"];
    if (j.contains("lpe_dim")) c.lpe_dim = j["lpe_dim"];
    if (j.contains("lpe_skip_trivial")) c.lpe_skip_trivial = j["lpe_skip_trivial"];
    if (j.contains("epsilon0")) c.epsilon0 = j["epsilon0"];
    if (j.contains("epsilon_decay")) c.epsilon_decay = j["epsilon_decay"];
    if (j.contains("epsilon_floor")) c.epsilon_floor = j["epsilon_floor"];
    if (j.contains("readout")) c.readout = readout_from_string(j["readout"]);
    c.validate();
    return c;
}

int DataSchema::output_dim() const {
    return num_classes > 0 ? num_classes : 1;
}

std::string DataSchema::to_json() const {
    json j;
    j["node_kind"] = node_kind == NodeFeatureKind::Token ? "token" : "dense";
    j["node_vocab"] = node_vocab;
    j["node_dense_dim"] = node_dense_dim;
    j["edge_kind"] = edge_kind == EdgeFeatureKind::None
                         ? "none"
                         : (edge_kind == EdgeFeatureKind::Token ? "token" : "dense");
    j["edge_vocab"] = edge_vocab;
    j["edge_dense_dim"] = edge_dense_dim;
    j["num_classes"] = num_classes;
    return j.dump();
}

DataSchema DataSchema::from_json(const std::string& text) {
    json j = json::parse(text);
    DataSchema s;
    std::string nk = j.value("node_kind", "token");
    s.node_kind = nk == "dense" ? NodeFeatureKind::Dense : NodeFeatureKind::Token;
    s.node_vocab = j.value("node_vocab", 0);
    s.node_dense_dim = j.value("node_dense_dim", 0);
    std::string ek = j.value("edge_kind", "none");
    s.edge_kind = ek == "none" ? EdgeFeatureKind::None
                               : (ek == "token" ? EdgeFeatureKind::Token
                                                : EdgeFeatureKind::Dense);
    s.edge_vocab = j.value("edge_vocab", 0);
    s.edge_dense_dim = j.value("edge_dense_dim", 0);
    s.num_classes = j.value("num_classes", 0);
    return s;
}

namespace {

// Stable per-parameter init seeds derived from the model seed and name.
std::uint64_t param_seed(std::uint64_t model_seed, const std::string& name) {
    std::uint64_t h = splitmix64(model_seed);
    for (char c : name) h = splitmix64(h ^ static_cast<std::uint64_t>(c));
    return h;
}

int add_glorot(SeaModel& m, std::uint64_t seed, const std::string& name,
               std::size_t fan_in, std::size_t fan_out) {
    return m.params.add(name, glorot_init(fan_in, fan_out, param_seed(seed, name)));
}

int add_zeros(SeaModel& m, const std::string& name, std::size_t cols) {
    return m.params.add(name, Tensor::zeros(1, cols));
}

GtlHeadParams build_head(SeaModel& m, std::uint64_t seed,
                         const std::string& prefix, const SeaConfig& cfg) {
    const std::size_t d = cfg.model_dim;
    const std::size_t dk = cfg.layer_config().head_dim();
    GtlHeadParams hp;
    hp.q = add_glorot(m, seed, prefix + ".q", d, dk);
    hp.k = add_glorot(m, seed, prefix + ".k", d, dk);
    hp.v = add_glorot(m, seed, prefix + ".v", d, dk);
    if (cfg.use_bias) {
        hp.qb = add_zeros(m, prefix + ".qb", dk);
        hp.kb = add_zeros(m, prefix + ".kb", dk);
        hp.vb = add_zeros(m, prefix + ".vb", dk);
    }
    if (cfg.use_edge_features) {
        hp.e = add_glorot(m, seed, prefix + ".e", d, dk);
        if (cfg.use_bias) hp.eb = add_zeros(m, prefix + ".eb", dk);
    }
    return hp;
}

GtlLayerParams build_layer(SeaModel& m, std::uint64_t seed, int layer_no,
                           const SeaConfig& cfg,
                           const std::vector<int>& rings) {
    const std::size_t d = cfg.model_dim;
    const std::string base = "gtl." + std::to_string(layer_no);
    GtlLayerParams lp;
    lp.per_ring = rings.size() > 1 || (rings.size() == 1 && rings[0] != 1);
    if (!cfg.augmented) lp.per_ring = false;

    if (lp.per_ring) {
        for (int r : rings) {
            std::vector<GtlHeadParams> heads;
            for (int h = 0; h < cfg.num_heads; ++h)
                heads.push_back(build_head(
                    m, seed, base + ".ring" + std::to_string(r) + ".h" +
                                 std::to_string(h),
                    cfg));
            lp.ring_heads.push_back(std::move(heads));
        }
    } else {
        std::vector<GtlHeadParams> heads;
        for (int h = 0; h < cfg.num_heads; ++h)
            heads.push_back(build_head(m, seed, base + ".h" + std::to_string(h), cfg));
        lp.ring_heads.push_back(std::move(heads));
    }

    lp.oh = add_glorot(m, seed, base + ".oh", d, d);
    if (cfg.use_bias) lp.ohb = add_zeros(m, base + ".ohb", d);
    lp.ffn_w1 = add_glorot(m, seed, base + ".ffn.w1", d, 2 * d);
    lp.ffn_w2 = add_glorot(m, seed, base + ".ffn.w2", 2 * d, d);
    if (cfg.use_bias) {
        lp.ffn_b1 = add_zeros(m, base + ".ffn.b1", 2 * d);
        lp.ffn_b2 = add_zeros(m, base + ".ffn.b2", d);
    }
    if (cfg.use_edge_features) {
        lp.oe = add_glorot(m, seed, base + ".oe", d, d);
        if (cfg.use_bias) lp.oeb = add_zeros(m, base + ".oeb", d);
        lp.effn_w1 = add_glorot(m, seed, base + ".effn.w1", d, 2 * d);
        lp.effn_w2 = add_glorot(m, seed, base + ".effn.w2", 2 * d, d);
        if (cfg.use_bias) {
            lp.effn_b1 = add_zeros(m, base + ".effn.b1", 2 * d);
            lp.effn_b2 = add_zeros(m, base + ".effn.b2", d);
        }
    }
    return lp;
}

}  // namespace

SeaModel SeaModel::build(const SeaConfig& cfg, const DataSchema& schema,
                         std::uint64_t seed) {
    cfg.validate();
    SeaModel m;
    m.cfg = cfg;
    m.schema = schema;
    const std::size_t d = cfg.model_dim;

    if (schema.node_kind == NodeFeatureKind::Token) {
        require(schema.node_vocab >= 1, "model: node vocabulary missing");
        m.node_embed = add_glorot(m, seed, "embed.node", schema.node_vocab, d);
    } else {
        require(schema.node_dense_dim >= 1, "model: node feature dim missing");
        m.node_embed = add_glorot(m, seed, "embed.node_proj",
                                  schema.node_dense_dim, d);
    }
    m.lpe_proj = add_glorot(m, seed, "embed.lpe", cfg.lpe_dim, d);

    if (cfg.use_edge_features) {
        require(schema.edge_kind != EdgeFeatureKind::None,
                "model: use_edge_features requires edge features in the data");
        if (schema.edge_kind == EdgeFeatureKind::Token) {
            require(schema.edge_vocab >= 1, "model: edge vocabulary missing");
            m.edge_embed = add_glorot(m, seed, "embed.edge", schema.edge_vocab, d);
        } else if (schema.edge_kind == EdgeFeatureKind::Dense) {
            m.edge_embed = add_glorot(m, seed, "embed.edge_proj",
                                      schema.edge_dense_dim, d);
        }
        // Virtual pairs (self ring and hop distance >= 2) have no input edge;
        // each such ring gets a learned edge state.
        std::vector<int> virtual_rings;
        if (cfg.include_self) virtual_rings.push_back(0);
        if (cfg.variant == Variant::SeaKhop)
            for (int r = 2; r <= cfg.khop; ++r) virtual_rings.push_back(r);
        m.ring_edge_embed.assign(virtual_rings.empty()
                                     ? 0
                                     : virtual_rings.back() + 1,
                                 -1);
        for (int r : virtual_rings)
            m.ring_edge_embed[r] = add_glorot(m, seed,
                                              "embed.ring_edge." + std::to_string(r),
                                              1, d);
    }

    std::vector<int> rings = {1};
    if (cfg.variant == Variant::SeaKhop) {
        rings.clear();
        if (cfg.include_self) rings.push_back(0);
        for (int r = 1; r <= cfg.khop; ++r) rings.push_back(r);
    } else if (cfg.include_self) {
        rings.insert(rings.begin(), 0);
    }

    const int trunk_layers =
        cfg.variant == Variant::SeaAggregated ? 1 : cfg.num_experts;
    for (int l = 0; l < trunk_layers; ++l)
        m.layers.push_back(build_layer(m, seed, l, cfg, rings));

    m.router_w = add_glorot(m, seed, "router.w", d, cfg.num_experts);
    for (int i = 0; i < cfg.num_experts; ++i) {
        ExpertParams ep;
        ep.w = add_glorot(m, seed, "expert." + std::to_string(i) + ".w", d, d);
        ep.b = add_zeros(m, "expert." + std::to_string(i) + ".b", d);
        m.experts.push_back(ep);
    }

    m.head_w = add_glorot(m, seed, "head.w", d, schema.output_dim());
    m.head_b = add_zeros(m, "head.b", schema.output_dim());
    return m;
}

RoutingDecision route(const Tensor& h0, const Tensor& router_w, double epsilon,
                      std::uint64_t seed, const std::vector<int>& graph_id,
                      const std::vector<int>& local_index) {
    require(epsilon >= 0.0 && epsilon <= 1.0, "route: epsilon out of [0,1]");
    const std::size_t n = h0.rows();
    const std::size_t experts = router_w.cols();
    require(graph_id.size() == n && local_index.size() == n,
            "route: key arrays must match node count");

    // Plain value computation; routing is a discrete choice, no gradient path.
    Tensor logits({n, experts});
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t j = 0; j < experts; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < h0.cols(); ++k)
                s += h0.at(u, k) * router_w.at(k, j);
            logits.at(u, j) = s;
        }

    RoutingDecision rd;
    rd.probs = Tensor({n, experts});
    rd.expert.resize(n);
    rd.explored.assign(n, 0);
    for (std::size_t u = 0; u < n; ++u) {
        double mx = logits.at(u, 0);
        for (std::size_t j = 1; j < experts; ++j) mx = std::max(mx, logits.at(u, j));
        double z = 0.0;
        for (std::size_t j = 0; j < experts; ++j) {
            rd.probs.at(u, j) = std::exp(logits.at(u, j) - mx);
            z += rd.probs.at(u, j);
        }
        int best = 0;
        for (std::size_t j = 0; j < experts; ++j) {
            rd.probs.at(u, j) /= z;
            if (rd.probs.at(u, j) > rd.probs.at(u, best))
                best = static_cast<int>(j);
        }
        const double explore_draw =
            counter_u01(seed, graph_id[u], local_index[u], 0);
        if (explore_draw < epsilon) {
            const double pick = counter_u01(seed, graph_id[u], local_index[u], 1);
            rd.expert[u] = static_cast<int>(
                std::min<std::size_t>(experts - 1,
                                      static_cast<std::size_t>(pick * experts)));
            rd.explored[u] = 1;
        } else {
            rd.expert[u] = best;
        }
    }
    return rd;
}

Tensor expert_transform(const Tensor& expert_output, const Tensor& w,
                        const Tensor& b) {
    return add_rowvec(matmul(expert_output, w), b);
}

BatchInputs make_batch_inputs(const std::vector<const Graph*>& graphs,
                              const std::vector<const KHopIndex*>& khop,
                              const std::vector<const Tensor*>& lpe_tables,
                              const SeaConfig& cfg,
                              const std::vector<int>& graph_keys) {
    require(graph_keys.empty() || graph_keys.size() == graphs.size(),
            "inputs: graph key count mismatch");
    BatchInputs in;
    in.batch = batch(graphs);
    const int n = in.batch.merged.num_nodes();

    require(lpe_tables.size() == graphs.size(), "inputs: LPE table count mismatch");
    in.lpe = Tensor({static_cast<std::size_t>(n),
                     static_cast<std::size_t>(cfg.lpe_dim)});
    int row = 0;
    for (const Tensor* t : lpe_tables) {
        require(static_cast<int>(t->cols()) == cfg.lpe_dim,
                "inputs: LPE dim mismatch");
        for (std::size_t i = 0; i < t->rows(); ++i, ++row)
            for (std::size_t j = 0; j < t->cols(); ++j)
                in.lpe.at(row, j) = t->at(i, j);
    }

    if (cfg.variant == Variant::SeaKhop)
        in.support = build_support(in.batch, khop, cfg.khop, cfg.include_self);
    else
        in.support = build_support(in.batch, cfg.include_self);

    in.local_index.resize(n);
    in.graph_key.resize(n);
    for (int u = 0; u < n; ++u) {
        in.local_index[u] = in.batch.local_index(u);
        const int gi = in.batch.graph_id[u];
        in.graph_key[u] = graph_keys.empty() ? gi : graph_keys[gi];
    }
    return in;
}

namespace {

Tensor embed_nodes(const SeaModel& m, const std::vector<Tensor>& P,
                   const GraphBatch& b) {
    if (m.schema.node_kind == NodeFeatureKind::Token) {
        require(b.merged.node_feature_kind() == NodeFeatureKind::Token,
                "model: expected token node features");
        std::vector<int> idx;
        idx.reserve(b.merged.num_nodes());
        for (auto t : b.merged.node_tokens()) {
            require(t < m.schema.node_vocab, "model: node token ", t,
                    " outside vocabulary of ", m.schema.node_vocab);
            idx.push_back(static_cast<int>(t));
        }
        return gather_rows(P[m.node_embed], idx);
    }
    require(b.merged.node_feature_kind() == NodeFeatureKind::Dense,
            "model: expected dense node features");
    Tensor x({static_cast<std::size_t>(b.merged.num_nodes()),
              static_cast<std::size_t>(m.schema.node_dense_dim)},
             b.merged.node_dense());
    return matmul(x, P[m.node_embed]);
}

// Initial per-pair edge states: embedded input features on real edges,
// learned per-ring rows on virtual pairs.
Tensor embed_edges(const SeaModel& m, const std::vector<Tensor>& P,
                   const GraphBatch& b, const Support& s) {
    const std::size_t pairs = s.num_pairs();
    const std::size_t d = m.cfg.model_dim;

    std::vector<int> real_pos;
    std::vector<int> real_edge;
    for (std::size_t p = 0; p < pairs; ++p) {
        if (s.edge_id[p] >= 0) {
            real_pos.push_back(static_cast<int>(p));
            real_edge.push_back(s.edge_id[p]);
        }
    }

    Tensor e0 = Tensor::zeros(pairs, d);
    bool tracked_any = false;
    if (!real_pos.empty()) {
        Tensor per_edge;
        if (m.schema.edge_kind == EdgeFeatureKind::Token) {
            std::vector<int> idx;
            for (int eid : real_edge) {
                auto t = b.merged.edge_tokens()[eid];
                require(t < m.schema.edge_vocab, "model: edge token ", t,
                        " outside vocabulary");
                idx.push_back(static_cast<int>(t));
            }
            per_edge = gather_rows(P[m.edge_embed], idx);
        } else if (m.schema.edge_kind == EdgeFeatureKind::Dense) {
            Tensor x({real_edge.size(),
                      static_cast<std::size_t>(m.schema.edge_dense_dim)});
            for (std::size_t i = 0; i < real_edge.size(); ++i)
                for (int j = 0; j < m.schema.edge_dense_dim; ++j)
                    x.at(i, j) =
                        b.merged.edge_dense()[real_edge[i] *
                                                  m.schema.edge_dense_dim +
                                              j];
            per_edge = matmul(x, P[m.edge_embed]);
        } else {
            // No input edge features: real edges share the ring-1 learned row
            // if present, else zeros.
            per_edge = Tensor::zeros(real_edge.size(), d);
        }
        e0 = add(e0, scatter_add_rows(per_edge, real_pos, pairs));
        tracked_any = per_edge.node() >= 0;
    }

    for (int r : s.rings_present) {
        if (r == 1 && m.schema.edge_kind != EdgeFeatureKind::None) continue;
        int embed_id = -1;
        if (r < static_cast<int>(m.ring_edge_embed.size()))
            embed_id = m.ring_edge_embed[r];
        if (r == 1 && embed_id < 0) continue;  // zeros already in place
        if (embed_id < 0) continue;
        std::vector<int> pos;
        for (std::size_t p = 0; p < pairs; ++p)
            if (s.ring[p] == r && (r != 1 || s.edge_id[p] < 0))
                pos.push_back(static_cast<int>(p));
        if (pos.empty()) continue;
        Tensor ones({pos.size(), 1});
        for (double& x : ones.values()) x = 1.0;
        Tensor rows = matmul(ones, P[embed_id]);  // broadcast the learned row
        e0 = add(e0, scatter_add_rows(rows, pos, pairs));
        tracked_any = true;
    }
    (void)tracked_any;
    return e0;
}

Tensor aggregate_neighbors(const Tensor& h, const Support& s, Aggregate kind) {
    // Pairs restricted to hop distance 1; empty neighborhoods give zero rows.
    std::vector<int> src, dst;
    for (std::size_t p = 0; p < s.num_pairs(); ++p) {
        if (s.ring[p] == 1) {
            src.push_back(s.src[p]);
            dst.push_back(s.dst[p]);
        }
    }
    const std::size_t n = h.rows();
    Tensor gathered = gather_rows(h, dst);
    switch (kind) {
        case Aggregate::Sum:
            return scatter_add_rows(gathered, src, n);
        case Aggregate::Mean: {
            Tensor sums = scatter_add_rows(gathered, src, n);
            std::vector<int> counts(n, 0);
            for (int u : src) ++counts[u];
            Tensor inv({n, 1});
            for (std::size_t u = 0; u < n; ++u)
                inv.at(u, 0) = counts[u] > 0 ? 1.0 / counts[u] : 0.0;
            return scale_rows(sums, inv);
        }
        case Aggregate::Max:
            return scatter_max_rows(gathered, src, n);
    }
    fail("aggregate: unknown kind");
}

}  // namespace

Tensor aggregated_step(const Tensor& h, const Support& support,
                       Aggregate aggregate, Aggregate aggregate_mu) {
    Tensor msg = aggregate_neighbors(h, support, aggregate);
    return aggregate_neighbors(msg, support, aggregate_mu);
}

std::vector<Tensor> sea_gnn_expert_states(const std::vector<Tensor>& params,
                                          const SeaModel& m, const Tensor& h0,
                                          const std::optional<Tensor>& e0,
                                          const Support& support,
                                          DropoutCtx* dropout) {
    std::vector<Tensor> taps;
    Tensor h = h0;
    std::optional<Tensor> e = e0;
    const LayerConfig lc = m.cfg.layer_config();
    for (int l = 0; l < m.cfg.num_experts; ++l) {
        GtlOutput out = gtl_forward(params, h, e, support, m.layers[l], lc, dropout);
        h = out.h;
        if (out.e.has_value()) e = out.e;
        taps.push_back(h);
    }
    return taps;
}

std::vector<Tensor> sea_aggregated_expert_states(
    const std::vector<Tensor>& params, const SeaModel& m, const Tensor& h0,
    const std::optional<Tensor>& e0, const Support& support,
    DropoutCtx* dropout) {
    std::vector<Tensor> taps;
    const LayerConfig lc = m.cfg.layer_config();
    GtlOutput first = gtl_forward(params, h0, e0, support, m.layers[0], lc, dropout);
    Tensor h = first.h;
    taps.push_back(h);
    // Later experts combine broadcast neighborhood aggregates: each node forms
    // the aggregate of its neighbors' states and sends it to its neighbors,
    // which combine what they receive.
    for (int l = 1; l < m.cfg.num_experts; ++l) {
        h = aggregated_step(h, support, m.cfg.aggregate, m.cfg.aggregate_mu);
        taps.push_back(h);
    }
    return taps;
}

std::vector<Tensor> sea_khop_expert_states(const std::vector<Tensor>& params,
                                           const SeaModel& m, const Tensor& h0,
                                           const std::optional<Tensor>& e0,
                                           const Support& support,
                                           DropoutCtx* dropout) {
    return sea_gnn_expert_states(params, m, h0, e0, support, dropout);
}

ForwardResult model_forward(const SeaModel& m, const std::vector<Tensor>& params,
                            const BatchInputs& in, double epsilon,
                            std::uint64_t seed, DropoutCtx* dropout) {
    require(params.size() == m.params.size(), "model: parameter list size ",
            params.size(), " != ", m.params.size());
    const GraphBatch& b = in.batch;
    const std::size_t n = b.merged.num_nodes();

    Tensor h0 = add(embed_nodes(m, params, b), matmul(in.lpe, params[m.lpe_proj]));

    std::optional<Tensor> e0;
    if (m.cfg.use_edge_features)
        e0 = embed_edges(m, params, b, in.support);

    ForwardResult res;
    res.routing = route(h0.detach(), params[m.router_w].detach(), epsilon, seed,
                        in.graph_key, in.local_index);

    switch (m.cfg.variant) {
        case Variant::SeaGnn:
            res.expert_states =
                sea_gnn_expert_states(params, m, h0, e0, in.support, dropout);
            break;
        case Variant::SeaAggregated:
            res.expert_states = sea_aggregated_expert_states(params, m, h0, e0,
                                                             in.support, dropout);
            break;
        case Variant::SeaKhop:
            res.expert_states =
                sea_khop_expert_states(params, m, h0, e0, in.support, dropout);
            break;
    }

    // Each node takes its routed expert's state through that expert's affine
    // head; gradients flow only into chosen experts.
    Tensor selected = Tensor::zeros(n, m.cfg.model_dim);
    for (int i = 0; i < m.cfg.num_experts; ++i) {
        std::vector<int> nodes;
        for (std::size_t u = 0; u < n; ++u)
            if (res.routing.expert[u] == i) nodes.push_back(static_cast<int>(u));
        if (nodes.empty()) continue;
        Tensor rows = gather_rows(res.expert_states[i], nodes);
        Tensor transformed =
            expert_transform(rows, params[m.experts[i].w], params[m.experts[i].b]);
        selected = add(selected, scatter_add_rows(transformed, nodes, n));
    }

    if (m.cfg.task == Task::NodeClassification) {
        res.predictions = add_rowvec(matmul(selected, params[m.head_w]),
                                     params[m.head_b]);
    } else {
        Tensor pooled = readout(selected, b.graph_id, b.num_graphs, m.cfg.readout);
        res.predictions = add_rowvec(matmul(pooled, params[m.head_w]),
                                     params[m.head_b]);
    }
    return res;
}

}  // namespace sea
