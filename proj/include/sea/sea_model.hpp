#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sea/gtl.hpp"
#include "sea/graph.hpp"
#include "sea/params.hpp"
#include "sea/tensor.hpp"

namespace sea {

enum class Variant { SeaGnn, SeaAggregated, SeaKhop };
enum class Task { GraphRegression, GraphBinary, NodeClassification };
enum class Aggregate { Sum, Mean, Max };

Variant variant_from_string(const std::string& s);
std::string to_string(Variant v);
Task task_from_string(const std::string& s);
std::string to_string(Task t);
Aggregate aggregate_from_string(const std::string& s);
std::string to_string(Aggregate a);

struct SeaConfig {
    Variant variant = Variant::SeaGnn;
    int num_experts = 4;
    int khop = 2;             // SEA-K-HOP only
    bool augmented = false;   // per-ring Q/K/V projections
    Aggregate aggregate = Aggregate::Sum;
    Aggregate aggregate_mu = Aggregate::Mean;
    Task task = Task::GraphRegression;

    int num_heads = 4;
    int model_dim = 32;
    bool use_edge_features = false;
    bool use_bias = false;
    bool include_self = false;
    bool residual = true;
    bool strict_pairing = false;

    int lpe_dim = 8;
    bool lpe_skip_trivial = false;

    double epsilon0 = 0.5;
    double epsilon_decay = 0.9;
    double epsilon_floor = 0.0;

    ReadoutKind readout = ReadoutKind::Sum;

    void validate() const;
    double epsilon_at(int epoch) const;

    std::string to_json() const;
    static SeaConfig from_json(const std::string& json_text);

    LayerConfig layer_config() const;
};

// What the model needs to know about the data it embeds.
struct DataSchema {
    NodeFeatureKind node_kind = NodeFeatureKind::Token;
    int node_vocab = 0;      // token mode
    int node_dense_dim = 0;  // dense mode
    EdgeFeatureKind edge_kind = EdgeFeatureKind::None;
    int edge_vocab = 0;
    int edge_dense_dim = 0;
    int num_classes = 0;  // node classification
    int output_dim() const;

    std::string to_json() const;
    static DataSchema from_json(const std::string& json_text);
};

struct ExpertParams {
    int w = -1;
    int b = -1;
};

// Parameter container plus the role indices the forward pass addresses.
struct SeaModel {
    SeaConfig cfg;
    DataSchema schema;
    ParamStore params;

    int node_embed = -1;  // token table or dense input projection
    int lpe_proj = -1;
    int edge_embed = -1;                 // edge token table / dense projection
    std::vector<int> ring_edge_embed;    // learned edge states for virtual rings
    std::vector<GtlLayerParams> layers;  // trunk (SeaAggregated: first layer only)
    int router_w = -1;
    std::vector<ExpertParams> experts;
    int head_w = -1, head_b = -1;

    static SeaModel build(const SeaConfig& cfg, const DataSchema& schema,
                          std::uint64_t seed);
};

// Per node: selection probabilities, chosen expert, whether the epsilon
// branch fired.
struct RoutingDecision {
    Tensor probs;  // (n, num_experts)
    std::vector<int> expert;
    std::vector<std::uint8_t> explored;
};

// Softmax routing over h^0 with seeded per-node epsilon exploration. The
// draw for a node is keyed by (seed, graph index, local node index) so it is
// independent of batch composition and evaluation order.
RoutingDecision route(const Tensor& h0, const Tensor& router_w, double epsilon,
                      std::uint64_t seed, const std::vector<int>& graph_id,
                      const std::vector<int>& local_index);

// Expert's affine map h W + b applied to the rows routed to it.
Tensor expert_transform(const Tensor& expert_output, const Tensor& w,
                        const Tensor& b);

// Precomputed per-batch inputs: merged graph, positional encodings, support.
// graph_key carries a stable per-node graph identifier (the dataset-level
// graph index when built through a Dataset) so per-node exploration draws do
// not depend on batch composition.
struct BatchInputs {
    GraphBatch batch;
    Tensor lpe;  // (n, lpe_dim)
    Support support;
    std::vector<int> local_index;  // per merged node
    std::vector<int> graph_key;    // per merged node
};

BatchInputs make_batch_inputs(const std::vector<const Graph*>& graphs,
                              const std::vector<const KHopIndex*>& khop,
                              const std::vector<const Tensor*>& lpe_tables,
                              const SeaConfig& cfg,
                              const std::vector<int>& graph_keys = {});

// One SEA-aggregated propagation step: every node forms the aggregate of its
// neighbors' states and broadcasts it; receivers combine what arrives with
// aggregate_mu. Nodes without neighbors get zero vectors.
Tensor aggregated_step(const Tensor& h, const Support& support,
                       Aggregate aggregate, Aggregate aggregate_mu);

// Expert state tables (one per expert, each (n, d)).
std::vector<Tensor> sea_gnn_expert_states(const std::vector<Tensor>& params,
                                          const SeaModel& m, const Tensor& h0,
                                          const std::optional<Tensor>& e0,
                                          const Support& support,
                                          DropoutCtx* dropout = nullptr);
std::vector<Tensor> sea_aggregated_expert_states(
    const std::vector<Tensor>& params, const SeaModel& m, const Tensor& h0,
    const std::optional<Tensor>& e0, const Support& support,
    DropoutCtx* dropout = nullptr);
std::vector<Tensor> sea_khop_expert_states(const std::vector<Tensor>& params,
                                           const SeaModel& m, const Tensor& h0,
                                           const std::optional<Tensor>& e0,
                                           const Support& support,
                                           DropoutCtx* dropout = nullptr);

struct ForwardResult {
    Tensor predictions;  // (num_graphs, 1) for graph tasks, (n, C) for node tasks
    RoutingDecision routing;
    std::vector<Tensor> expert_states;  // trunk taps, for diagnostics
};

// Full model forward: embed + LPE, route, expert states per variant, routed
// expert transform, task head.
ForwardResult model_forward(const SeaModel& m, const std::vector<Tensor>& params,
                            const BatchInputs& in, double epsilon,
                            std::uint64_t seed, DropoutCtx* dropout = nullptr);

}  // namespace sea
