// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Expensive experiments come last.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <queue>
#include <string>
#include <vector>

#include "sea/error.hpp"
#include "sea/gradcheck_suite.hpp"
#include "sea/graph.hpp"
#include "sea/metrics.hpp"
#include "sea/optim.hpp"
#include "sea/rng.hpp"
#include "sea/sea_model.hpp"
#include "sea/spectral.hpp"
#include "sea/train.hpp"

using namespace sea;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const auto t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

int g_failures = 0;

void report(int id, const std::string& name, const Outcome& o, double secs) {
    std::printf("[%s] criterion %2d: %s (%s; %.1fs)\n", o.pass ? "PASS" : "FAIL",
                id, name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++g_failures;
}

template <typename Fn>
void run(int id, const std::string& name, Fn fn) {
    const double start = now_seconds();
    Outcome o;
    try {
        o = fn();
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    report(id, name, o, now_seconds() - start);
}

Graph random_graph(Rng& rng, int n, double p, bool no_isolated = false) {
    Graph::Builder b;
    b.num_nodes = n;
    std::vector<char> covered(n, 0);
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (rng.u01() < p) {
                b.edges.emplace_back(u, v);
                covered[u] = covered[v] = 1;
            }
    if (no_isolated && n > 1) {
        for (int u = 0; u < n; ++u)
            if (!covered[u]) {
                int v = static_cast<int>(rng.bounded(n - 1));
                if (v >= u) ++v;
                b.edges.emplace_back(std::min(u, v), std::max(u, v));
                covered[v] = 1;
            }
        std::sort(b.edges.begin(), b.edges.end());
        b.edges.erase(std::unique(b.edges.begin(), b.edges.end()),
                      b.edges.end());
    }
    return b.build();
}

Graph add_dense_features(const Graph& g, Rng& rng, int d_in, double y) {
    Graph::Builder b;
    b.num_nodes = g.num_nodes();
    b.edges = g.edges();
    b.node_dense_dim = d_in;
    for (int i = 0; i < g.num_nodes() * d_in; ++i)
        b.node_dense.push_back(rng.u01() * 2 - 1);
    b.y_graph = y;
    return b.build();
}

std::vector<std::vector<int>> bfs_distances(const Graph& g) {
    const int n = g.num_nodes();
    std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
    for (int s = 0; s < n; ++s) {
        std::queue<int> q;
        q.push(s);
        dist[s][s] = 0;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : g.neighbors(u))
                if (dist[s][v] < 0) {
                    dist[s][v] = dist[s][u] + 1;
                    q.push(v);
                }
        }
    }
    return dist;
}

// ---- criterion 1 -----------------------------------------------------------

Outcome criterion_gradients() {
    double worst = 0.0;
    std::string worst_name;
    std::size_t checks = 0;
    auto fold = [&](const std::vector<GradCheckCase>& cases) {
        for (const auto& c : cases) {
            ++checks;
            if (c.error > worst) {
                worst = c.error;
                worst_name = c.name;
            }
        }
    };
    fold(gradcheck_tensor_ops(7, 2));
    fold(gradcheck_gtl(11, 4));
    fold(gradcheck_model(13, 5));  // 5 instances x 4 variants = 20 models
    Outcome o;
    o.pass = worst <= 1e-4 && checks >= 20;
    o.detail = msg(checks, " checks, max rel err ", worst, " at ",
                   worst_name.empty() ? "-" : worst_name);
    return o;
}

// ---- criterion 2 -----------------------------------------------------------

Outcome criterion_khop1_equals_gnn() {
    Rng rng(202);
    int trials = 0;
    for (int trial = 0; trial < 50; ++trial) {
        SeaConfig cg;
        cg.variant = Variant::SeaGnn;
        cg.num_experts = 2 + static_cast<int>(rng.bounded(2));
        cg.num_heads = 2;
        cg.model_dim = 8;
        cg.lpe_dim = 4;
        SeaConfig ck = cg;
        ck.variant = Variant::SeaKhop;
        ck.khop = 1;

        DataSchema schema;
        schema.node_kind = NodeFeatureKind::Dense;
        schema.node_dense_dim = 3;
        const std::uint64_t seed = rng.next();
        SeaModel mg = SeaModel::build(cg, schema, seed);
        SeaModel mk = SeaModel::build(ck, schema, seed);

        const int n = 4 + static_cast<int>(rng.bounded(9));
        Graph g = add_dense_features(random_graph(rng, n, 0.35), rng, 3, 0.5);
        Dataset dg = prepare_dataset({g}, cg);
        Dataset dk = prepare_dataset({g}, ck);
        ForwardResult rg = model_forward(mg, mg.params.values(),
                                         batch_inputs_for(dg, {0}, cg), 0.0, 7);
        ForwardResult rk = model_forward(mk, mk.params.values(),
                                         batch_inputs_for(dk, {0}, ck), 0.0, 7);
        if (rg.predictions.values() != rk.predictions.values())
            return {false, msg("prediction mismatch at trial ", trial)};
        if (rg.routing.expert != rk.routing.expert)
            return {false, msg("routing mismatch at trial ", trial)};
        for (std::size_t i = 0; i < rg.expert_states.size(); ++i)
            if (rg.expert_states[i].values() != rk.expert_states[i].values())
                return {false, msg("state mismatch at trial ", trial)};
        ++trials;
    }
    return {true, msg(trials, " graphs/seeds bit-identical")};
}

// ---- criterion 3 -----------------------------------------------------------

Outcome criterion_khop_oracle() {
    Rng rng(303);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.bounded(49));
        Graph g = random_graph(rng, n, 0.12);
        const int k = 1 + static_cast<int>(rng.bounded(4));
        KHopIndex idx = khop_index(g, k);
        auto dist = bfs_distances(g);
        for (int u = 0; u < n; ++u) {
            for (int r = 0; r <= k; ++r) {
                std::vector<int> expect;
                for (int v = 0; v < n; ++v)
                    if (dist[u][v] == r) expect.push_back(v);
                auto got = idx.ring(u, r);
                if (!std::equal(got.begin(), got.end(), expect.begin(),
                                expect.end()))
                    return {false, msg("ring mismatch trial ", trial, " node ",
                                       u, " r ", r)};
            }
        }
    }
    return {true, "200 graphs vs reachability oracle"};
}

// ---- criterion 4 -----------------------------------------------------------

Outcome criterion_spectral() {
    Rng rng(404);
    double worst_recon = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.bounded(29));
        Graph g = random_graph(rng, n, 0.15, /*no_isolated=*/true);
        Tensor lap = normalized_laplacian(g);
        Spectrum sp = eigendecompose_symmetric(lap);

        for (std::size_t i = 0; i < sp.eigenvalues.size(); ++i) {
            if (sp.eigenvalues[i] < -1e-8 || sp.eigenvalues[i] > 2.0 + 1e-8)
                return {false, msg("eigenvalue out of range: ",
                                   sp.eigenvalues[i])};
            if (i && sp.eigenvalues[i] < sp.eigenvalues[i - 1])
                return {false, "eigenvalues not ascending"};
        }

        const std::size_t nn = lap.rows();
        for (std::size_t i = 0; i < nn; ++i)
            for (std::size_t j = 0; j < nn; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < nn; ++k)
                    s += sp.eigenvectors.at(i, k) * sp.eigenvalues[k] *
                         sp.eigenvectors.at(j, k);
                worst_recon = std::max(worst_recon, std::abs(s - lap.at(i, j)));
            }
        if (worst_recon > 1e-8)
            return {false, msg("reconstruction error ", worst_recon)};

        int zero_mult = 0;
        for (double v : sp.eigenvalues)
            if (std::abs(v) <= 1e-8) ++zero_mult;
        std::vector<char> seen(g.num_nodes(), 0);
        int comps = 0;
        for (int s = 0; s < g.num_nodes(); ++s) {
            if (seen[s]) continue;
            ++comps;
            std::queue<int> q;
            q.push(s);
            seen[s] = 1;
            while (!q.empty()) {
                int u = q.front();
                q.pop();
                for (int v : g.neighbors(u))
                    if (!seen[v]) {
                        seen[v] = 1;
                        q.push(v);
                    }
            }
        }
        if (zero_mult != comps)
            return {false, msg("zero multiplicity ", zero_mult,
                               " != components ", comps)};
    }
    return {true, msg("200 graphs, max reconstruction err ", worst_recon)};
}

// ---- criterion 5 -----------------------------------------------------------

Outcome criterion_receptive_field() {
    Rng rng(505);
    int done = 0;
    while (done < 20) {
        SeaConfig cfg;
        cfg.variant = Variant::SeaGnn;
        cfg.num_experts = 3;
        cfg.num_heads = 2;
        cfg.model_dim = 8;
        cfg.lpe_dim = 4;
        DataSchema schema;
        schema.node_kind = NodeFeatureKind::Dense;
        schema.node_dense_dim = 3;
        SeaModel m = SeaModel::build(cfg, schema, rng.next());

        const int n = 8 + static_cast<int>(rng.bounded(7));
        Graph base = random_graph(rng, n, 0.12);
        auto dist = bfs_distances(base);
        const int expert_i = 1 + static_cast<int>(rng.bounded(3));  // 1..3
        int u = -1, w = -1;
        for (int a = 0; a < n && u < 0; ++a)
            for (int b = 0; b < n; ++b)
                if (dist[a][b] > expert_i || dist[a][b] < 0) {
                    u = a;
                    w = b;
                    break;
                }
        if (u < 0) continue;  // graph too dense for a far pair; redraw

        Graph g1 = add_dense_features(base, rng, 3, 0.0);
        Graph::Builder b2;
        b2.num_nodes = n;
        b2.edges = g1.edges();
        b2.node_dense = g1.node_dense();
        b2.node_dense_dim = 3;
        b2.y_graph = 0.0;
        for (int c = 0; c < 3; ++c)
            b2.node_dense[w * 3 + c] += 0.5 + rng.u01();
        Graph g2 = b2.build();

        Dataset d1 = prepare_dataset({g1}, cfg);
        Dataset d2 = prepare_dataset({g2}, cfg);
        ForwardResult r1 = model_forward(m, m.params.values(),
                                         batch_inputs_for(d1, {0}, cfg), 0.0, 0);
        ForwardResult r2 = model_forward(m, m.params.values(),
                                         batch_inputs_for(d2, {0}, cfg), 0.0, 0);
        const Tensor& s1 = r1.expert_states[expert_i - 1];
        const Tensor& s2 = r2.expert_states[expert_i - 1];
        for (int j = 0; j < cfg.model_dim; ++j)
            if (s1.at(u, j) != s2.at(u, j))
                return {false,
                        msg("expert ", expert_i, " state of node ", u,
                            " changed after perturbing node ", w, " at distance ",
                            dist[u][w])};
        ++done;
    }
    return {true, "20 cases, far perturbations change states by exactly 0"};
}

// ---- criterion 6 -----------------------------------------------------------

Outcome criterion_gradient_isolation() {
    Rng rng(606);
    for (int trial = 0; trial < 10; ++trial) {
        SeaConfig cfg;
        cfg.variant = trial % 2 ? Variant::SeaKhop : Variant::SeaGnn;
        cfg.khop = 2;
        cfg.num_experts = 3 + static_cast<int>(rng.bounded(2));
        cfg.num_heads = 2;
        cfg.model_dim = 8;
        cfg.lpe_dim = 4;
        cfg.task = Task::NodeClassification;
        DataSchema schema;
        schema.node_kind = NodeFeatureKind::Dense;
        schema.node_dense_dim = 3;
        schema.num_classes = 2;
        SeaModel m = SeaModel::build(cfg, schema, rng.next());

        const int n = 6 + static_cast<int>(rng.bounded(3));
        Graph::Builder b;
        b.num_nodes = n;
        Graph base = random_graph(rng, n, 0.4);
        b.edges = base.edges();
        b.node_dense_dim = 3;
        for (int i = 0; i < n * 3; ++i) b.node_dense.push_back(rng.u01());
        b.y_node.assign(n, 0);
        Graph g = b.build();
        Dataset ds = prepare_dataset({g}, cfg);
        BatchInputs in = batch_inputs_for(ds, {0}, cfg);

        Tape tape;
        std::vector<Tensor> tracked;
        for (const Tensor& p : m.params.values()) tracked.push_back(tape.leaf(p));
        ForwardResult fr = model_forward(m, tracked, in, 0.0, 0);

        const int node = static_cast<int>(rng.bounded(n));
        Tensor picked = pick_per_row(fr.predictions, std::vector<int>(n, 1));
        Tensor loss = sum_all(gather_rows(picked, {node}));
        auto grads = tape.backward(loss);

        const int chosen = fr.routing.expert[node];
        for (int e = 0; e < cfg.num_experts; ++e) {
            if (e == chosen) continue;
            for (double v : Tape::grad_of(grads, tracked[m.experts[e].w]).values())
                if (v != 0.0)
                    return {false, msg("expert ", e, " weight grad nonzero")};
            for (double v : Tape::grad_of(grads, tracked[m.experts[e].b]).values())
                if (v != 0.0)
                    return {false, msg("expert ", e, " bias grad nonzero")};
        }
    }
    return {true, "10 cases, unchosen expert heads get exactly zero"};
}

// ---- criterion 7 -----------------------------------------------------------

std::vector<Graph> overfit_graphs() {
    std::vector<Graph> graphs;
    Rng rng(707);
    for (int i = 0; i < 8; ++i) {
        const int n = 8 + static_cast<int>(rng.bounded(4));
        Graph base = random_graph(rng, n, 0.35, /*no_isolated=*/true);
        Graph::Builder b;
        b.num_nodes = n;
        b.edges = base.edges();
        b.node_tokens.resize(n);
        for (int u = 0; u < n; ++u)
            b.node_tokens[u] = static_cast<std::int64_t>(rng.bounded(5));
        b.y_graph = rng.u01();
        graphs.push_back(b.build());
    }
    return graphs;
}

Outcome overfit_variant(Variant variant, bool augmented, std::string* info) {
    SeaConfig cfg;
    cfg.variant = variant;
    cfg.augmented = augmented;
    cfg.khop = 2;
    cfg.num_experts = 4;
    cfg.num_heads = 4;
    cfg.model_dim = 32;
    cfg.lpe_dim = 8;
    cfg.task = Task::GraphRegression;
    cfg.epsilon0 = 0.0;

    Dataset ds = prepare_dataset(overfit_graphs(), cfg);
    DataSchema schema = infer_schema({&ds}, cfg.task);
    SeaModel m = SeaModel::build(cfg, schema, 7);
    TaskSpec spec;
    spec.task = Task::GraphRegression;

    std::vector<int> indices = {0, 1, 2, 3, 4, 5, 6, 7};
    BatchInputs in = batch_inputs_for(ds, indices, cfg);
    Tensor targets({8, 1});
    for (int i = 0; i < 8; ++i) targets.at(i, 0) = ds.graphs[i].y_graph();

    AdamState adam = AdamState::init(m.params.values(), 1e-3);
    double mae_now = 1e9;
    int steps = 0;
    for (; steps < 2000; ++steps) {
        Tape tape;
        std::vector<Tensor> tracked;
        for (const Tensor& p : m.params.values()) tracked.push_back(tape.leaf(p));
        ForwardResult fr = model_forward(m, tracked, in, 0.0, 7);
        Tensor loss = batch_loss(fr.predictions, in, spec, targets);
        mae_now = loss.item();
        if (mae_now < 0.05) break;
        auto grads = tape.backward(loss);
        std::vector<Tensor> glist;
        for (const Tensor& t : tracked) glist.push_back(Tape::grad_of(grads, t));
        adam_step(m.params.values(), glist, adam);
    }
    *info = msg("mae ", mae_now, " after ", steps, " steps");
    return {mae_now < 0.05, *info};
}

// ---- criterion 8 + 11 ------------------------------------------------------

TrainConfig sbm_experiment_config(const std::string& out_dir) {
    TrainConfig cfg;
    SbmConfig sbm;
    sbm.nodes_per_block = 20;
    sbm.num_blocks = 2;
    sbm.p_intra = 0.5;
    sbm.p_inter = 0.05;
    sbm.feature_vocab = 3;
    sbm.seed = 808;
    cfg.sbm = sbm;
    cfg.sbm_train = 200;
    cfg.sbm_val = 25;
    cfg.sbm_test = 50;
    cfg.sbm->num_graphs = 275;
    cfg.model.variant = Variant::SeaKhop;
    cfg.model.khop = 2;
    cfg.model.num_experts = 4;
    cfg.model.num_heads = 4;
    cfg.model.model_dim = 32;
    cfg.model.lpe_dim = 8;
    cfg.model.task = Task::NodeClassification;
    cfg.model.epsilon0 = 0.5;
    cfg.model.epsilon_decay = 0.9;
    cfg.model.epsilon_floor = 0.0;
    cfg.batch_size = 16;
    cfg.lr = 1e-3;
    cfg.max_epochs = 100;
    cfg.eval_every = 5;
    cfg.early_stop_patience = 10;
    cfg.lr_patience = 5;
    cfg.seed = 11;
    cfg.out_dir = out_dir;
    return cfg;
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");

    run(1, "gradient suite (ops, gtl, full model; eps=0)", criterion_gradients);
    run(2, "SEA-K-HOP(k=1) bit-identical to SEA-GNN", criterion_khop1_equals_gnn);
    run(3, "k-hop index equals reachability oracle", criterion_khop_oracle);
    run(4, "spectral suite (reconstruction, range, components)",
        criterion_spectral);
    run(5, "receptive-field bound for SEA-GNN experts",
        criterion_receptive_field);
    run(6, "gradient isolation of unchosen expert heads",
        criterion_gradient_isolation);

    struct VariantCase {
        Variant variant;
        bool augmented;
        const char* name;
    };
    const VariantCase variants[] = {
        {Variant::SeaGnn, false, "overfit sanity: SEA-GNN"},
        {Variant::SeaAggregated, false, "overfit sanity: SEA-AGGREGATED"},
        {Variant::SeaKhop, false, "overfit sanity: SEA-2-HOP"},
        {Variant::SeaKhop, true, "overfit sanity: SEA-2-HOP-AUG"},
    };
    for (const auto& vc : variants) {
        run(7, vc.name, [&] {
            std::string info;
            return overfit_variant(vc.variant, vc.augmented, &info);
        });
    }

    run(9, "routing statistics (eps=1 spread; eps=0 zero-weight argmax)", [] {
        const int n = 10000, experts = 8;
        Tensor h0({static_cast<std::size_t>(n), 4});
        Rng rng(909);
        for (double& v : h0.values()) v = rng.u01();
        Tensor wr = Tensor::zeros(4, experts);
        std::vector<int> gid(n, 0), lidx(n);
        for (int i = 0; i < n; ++i) lidx[i] = i;

        RoutingDecision explore = route(h0, wr, 1.0, 42, gid, lidx);
        std::vector<int> counts(experts, 0);
        for (int u = 0; u < n; ++u) ++counts[explore.expert[u]];
        const double p = 1.0 / experts;
        const double sigma = std::sqrt(p * (1 - p) / n);
        for (int j = 0; j < experts; ++j) {
            const double freq = counts[j] / static_cast<double>(n);
            if (std::abs(freq - p) > 3.0 * sigma)
                return Outcome{false, msg("expert ", j, " frequency ", freq,
                                          " outside 3 sigma of ", p)};
        }
        RoutingDecision greedy = route(h0, wr, 0.0, 42, gid, lidx);
        for (int u = 0; u < n; ++u)
            if (greedy.expert[u] != 0)
                return Outcome{false, "zero router weights must pick expert 0"};
        return Outcome{true, msg("8 experts within 3 sigma of 1/8 (sigma=",
                                 sigma, "); zero-weight argmax is expert 0")};
    });

    run(10, "metric oracles (ROC-AUC pairwise; MAE/accuracy hand cases)", [] {
        Rng rng(1010);
        for (int trial = 0; trial < 300; ++trial) {
            const int n = 2 + static_cast<int>(rng.bounded(99));
            std::vector<double> scores(n);
            std::vector<int> labels(n);
            bool pos = false, neg = false;
            const int grid = 1 + static_cast<int>(rng.bounded(12));
            for (int i = 0; i < n; ++i) {
                scores[i] = std::floor(rng.u01() * grid) / grid;
                labels[i] = rng.u01() < 0.5 ? 1 : 0;
                (labels[i] ? pos : neg) = true;
            }
            if (!pos) labels[0] = 1;
            if (!neg) labels[n - 1] = 0;
            double wins = 0.0;
            long pairs = 0;
            for (int i = 0; i < n; ++i) {
                if (labels[i] != 1) continue;
                for (int j = 0; j < n; ++j) {
                    if (labels[j] != 0) continue;
                    ++pairs;
                    if (scores[i] > scores[j]) wins += 1.0;
                    else if (scores[i] == scores[j]) wins += 0.5;
                }
            }
            const double oracle = wins / static_cast<double>(pairs);
            const double fast = roc_auc(scores, labels);
            if (std::abs(fast - oracle) > 1e-12)
                return Outcome{false, msg("auc ", fast, " != oracle ", oracle,
                                          " on trial ", trial)};
        }
        if (roc_auc({0.9, 0.1}, {1, 0}) != 1.0)
            return Outcome{false, "perfect separation must give 1.0"};
        if (roc_auc({0.5, 0.5}, {1, 0}) != 0.5)
            return Outcome{false, "all-tied scores must give 0.5"};
        if (mae({1, 2}, {1, 4}) != 1.0)
            return Outcome{false, "mae hand case failed"};
        if (accuracy({1, 0}, {1, 0}) != 1.0)
            return Outcome{false, "accuracy hand case failed"};
        return Outcome{true, "300 random inputs <=100 items match exactly"};
    });

    // Criteria 8 and 11 share the expensive runs: the experiment once in two
    // output directories with identical config and seed.
    TrainResult run_a, run_b;
    bool trained_ok = true;
    std::string train_err;
    {
        const double start = now_seconds();
        try {
            run_a = train(sbm_experiment_config("acceptance_run_a"));
            run_b = train(sbm_experiment_config("acceptance_run_b"));
        } catch (const std::exception& e) {
            trained_ok = false;
            train_err = e.what();
        }
        std::printf("       (sbm experiment: two runs took %.1fs)\n",
                    now_seconds() - start);
        std::fflush(stdout);
    }

    run(8, "desk-scale SBM experiment: SEA-2-HOP accuracy >= 70%", [&] {
        if (!trained_ok) return Outcome{false, "training failed: " + train_err};
        const bool reports_exist =
            std::filesystem::exists(run_a.experts_report_path) &&
            std::filesystem::exists(run_a.oversmoothing_path);
        Outcome o;
        o.pass = run_a.best_test_metric >= 0.70 && reports_exist;
        o.detail = msg("best test accuracy ", run_a.best_test_metric, " after ",
                       run_a.epochs_run, " epochs (stop: ", run_a.stop_reason,
                       "); reports ", reports_exist ? "emitted" : "missing");
        if (!o.pass) {
            // Per-graph accuracy distribution on the test split: a bimodal
            // histogram means the communities are separated but the block
            // naming is a per-graph coin flip (equal blocks, symmetric edge
            // probabilities and i.i.d. features admit no identifiable
            // labeling for a relabeling-equivariant model).
            SeaModel best = load_model(run_a.checkpoint_path);
            TrainConfig cfg = sbm_experiment_config("unused");
            auto graphs = generate_sbm(*cfg.sbm);
            int high = 0, low = 0, mid = 0;
            for (int gi = 225; gi < 275; ++gi) {
                Dataset ds = prepare_dataset({graphs[gi]}, best.cfg);
                BatchInputs in = batch_inputs_for(ds, {0}, best.cfg);
                ForwardResult fr =
                    model_forward(best, best.params.values(), in, 0.0, 0);
                const auto& labels = graphs[gi].y_node();
                int correct = 0;
                for (std::size_t u = 0; u < fr.predictions.rows(); ++u) {
                    const bool pred1 =
                        fr.predictions.at(u, 1) > fr.predictions.at(u, 0);
                    if (pred1 == (labels[u] == 1)) ++correct;
                }
                const double acc =
                    correct / static_cast<double>(graphs[gi].num_nodes());
                if (acc >= 0.8) ++high;
                else if (acc <= 0.2) ++low;
                else ++mid;
            }
            o.detail += msg("; per-graph test accuracy bimodal: ", high,
                            " graphs >=0.8, ", low, " graphs <=0.2, ", mid,
                            " between -- communities are separated but the "
                            "block naming is unidentifiable");
        }
        return o;
    });

    // Supplementary (not a criterion): the same architecture and protocol on
    // a structurally identifiable variant, where one block is internally
    // dense (p=0.5) and the other sparse (p=0.05) so the label is a function
    // of structure. Shows the training pipeline itself learns.
    {
        const double start = now_seconds();
        std::string detail;
        try {
            Rng prng(911);
            std::vector<Graph> graphs;
            for (int gi = 0; gi < 140; ++gi) {
                const int n = 40;
                Graph::Builder b;
                b.num_nodes = n;
                std::vector<int> perm(n);
                for (int i = 0; i < n; ++i) perm[i] = i;
                for (int i = n; i > 1; --i)
                    std::swap(perm[i - 1],
                              perm[prng.bounded(static_cast<std::uint64_t>(i))]);
                std::vector<char> dense_block(n, 0);
                for (int i = 0; i < 20; ++i) dense_block[perm[i]] = 1;
                for (int u = 0; u < n; ++u)
                    for (int v = u + 1; v < n; ++v) {
                        const double p =
                            (dense_block[u] && dense_block[v]) ? 0.5 : 0.05;
                        if (prng.u01() < p) b.edges.emplace_back(u, v);
                    }
                b.node_tokens.resize(n);
                for (int u = 0; u < n; ++u)
                    b.node_tokens[u] =
                        static_cast<std::int64_t>(prng.bounded(3));
                b.y_node.assign(n, 0);
                for (int u = 0; u < n; ++u) b.y_node[u] = dense_block[u];
                graphs.push_back(b.build());
            }
            save_jsonl_dataset(
                std::vector<Graph>(graphs.begin(), graphs.begin() + 100),
                "acceptance_planted_train.jsonl");
            save_jsonl_dataset(
                std::vector<Graph>(graphs.begin() + 100, graphs.begin() + 115),
                "acceptance_planted_val.jsonl");
            save_jsonl_dataset(
                std::vector<Graph>(graphs.begin() + 115, graphs.end()),
                "acceptance_planted_test.jsonl");
            TrainConfig cfg = sbm_experiment_config("acceptance_planted_run");
            cfg.sbm.reset();
            cfg.train_data = "acceptance_planted_train.jsonl";
            cfg.val_data = "acceptance_planted_val.jsonl";
            cfg.test_data = "acceptance_planted_test.jsonl";
            cfg.max_epochs = 25;
            TrainResult r = train(cfg);
            detail = msg("best test accuracy ", r.best_test_metric, " after ",
                         r.epochs_run, " epochs");
            std::filesystem::remove_all("acceptance_planted_run");
            for (const char* f :
                 {"acceptance_planted_train.jsonl", "acceptance_planted_val.jsonl",
                  "acceptance_planted_test.jsonl"})
                std::filesystem::remove(f);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("[info] supplementary control (identifiable labels, same "
                    "model): %s (%.1fs)\n",
                    detail.c_str(), now_seconds() - start);
        std::fflush(stdout);
    }

    run(11, "determinism: identical SBM runs produce byte-identical logs", [&] {
        if (!trained_ok) return Outcome{false, "training failed: " + train_err};
        auto slurp = [](const std::string& p) {
            std::ifstream in(p, std::ios::binary);
            return std::string((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
        };
        const std::string log_a = slurp(run_a.log_path);
        const std::string log_b = slurp(run_b.log_path);
        if (log_a.empty()) return Outcome{false, "empty training log"};
        if (log_a != log_b) return Outcome{false, "training logs differ"};
        const std::string ck_a = slurp(run_a.checkpoint_path);
        const std::string ck_b = slurp(run_b.checkpoint_path);
        if (ck_a != ck_b) return Outcome{false, "checkpoints differ"};
        return Outcome{true, msg("logs byte-identical (", log_a.size(),
                                 " bytes), checkpoints too")};
    });

    std::filesystem::remove_all("acceptance_run_a");
    std::filesystem::remove_all("acceptance_run_b");

    if (g_failures == 0) {
        std::printf("acceptance: all criteria passed\n");
    } else {
        std::printf("acceptance: %d criterion(s) FAILED\n", g_failures);
    }
    return g_failures == 0 ? 0 : 1;
}
