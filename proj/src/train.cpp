#include "sea/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>

#include "sea/error.hpp"
#include "sea/optim.hpp"
#include "sea/parallel.hpp"
#include "sea/params.hpp"
#include "sea/rng.hpp"
#include "sea/spectral.hpp"

namespace sea {

using nlohmann::json;

void TrainConfig::validate() const {
    model.validate();
    require(batch_size >= 1, "config: batch_size must be >= 1");
    require(lr > 0.0, "config: lr must be positive");
    require(lr_reduce_factor > 0.0 && lr_reduce_factor < 1.0,
            "config: lr_reduce_factor must be in (0,1)");
    require(lr_patience >= 1, "config: lr_patience must be >= 1");
    require(min_lr > 0.0, "config: min_lr must be positive");
    require(max_epochs >= 1, "config: max_epochs must be >= 1");
    require(eval_every >= 1, "config: eval_every must be >= 1");
    require(early_stop_patience >= 1, "config: early_stop_patience must be >= 1");
    require(dropout >= 0.0 && dropout < 1.0, "config: dropout must be in [0,1)");
    require(weight_decay >= 0.0, "config: weight_decay must be >= 0");
    const bool has_paths = !train_data.empty();
    require(has_paths != sbm.has_value(),
            "config: provide either dataset paths or an sbm block");
    if (sbm.has_value())
        require(sbm_train >= 1 && sbm_val >= 1 && sbm_test >= 1,
                "config: sbm split must name train/val/test counts");
}

std::string TrainConfig::to_json() const {
    json j = json::parse(model.to_json());
    if (!train_data.empty()) {
        j["train_data"] = train_data;
        j["val_data"] = val_data;
        j["test_data"] = test_data;
    }
    if (sbm.has_value()) {
        json s;
        s["num_graphs"] = sbm->num_graphs;
        s["nodes_per_block"] = sbm->nodes_per_block;
        s["num_blocks"] = sbm->num_blocks;
        s["p_intra"] = sbm->p_intra;
        s["p_inter"] = sbm->p_inter;
        s["feature_vocab"] = sbm->feature_vocab;
        s["seed"] = sbm->seed;
        s["split"] = {sbm_train, sbm_val, sbm_test};
        j["sbm"] = std::move(s);
    }
    j["batch_size"] = batch_size;
    j["lr"] = lr;
    j["lr_reduce_factor"] = lr_reduce_factor;
    j["lr_patience"] = lr_patience;
    j["min_lr"] = min_lr;
    j["max_epochs"] = max_epochs;
    j["eval_every"] = eval_every;
    j["early_stop_patience"] = early_stop_patience;
    j["dropout"] = dropout;
    j["weight_decay"] = weight_decay;
    j["seed"] = seed;
    j["out_dir"] = out_dir;
    return j.dump();
}

TrainConfig TrainConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail("config parse error: ", e.what());
    }
    TrainConfig c;
    c.model = SeaConfig::from_json(text);
    c.train_data = j.value("train_data", "");
    c.val_data = j.value("val_data", "");
    c.test_data = j.value("test_data", "");
    if (j.contains("sbm")) {
        const auto& s = j["sbm"];
        SbmConfig sc;
        sc.nodes_per_block = s.value("nodes_per_block", 1);
        sc.num_blocks = s.value("num_blocks", 2);
        sc.p_intra = s.value("p_intra", 0.0);
        sc.p_inter = s.value("p_inter", 0.0);
        sc.feature_vocab = s.value("feature_vocab", 1);
        sc.seed = s.value("seed", 0ULL);
        require(s.contains("split") && s["split"].is_array() &&
                    s["split"].size() == 3,
                "config: sbm.split must be [train,val,test]");
        c.sbm_train = s["split"][0];
        c.sbm_val = s["split"][1];
        c.sbm_test = s["split"][2];
        sc.num_graphs = c.sbm_train + c.sbm_val + c.sbm_test;
        c.sbm = sc;
    }
    c.batch_size = j.value("batch_size", c.batch_size);
    c.lr = j.value("lr", c.lr);
    c.lr_reduce_factor = j.value("lr_reduce_factor", c.lr_reduce_factor);
    c.lr_patience = j.value("lr_patience", c.lr_patience);
    c.min_lr = j.value("min_lr", c.min_lr);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.eval_every = j.value("eval_every", c.eval_every);
    c.early_stop_patience = j.value("early_stop_patience", c.early_stop_patience);
    c.dropout = j.value("dropout", c.dropout);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.seed = j.value("seed", c.seed);
    c.out_dir = j.value("out_dir", c.out_dir);
    c.validate();
    return c;
}

TrainConfig TrainConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open config file: ", path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return from_json_text(text);
}

Dataset prepare_dataset(std::vector<Graph> graphs, const SeaConfig& cfg) {
    Dataset ds;
    ds.graphs = std::move(graphs);
    const int n = static_cast<int>(ds.graphs.size());
    ds.lpe.resize(n);
    parallel_for(n, [&](int i) {
        ds.lpe[i] = lpe(ds.graphs[i], cfg.lpe_dim, cfg.lpe_skip_trivial);
    });
    if (cfg.variant == Variant::SeaKhop) {
        ds.khop.resize(n);
        for (int i = 0; i < n; ++i)
            ds.khop[i] = khop_index(ds.graphs[i], cfg.khop);
    }
    return ds;
}

DataSchema infer_schema(const std::vector<const Dataset*>& splits, Task task) {
    require(!splits.empty() && !splits[0]->graphs.empty(),
            "schema: empty dataset");
    const Graph& first = splits[0]->graphs.front();
    DataSchema s;
    s.node_kind = first.node_feature_kind();
    require(s.node_kind != NodeFeatureKind::None,
            "schema: graphs carry no node features");
    s.node_dense_dim = first.node_dense_dim();
    s.edge_kind = first.edge_feature_kind();
    s.edge_dense_dim = first.edge_dense_dim();
    std::int64_t max_node_tok = -1, max_edge_tok = -1;
    int max_label = -1;
    for (const Dataset* ds : splits) {
        for (const Graph& g : ds->graphs) {
            for (auto t : g.node_tokens()) max_node_tok = std::max(max_node_tok, t);
            for (auto t : g.edge_tokens()) max_edge_tok = std::max(max_edge_tok, t);
            for (int y : g.y_node()) max_label = std::max(max_label, y);
        }
    }
    s.node_vocab = static_cast<int>(max_node_tok + 1);
    s.edge_vocab = static_cast<int>(max_edge_tok + 1);
    if (task == Task::NodeClassification) {
        require(max_label >= 0, "schema: node classification needs y_node targets");
        s.num_classes = max_label + 1;
    }
    return s;
}

std::vector<double> class_weights(const Dataset& train, int num_classes) {
    std::vector<double> counts(num_classes, 0.0);
    double total = 0.0;
    for (const Graph& g : train.graphs)
        for (int y : g.y_node()) {
            counts[y] += 1.0;
            total += 1.0;
        }
    std::vector<double> w(num_classes, 0.0);
    for (int c = 0; c < num_classes; ++c)
        w[c] = counts[c] > 0.0 ? total / (num_classes * counts[c]) : 0.0;
    return w;
}

BatchInputs batch_inputs_for(const Dataset& ds, const std::vector<int>& indices,
                             const SeaConfig& cfg) {
    std::vector<const Graph*> graphs;
    std::vector<const KHopIndex*> khop;
    std::vector<const Tensor*> lpes;
    for (int i : indices) {
        graphs.push_back(&ds.graphs[i]);
        if (!ds.khop.empty()) khop.push_back(&ds.khop[i]);
        lpes.push_back(&ds.lpe[i]);
    }
    // Dataset indices key the per-node exploration stream, so draws do not
    // depend on shuffling or batch makeup.
    return make_batch_inputs(graphs, khop, lpes, cfg, indices);
}

namespace {

Tensor graph_targets(const std::vector<const Graph*>& members) {
    Tensor t({members.size(), 1});
    for (std::size_t g = 0; g < members.size(); ++g)
        t.at(g, 0) = members[g]->y_graph();
    return t;
}

std::vector<const Graph*> member_graphs(const Dataset& ds,
                                        const std::vector<int>& indices) {
    std::vector<const Graph*> out;
    for (int i : indices) out.push_back(&ds.graphs[i]);
    return out;
}

}  // namespace

Tensor batch_loss(const Tensor& predictions, const BatchInputs& in,
                  const TaskSpec& spec, const Tensor& graph_t) {
    switch (spec.task) {
        case Task::GraphRegression: {
            Tensor diff = sub(predictions, graph_t);
            Tensor absdiff = add(relu(diff), relu(scale(diff, -1.0)));
            return scale(sum_all(absdiff),
                         1.0 / static_cast<double>(predictions.rows()));
        }
        case Task::GraphBinary: {
            // Logistic loss with logits z: softplus(z) - y*z, averaged.
            Tensor sp = softplus(predictions);
            Tensor yz = mul_elementwise(predictions, graph_t);
            return scale(sum_all(sub(sp, yz)),
                         1.0 / static_cast<double>(predictions.rows()));
        }
        case Task::NodeClassification: {
            const auto& labels = in.batch.merged.y_node();
            require(labels.size() == predictions.rows(),
                    "loss: node label count mismatch");
            Tensor lsm = log_softmax_rows(predictions);
            Tensor picked = pick_per_row(lsm, labels);
            Tensor w({labels.size(), 1});
            double wsum = 0.0;
            for (std::size_t i = 0; i < labels.size(); ++i) {
                w.at(i, 0) = spec.weights[labels[i]];
                wsum += w.at(i, 0);
            }
            Tensor weighted = mul_elementwise(picked, w);
            return scale(sum_all(weighted), -1.0 / wsum);
        }
    }
    fail("loss: unknown task");
}

bool metric_higher_better(Task t) {
    return t != Task::GraphRegression;  // MAE is lower-better
}

namespace {

struct EvalAccumulator {
    std::vector<double> graph_preds;
    std::vector<double> graph_targets;
    std::vector<int> node_preds;
    std::vector<int> node_targets;
    double loss_sum = 0.0;
    double loss_weight = 0.0;
    std::vector<int> routed;
};

void accumulate_eval(const SeaModel& m, const std::vector<Tensor>& params,
                     const Dataset& ds, const std::vector<int>& indices,
                     const TaskSpec& spec, EvalAccumulator& acc) {
    BatchInputs in = batch_inputs_for(ds, indices, m.cfg);
    ForwardResult fr = model_forward(m, params, in, /*epsilon=*/0.0, /*seed=*/0);
    auto members = member_graphs(ds, indices);

    Tensor gt;
    if (spec.task != Task::NodeClassification) gt = graph_targets(members);
    Tensor loss = batch_loss(fr.predictions, in, spec, gt);
    const double batch_weight =
        spec.task == Task::NodeClassification
            ? static_cast<double>(in.batch.merged.num_nodes())
            : static_cast<double>(indices.size());
    acc.loss_sum += loss.item() * batch_weight;
    acc.loss_weight += batch_weight;

    if (spec.task == Task::NodeClassification) {
        const auto& labels = in.batch.merged.y_node();
        for (std::size_t u = 0; u < fr.predictions.rows(); ++u) {
            int best = 0;
            for (std::size_t c = 1; c < fr.predictions.cols(); ++c)
                if (fr.predictions.at(u, c) > fr.predictions.at(u, best))
                    best = static_cast<int>(c);
            acc.node_preds.push_back(best);
            acc.node_targets.push_back(labels[u]);
        }
    } else {
        for (std::size_t g = 0; g < fr.predictions.rows(); ++g) {
            acc.graph_preds.push_back(fr.predictions.at(g, 0));
            acc.graph_targets.push_back(gt.at(g, 0));
        }
    }
    acc.routed.insert(acc.routed.end(), fr.routing.expert.begin(),
                      fr.routing.expert.end());
}

MetricsReport finalize_eval(const TaskSpec& spec, const EvalAccumulator& acc) {
    MetricsReport r;
    r.loss = acc.loss_sum / acc.loss_weight;
    switch (spec.task) {
        case Task::GraphRegression:
            r.metric = mae(acc.graph_preds, acc.graph_targets);
            r.metric_name = "mae";
            break;
        case Task::GraphBinary: {
            std::vector<int> labels(acc.graph_targets.size());
            for (std::size_t i = 0; i < labels.size(); ++i)
                labels[i] = acc.graph_targets[i] > 0.5 ? 1 : 0;
            r.metric = roc_auc(acc.graph_preds, labels);
            r.metric_name = "roc_auc";
            break;
        }
        case Task::NodeClassification:
            r.metric = accuracy(acc.node_preds, acc.node_targets);
            r.metric_name = "accuracy";
            break;
    }
    return r;
}

}  // namespace

MetricsReport evaluate(const SeaModel& m, const Dataset& ds,
                       const TaskSpec& spec, int batch_size) {
    require(ds.size() > 0, "evaluate: empty dataset");
    EvalAccumulator acc;
    const auto& params = m.params.values();
    for (std::size_t start = 0; start < ds.size();
         start += static_cast<std::size_t>(batch_size)) {
        std::vector<int> indices;
        for (std::size_t i = start;
             i < std::min(ds.size(), start + static_cast<std::size_t>(batch_size));
             ++i)
            indices.push_back(static_cast<int>(i));
        accumulate_eval(m, params, ds, indices, spec, acc);
    }
    MetricsReport r = finalize_eval(spec, acc);
    r.split = "eval";
    return r;
}

bool PlateauScheduler::observe(double loss) {
    if (!has_best_ || loss < best_ - min_delta_) {
        best_ = loss;
        has_best_ = true;
        bad_ = 0;
        return false;
    }
    if (++bad_ >= patience_) {
        lr_ *= factor_;
        bad_ = 0;
        return true;
    }
    return false;
}

bool EarlyStopTracker::observe(double metric) {
    const bool improved =
        !has_best_ || (higher_better_ ? metric > best_ + min_delta_
                                      : metric < best_ - min_delta_);
    if (improved) {
        best_ = metric;
        has_best_ = true;
        bad_ = 0;
        return false;
    }
    return ++bad_ >= patience_;
}

namespace {

struct Splits {
    Dataset train, val, test;
};

Splits load_splits(const TrainConfig& cfg) {
    Splits s;
    if (cfg.sbm.has_value()) {
        std::vector<Graph> all = generate_sbm(*cfg.sbm);
        std::vector<Graph> tr(all.begin(), all.begin() + cfg.sbm_train);
        std::vector<Graph> va(all.begin() + cfg.sbm_train,
                              all.begin() + cfg.sbm_train + cfg.sbm_val);
        std::vector<Graph> te(all.begin() + cfg.sbm_train + cfg.sbm_val,
                              all.end());
        s.train = prepare_dataset(std::move(tr), cfg.model);
        s.val = prepare_dataset(std::move(va), cfg.model);
        s.test = prepare_dataset(std::move(te), cfg.model);
    } else {
        require(!cfg.val_data.empty() && !cfg.test_data.empty(),
                "config: val_data and test_data are required");
        s.train = prepare_dataset(load_jsonl_dataset(cfg.train_data), cfg.model);
        s.val = prepare_dataset(load_jsonl_dataset(cfg.val_data), cfg.model);
        s.test = prepare_dataset(load_jsonl_dataset(cfg.test_data), cfg.model);
    }
    require(s.train.size() > 0 && s.val.size() > 0 && s.test.size() > 0,
            "config: all splits must be nonempty");
    return s;
}

void check_task_matches(const Dataset& ds, Task task) {
    for (const Graph& g : ds.graphs) {
        if (task == Task::NodeClassification) {
            require(g.target_kind() == TargetKind::NodeLabels,
                    "dataset/task mismatch: node task needs y_node targets");
        } else {
            require(g.target_kind() == TargetKind::GraphScalar,
                    "dataset/task mismatch: graph task needs y_graph targets");
            if (task == Task::GraphBinary)
                require(g.y_graph() == 0.0 || g.y_graph() == 1.0,
                        "dataset/task mismatch: binary task needs 0/1 targets, got ",
                        g.y_graph());
        }
    }
}

json report_to_json(const ExpertDistributionReport& rep) {
    json j;
    j["frequencies"] = rep.frequencies;
    j["reported_experts"] = rep.reported_experts;
    j["threshold"] = rep.threshold;
    j["collapsed"] = rep.collapsed;
    j["total_nodes"] = rep.total_nodes;
    return j;
}

}  // namespace

TrainResult train(const TrainConfig& cfg) {
    cfg.validate();
    Splits data = load_splits(cfg);
    check_task_matches(data.train, cfg.model.task);
    check_task_matches(data.val, cfg.model.task);
    check_task_matches(data.test, cfg.model.task);

    DataSchema schema =
        infer_schema({&data.train, &data.val, &data.test}, cfg.model.task);
    SeaModel model = SeaModel::build(cfg.model, schema, cfg.seed);

    TaskSpec spec;
    spec.task = cfg.model.task;
    if (spec.task == Task::NodeClassification)
        spec.weights = class_weights(data.train, schema.num_classes);

    AdamState adam = AdamState::init(model.params.values(), cfg.lr);
    PlateauScheduler sched(cfg.lr, cfg.lr_reduce_factor, cfg.lr_patience,
                           cfg.min_lr);
    EarlyStopTracker stopper(cfg.early_stop_patience,
                             metric_higher_better(spec.task));
    const bool higher = metric_higher_better(spec.task);

    std::filesystem::create_directories(cfg.out_dir);
    const std::string log_path = cfg.out_dir + "/log.jsonl";
    const std::string ckpt_path = cfg.out_dir + "/checkpoint_best.json";
    std::ofstream log(log_path, std::ios::binary);
    require(log.good(), "cannot open log file: ", log_path);

    TrainResult result;
    result.log_path = log_path;
    result.checkpoint_path = ckpt_path;
    result.stop_reason = "max_epochs";

    double best_val_metric = 0.0;
    bool have_best = false;
    ParamStore best_params = model.params;
    double best_test_metric = 0.0;
    bool have_test = false;

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const double eps = cfg.model.epsilon_at(epoch);
        adam.lr = sched.lr();

        // Seeded shuffle; the order depends only on (seed, epoch).
        std::vector<int> order(data.train.size());
        std::iota(order.begin(), order.end(), 0);
        Rng shuffle_rng(splitmix64(cfg.seed) ^ static_cast<std::uint64_t>(epoch));
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.bounded(i)]);

        double train_loss_sum = 0.0, train_weight = 0.0;
        std::vector<int> routed;
        int batch_no = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size), ++batch_no) {
            std::vector<int> indices(
                order.begin() + start,
                order.begin() + std::min(order.size(),
                                         start + static_cast<std::size_t>(
                                                     cfg.batch_size)));
            BatchInputs in = batch_inputs_for(data.train, indices, cfg.model);

            Tape tape;
            std::vector<Tensor> tracked;
            tracked.reserve(model.params.size());
            for (const Tensor& p : model.params.values())
                tracked.push_back(tape.leaf(p));

            DropoutCtx drop{cfg.dropout,
                            counter_bits(cfg.seed, epoch, batch_no, 0xd0), 0};
            const std::uint64_t route_seed =
                counter_bits(cfg.seed, static_cast<std::uint64_t>(epoch), 0, 0xe5);
            ForwardResult fr =
                model_forward(model, tracked, in, eps, route_seed,
                              cfg.dropout > 0.0 ? &drop : nullptr);

            Tensor gt;
            if (spec.task != Task::NodeClassification)
                gt = graph_targets(member_graphs(data.train, indices));
            Tensor loss = batch_loss(fr.predictions, in, spec, gt);

            const double w = spec.task == Task::NodeClassification
                                 ? static_cast<double>(in.batch.merged.num_nodes())
                                 : static_cast<double>(indices.size());
            train_loss_sum += loss.item() * w;
            train_weight += w;
            routed.insert(routed.end(), fr.routing.expert.begin(),
                          fr.routing.expert.end());

            auto grads = tape.backward(loss);
            std::vector<Tensor> grad_list;
            grad_list.reserve(tracked.size());
            for (std::size_t p = 0; p < tracked.size(); ++p)
                grad_list.push_back(Tape::grad_of(grads, tracked[p]));
            if (cfg.weight_decay > 0.0) {
                for (std::size_t p = 0; p < grad_list.size(); ++p) {
                    auto& g = grad_list[p].values();
                    const auto& th = model.params.value(static_cast<int>(p)).values();
                    for (std::size_t i = 0; i < g.size(); ++i)
                        g[i] += cfg.weight_decay * th[i];
                }
            }
            adam_step(model.params.values(), grad_list, adam);
        }

        MetricsReport val = evaluate(model, data.val, spec, cfg.batch_size);
        const bool reduced = sched.observe(val.loss);

        const bool val_improved =
            !have_best || (higher ? val.metric > best_val_metric + 1e-6
                                  : val.metric < best_val_metric - 1e-6);
        if (val_improved) {
            best_val_metric = val.metric;
            have_best = true;
            best_params = model.params;
        }

        json line;
        line["epoch"] = epoch;
        line["lr"] = adam.lr;
        line["epsilon"] = eps;
        line["train_loss"] = train_loss_sum / train_weight;
        line["val_loss"] = val.loss;
        line["val_metric"] = val.metric;
        line["metric_name"] = val.metric_name;
        auto train_rep = expert_distribution_report(
            routed, cfg.model.num_experts);
        line["expert_freq"] = train_rep.frequencies;
        if (reduced) line["lr_reduced"] = true;

        bool stop = false;
        if ((epoch + 1) % cfg.eval_every == 0) {
            MetricsReport test = evaluate(model, data.test, spec, cfg.batch_size);
            line["test_metric"] = test.metric;
            line["test_loss"] = test.loss;
            if (!have_test ||
                (higher ? test.metric > best_test_metric
                        : test.metric < best_test_metric)) {
                best_test_metric = test.metric;
                have_test = true;
            }
            if (stopper.observe(test.metric)) {
                result.stop_reason = "early_stop";
                stop = true;
            }
        }
        if (sched.below_min()) {
            result.stop_reason = "min_lr";
            stop = true;
        }

        log << line.dump() << "\n";
        result.epochs_run = epoch + 1;
        if (stop) break;
    }
    log.flush();

    // Final artifacts come from the best validation checkpoint.
    model.params = best_params;
    json extra;
    extra["model_config"] = json::parse(cfg.model.to_json());
    extra["schema"] = json::parse(schema.to_json());
    save_checkpoint(model.params, extra.dump(), ckpt_path);

    // Expert distribution and over-smoothing diagnostics on the test split.
    EvalAccumulator acc;
    for (std::size_t start = 0; start < data.test.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
        std::vector<int> indices;
        for (std::size_t i = start;
             i < std::min(data.test.size(),
                          start + static_cast<std::size_t>(cfg.batch_size));
             ++i)
            indices.push_back(static_cast<int>(i));
        accumulate_eval(model, model.params.values(), data.test, indices, spec, acc);
    }
    auto report = expert_distribution_report(acc.routed, cfg.model.num_experts);
    result.experts_report_path = cfg.out_dir + "/experts_report.json";
    {
        std::ofstream f(result.experts_report_path, std::ios::binary);
        f << report_to_json(report).dump(2) << "\n";
    }

    std::vector<std::vector<double>> layer_cos;
    std::vector<std::vector<std::size_t>> layer_excluded;
    for (std::size_t gi = 0; gi < data.test.size(); ++gi) {
        BatchInputs in = batch_inputs_for(data.test, {static_cast<int>(gi)},
                                          cfg.model);
        ForwardResult fr =
            model_forward(model, model.params.values(), in, 0.0, 0);
        auto rows = oversmoothing_diagnostic(fr.expert_states);
        if (layer_cos.empty()) {
            layer_cos.resize(rows.size());
            layer_excluded.resize(rows.size());
        }
        for (std::size_t l = 0; l < rows.size(); ++l) {
            layer_cos[l].push_back(rows[l].mean_cosine);
            layer_excluded[l].push_back(rows[l].excluded_pairs);
        }
    }
    result.oversmoothing_path = cfg.out_dir + "/oversmoothing.tsv";
    {
        std::ofstream f(result.oversmoothing_path, std::ios::binary);
        f << "layer\tmean_cosine\texcluded_pairs\n";
        for (std::size_t l = 0; l < layer_cos.size(); ++l) {
            double m = std::accumulate(layer_cos[l].begin(), layer_cos[l].end(),
                                       0.0) /
                       static_cast<double>(layer_cos[l].size());
            std::size_t ex = std::accumulate(layer_excluded[l].begin(),
                                             layer_excluded[l].end(),
                                             static_cast<std::size_t>(0));
            f << (l + 1) << "\t" << m << "\t" << ex << "\n";
        }
    }

    result.best_val_metric = best_val_metric;
    result.best_test_metric = best_test_metric;
    return result;
}

SeaModel load_model(const std::string& checkpoint_path) {
    LoadedCheckpoint ck = load_checkpoint(checkpoint_path);
    require(!ck.extra_json.empty(), "checkpoint: missing model config block");
    json extra = json::parse(ck.extra_json);
    require(extra.contains("model_config") && extra.contains("schema"),
            "checkpoint: extra block lacks model_config/schema");
    SeaConfig cfg = SeaConfig::from_json(extra["model_config"].dump());
    DataSchema schema = DataSchema::from_json(extra["schema"].dump());
    SeaModel model = SeaModel::build(cfg, schema, /*seed=*/0);
    require(ck.params.size() == model.params.size(),
            "checkpoint: parameter count ", ck.params.size(),
            " != expected ", model.params.size());
    for (std::size_t i = 0; i < ck.params.size(); ++i) {
        const int idx = model.params.index_of(ck.params.name(static_cast<int>(i)));
        require(idx >= 0, "checkpoint: unknown parameter ",
                ck.params.name(static_cast<int>(i)));
        require(model.params.value(idx).shape() ==
                    ck.params.value(static_cast<int>(i)).shape(),
                "checkpoint: shape mismatch for ",
                ck.params.name(static_cast<int>(i)));
        model.params.value(idx) = ck.params.value(static_cast<int>(i));
    }
    return model;
}

}  // namespace sea
