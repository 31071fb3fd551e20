#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "sea/error.hpp"
#include "sea/gradcheck_suite.hpp"
#include "sea/graph.hpp"
#include "sea/metrics.hpp"
#include "sea/train.hpp"

using nlohmann::json;

namespace {

sea::SbmConfig sbm_config_from_file(const std::string& path) {
    std::ifstream in(path);
    sea::require(in.good(), "cannot open config file: ", path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        sea::fail("config parse error: ", e.what());
    }
    sea::SbmConfig c;
    c.num_graphs = j.value("num_graphs", 1);
    c.nodes_per_block = j.value("nodes_per_block", 1);
    c.num_blocks = j.value("num_blocks", 2);
    c.p_intra = j.value("p_intra", 0.0);
    c.p_inter = j.value("p_inter", 0.0);
    c.feature_vocab = j.value("feature_vocab", 1);
    c.seed = j.value("seed", 0ULL);
    return c;
}

// Forward the whole dataset through a checkpointed model with greedy routing.
std::vector<int> routed_experts(const sea::SeaModel& model,
                                const sea::Dataset& ds, int batch_size) {
    std::vector<int> routed;
    for (std::size_t start = 0; start < ds.size();
         start += static_cast<std::size_t>(batch_size)) {
        std::vector<int> indices;
        for (std::size_t i = start;
             i < std::min(ds.size(), start + static_cast<std::size_t>(batch_size));
             ++i)
            indices.push_back(static_cast<int>(i));
        sea::BatchInputs in = sea::batch_inputs_for(ds, indices, model.cfg);
        sea::ForwardResult fr =
            sea::model_forward(model, model.params.values(), in, 0.0, 0);
        routed.insert(routed.end(), fr.routing.expert.begin(),
                      fr.routing.expert.end());
    }
    return routed;
}

int run_gradcheck(const std::string& module) {
    sea::require(module.empty() || module == "tensor" || module == "gtl" ||
                     module == "sea",
                 "unknown gradcheck module '", module,
                 "' (expected tensor, gtl or sea)");
    const double tol = 1e-4;
    bool ok = true;
    auto report = [&](const std::vector<sea::GradCheckCase>& cases) {
        double worst = 0.0;
        std::string worst_name;
        for (const auto& c : cases) {
            if (c.error > worst) {
                worst = c.error;
                worst_name = c.name;
            }
            if (!c.passed(tol)) {
                ok = false;
                std::cout << "FAIL " << c.name << " rel_err=" << c.error << "\n";
            }
        }
        std::cout << cases.size() << " checks, max rel_err " << worst << " ("
                  << worst_name << ")\n";
    };
    if (module.empty() || module == "tensor") {
        std::cout << "[tensor ops]\n";
        report(sea::gradcheck_tensor_ops());
    }
    if (module.empty() || module == "gtl") {
        std::cout << "[gtl]\n";
        report(sea::gradcheck_gtl());
    }
    if (module.empty() || module == "sea") {
        std::cout << "[sea model]\n";
        report(sea::gradcheck_model());
    }
    std::cout << (ok ? "gradcheck passed" : "gradcheck FAILED") << "\n";
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph shell attention engine"};
    app.require_subcommand(1);

    std::string config_path, checkpoint_path, data_path, out_path, module;

    auto* cmd_train = app.add_subcommand("train", "Train a model from a JSON config");
    cmd_train->add_option("--config", config_path, "JSON config file")->required();

    auto* cmd_eval = app.add_subcommand("eval", "Evaluate a checkpoint");
    cmd_eval->add_option("--config", config_path, "JSON config file")->required();
    cmd_eval->add_option("--checkpoint", checkpoint_path, "checkpoint file")
        ->required();

    auto* cmd_gen = app.add_subcommand("gen-sbm", "Generate an SBM dataset");
    cmd_gen->add_option("--config", config_path, "JSON SBM config")->required();
    cmd_gen->add_option("--out", out_path, "output JSONL path")->required();

    auto* cmd_grad = app.add_subcommand("gradcheck", "Finite-difference checks");
    cmd_grad->add_option("--module", module, "tensor | gtl | sea");

    auto* cmd_experts =
        app.add_subcommand("report-experts", "Expert usage over a dataset");
    cmd_experts->add_option("--checkpoint", checkpoint_path, "checkpoint file")
        ->required();
    cmd_experts->add_option("--data", data_path, "JSONL dataset")->required();

    auto* cmd_smooth = app.add_subcommand("diag-oversmoothing",
                                          "Per-layer state similarity table");
    cmd_smooth->add_option("--checkpoint", checkpoint_path, "checkpoint file")
        ->required();
    cmd_smooth->add_option("--data", data_path, "JSONL dataset")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_train->parsed()) {
            sea::TrainConfig cfg = sea::TrainConfig::from_json_file(config_path);
            sea::TrainResult r = sea::train(cfg);
            json out;
            out["checkpoint"] = r.checkpoint_path;
            out["log"] = r.log_path;
            out["experts_report"] = r.experts_report_path;
            out["oversmoothing"] = r.oversmoothing_path;
            out["epochs_run"] = r.epochs_run;
            out["best_val_metric"] = r.best_val_metric;
            out["best_test_metric"] = r.best_test_metric;
            out["stop_reason"] = r.stop_reason;
            std::cout << out.dump() << "\n";
        } else if (cmd_eval->parsed()) {
            sea::TrainConfig cfg = sea::TrainConfig::from_json_file(config_path);
            sea::SeaModel model = sea::load_model(checkpoint_path);
            sea::TaskSpec spec;
            spec.task = model.cfg.task;
            struct SplitIn {
                const char* name;
                std::string path;
            };
            std::vector<SplitIn> splits;
            if (cfg.sbm.has_value()) {
                sea::fail("eval: use explicit dataset paths, not an sbm block");
            }
            splits.push_back({"train", cfg.train_data});
            splits.push_back({"val", cfg.val_data});
            splits.push_back({"test", cfg.test_data});
            // Class weights always come from the training split so losses
            // are comparable across splits.
            if (spec.task == sea::Task::NodeClassification) {
                sea::Dataset tr = sea::prepare_dataset(
                    sea::load_jsonl_dataset(cfg.train_data), model.cfg);
                spec.weights = sea::class_weights(tr, model.schema.num_classes);
            }
            for (const auto& s : splits) {
                if (s.path.empty()) continue;
                sea::Dataset ds = sea::prepare_dataset(
                    sea::load_jsonl_dataset(s.path), model.cfg);
                sea::MetricsReport r =
                    sea::evaluate(model, ds, spec, cfg.batch_size);
                json line;
                line["split"] = s.name;
                line["loss"] = r.loss;
                line[r.metric_name] = r.metric;
                std::cout << line.dump() << "\n";
            }
        } else if (cmd_gen->parsed()) {
            sea::SbmConfig cfg = sbm_config_from_file(config_path);
            auto graphs = sea::generate_sbm(cfg);
            sea::save_jsonl_dataset(graphs, out_path);
            std::cout << "wrote " << graphs.size() << " graphs to " << out_path
                      << "\n";
        } else if (cmd_grad->parsed()) {
            return run_gradcheck(module);
        } else if (cmd_experts->parsed()) {
            sea::SeaModel model = sea::load_model(checkpoint_path);
            sea::Dataset ds = sea::prepare_dataset(
                sea::load_jsonl_dataset(data_path), model.cfg);
            auto routed = routed_experts(model, ds, 32);
            auto rep =
                sea::expert_distribution_report(routed, model.cfg.num_experts);
            json out;
            out["frequencies"] = rep.frequencies;
            out["reported_experts"] = rep.reported_experts;
            out["threshold"] = rep.threshold;
            out["collapsed"] = rep.collapsed;
            out["total_nodes"] = rep.total_nodes;
            std::cout << out.dump(2) << "\n";
        } else if (cmd_smooth->parsed()) {
            sea::SeaModel model = sea::load_model(checkpoint_path);
            sea::Dataset ds = sea::prepare_dataset(
                sea::load_jsonl_dataset(data_path), model.cfg);
            std::vector<double> cos_sum;
            std::vector<std::size_t> excluded;
            for (std::size_t gi = 0; gi < ds.size(); ++gi) {
                sea::BatchInputs in = sea::batch_inputs_for(
                    ds, {static_cast<int>(gi)}, model.cfg);
                sea::ForwardResult fr = sea::model_forward(
                    model, model.params.values(), in, 0.0, 0);
                auto rows = sea::oversmoothing_diagnostic(fr.expert_states);
                if (cos_sum.empty()) {
                    cos_sum.assign(rows.size(), 0.0);
                    excluded.assign(rows.size(), 0);
                }
                for (std::size_t l = 0; l < rows.size(); ++l) {
                    cos_sum[l] += rows[l].mean_cosine;
                    excluded[l] += rows[l].excluded_pairs;
                }
            }
            std::cout << "layer\tmean_cosine\texcluded_pairs\n";
            for (std::size_t l = 0; l < cos_sum.size(); ++l)
                std::cout << (l + 1) << "\t"
                          << cos_sum[l] / static_cast<double>(ds.size()) << "\t"
                          << excluded[l] << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
