#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sea/graph.hpp"
#include "sea/metrics.hpp"
#include "sea/sea_model.hpp"

namespace sea {

struct TrainConfig {
    // Data: either JSONL paths or an SBM generation spec with a split.
    std::string train_data, val_data, test_data;
    std::optional<SbmConfig> sbm;
    int sbm_train = 0, sbm_val = 0, sbm_test = 0;

    SeaConfig model;

    int batch_size = 32;
    double lr = 1e-3;
    double lr_reduce_factor = 0.5;
    int lr_patience = 5;
    double min_lr = 1e-6;
    int max_epochs = 500;
    int eval_every = 5;
    int early_stop_patience = 10;
    double dropout = 0.0;
    double weight_decay = 0.0;
    std::uint64_t seed = 0;
    std::string out_dir = ".";

    void validate() const;
    std::string to_json() const;
    static TrainConfig from_json_text(const std::string& text);
    static TrainConfig from_json_file(const std::string& path);
};

// Graphs plus the per-graph caches the model consumes.
struct Dataset {
    std::vector<Graph> graphs;
    std::vector<KHopIndex> khop;  // present when the variant needs it
    std::vector<Tensor> lpe;

    std::size_t size() const { return graphs.size(); }
};

Dataset prepare_dataset(std::vector<Graph> graphs, const SeaConfig& cfg);

// Schema inferred from data (vocabulary sizes span all provided splits).
DataSchema infer_schema(const std::vector<const Dataset*>& splits, Task task);

// Task loss weights for node classification (inverse class frequency).
std::vector<double> class_weights(const Dataset& train, int num_classes);

struct TaskSpec {
    Task task = Task::GraphRegression;
    std::vector<double> weights;  // node classification only
};

BatchInputs batch_inputs_for(const Dataset& ds, const std::vector<int>& indices,
                             const SeaConfig& cfg);

// Differentiable task loss over one batch (L1 / logistic / weighted CE).
// Graph tasks read `graph_targets` (num_graphs x 1); node tasks read the
// merged graph's labels and ignore it.
Tensor batch_loss(const Tensor& predictions, const BatchInputs& in,
                  const TaskSpec& spec, const Tensor& graph_targets);

struct MetricsReport {
    std::string split;
    int epoch = 0;
    double loss = 0.0;
    double metric = 0.0;      // MAE | ROC-AUC | accuracy
    std::string metric_name;  // "mae" | "roc_auc" | "accuracy"
};

MetricsReport evaluate(const SeaModel& m, const Dataset& ds,
                       const TaskSpec& spec, int batch_size);

// Plateau scheduler: halves the learning rate after `patience` consecutive
// non-improving observations (improvement = better by at least min_delta).
class PlateauScheduler {
public:
    PlateauScheduler(double lr, double factor, int patience, double min_lr,
                     double min_delta = 1e-6)
        : lr_(lr), factor_(factor), patience_(patience), min_lr_(min_lr),
          min_delta_(min_delta) {}

    // Returns true if the rate was reduced at this step.
    bool observe(double loss);
    double lr() const { return lr_; }
    bool below_min() const { return lr_ < min_lr_; }

private:
    double lr_;
    double factor_;
    int patience_;
    double min_lr_;
    double min_delta_;
    double best_ = 0.0;
    bool has_best_ = false;
    int bad_ = 0;
};

// Fires after `patience` consecutive non-improving observations of the task
// metric (higher_better decides the direction).
class EarlyStopTracker {
public:
    EarlyStopTracker(int patience, bool higher_better, double min_delta = 1e-6)
        : patience_(patience), higher_better_(higher_better),
          min_delta_(min_delta) {}

    bool observe(double metric);  // returns true when stopping fires
    double best() const { return best_; }
    bool has_best() const { return has_best_; }

private:
    int patience_;
    bool higher_better_;
    double min_delta_;
    double best_ = 0.0;
    bool has_best_ = false;
    int bad_ = 0;
};

struct TrainResult {
    std::string checkpoint_path;
    std::string log_path;
    std::string experts_report_path;
    std::string oversmoothing_path;
    int epochs_run = 0;
    double best_val_metric = 0.0;
    double best_test_metric = 0.0;
    std::string stop_reason;
};

TrainResult train(const TrainConfig& cfg);

bool metric_higher_better(Task t);

// Rebuilds a model from a checkpoint written by train() (config + schema
// travel in the checkpoint's extra block).
SeaModel load_model(const std::string& checkpoint_path);

}  // namespace sea
