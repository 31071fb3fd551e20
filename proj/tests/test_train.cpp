#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sea/error.hpp"
#include "sea/metrics.hpp"
#include "sea/params.hpp"
#include "sea/rng.hpp"
#include "sea/train.hpp"

using namespace sea;

namespace {

// Pairwise-counting oracle: P(score_pos > score_neg) + 0.5 P(tie).
double auc_oracle(const std::vector<double>& scores,
                  const std::vector<int>& labels) {
    double wins = 0.0;
    long pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

TrainConfig tiny_sbm_config(const std::string& out_dir) {
    TrainConfig cfg;
    SbmConfig sbm;
    sbm.nodes_per_block = 5;
    sbm.num_blocks = 2;
    sbm.p_intra = 0.7;
    sbm.p_inter = 0.1;
    sbm.feature_vocab = 3;
    sbm.seed = 5;
    sbm.num_graphs = 14;
    cfg.sbm = sbm;
    cfg.sbm_train = 10;
    cfg.sbm_val = 2;
    cfg.sbm_test = 2;
    cfg.model.variant = Variant::SeaGnn;
    cfg.model.task = Task::NodeClassification;
    cfg.model.num_experts = 2;
    cfg.model.num_heads = 2;
    cfg.model.model_dim = 4;
    cfg.model.lpe_dim = 3;
    cfg.batch_size = 4;
    cfg.max_epochs = 3;
    cfg.seed = 2;
    cfg.out_dir = out_dir;
    return cfg;
}

}  // namespace

TEST_CASE("scheduler: flat losses halve the rate after the patience window") {
    PlateauScheduler sched(1e-3, 0.5, 5, 1e-6);
    // Epoch 1 sets the best; epochs 2..6 fail to improve.
    CHECK_FALSE(sched.observe(1.0));
    for (int epoch = 2; epoch <= 5; ++epoch) CHECK_FALSE(sched.observe(1.0));
    CHECK(sched.observe(1.0));  // fifth consecutive failure fires the cut
    CHECK(sched.lr() == doctest::Approx(5e-4));
}

TEST_CASE("scheduler: improvement resets the counter") {
    PlateauScheduler sched(1e-3, 0.5, 3, 1e-6);
    sched.observe(1.0);
    sched.observe(1.0);
    sched.observe(1.0);
    CHECK_FALSE(sched.observe(0.5));  // improvement
    sched.observe(0.5);
    sched.observe(0.5);
    CHECK(sched.observe(0.5));
    CHECK(sched.lr() == doctest::Approx(5e-4));
}

TEST_CASE("scheduler: tiny improvements below min_delta do not count") {
    PlateauScheduler sched(1e-3, 0.5, 2, 1e-6);
    sched.observe(1.0);
    sched.observe(1.0 - 1e-9);
    CHECK(sched.observe(1.0 - 2e-9));
    CHECK(sched.lr() == doctest::Approx(5e-4));
}

TEST_CASE("scheduler: repeated cuts cross the minimum rate") {
    PlateauScheduler sched(4e-6, 0.5, 1, 1e-6);
    sched.observe(1.0);
    sched.observe(1.0);  // 2e-6
    CHECK_FALSE(sched.below_min());
    sched.observe(1.0);  // 1e-6
    CHECK_FALSE(sched.below_min());
    sched.observe(1.0);  // 5e-7
    CHECK(sched.below_min());
}

TEST_CASE("early stop fires after exactly patience non-improvements") {
    EarlyStopTracker stop(10, /*higher_better=*/true);
    CHECK_FALSE(stop.observe(0.5));  // sets the best
    for (int i = 1; i <= 9; ++i) CHECK_FALSE(stop.observe(0.5));
    CHECK(stop.observe(0.5));  // tenth consecutive failure
}

TEST_CASE("early stop resets on improvement (both directions)") {
    EarlyStopTracker up(2, true);
    up.observe(0.5);
    up.observe(0.4);
    CHECK_FALSE(up.observe(0.6));
    up.observe(0.5);
    CHECK(up.observe(0.5));

    EarlyStopTracker down(2, false);
    down.observe(1.0);
    down.observe(1.1);
    CHECK_FALSE(down.observe(0.9));
    down.observe(1.0);
    CHECK(down.observe(1.0));
}

TEST_CASE("roc_auc: perfect separation") {
    CHECK(roc_auc({0.9, 0.1}, {1, 0}) == 1.0);
}

TEST_CASE("roc_auc: all-equal scores give one half") {
    CHECK(roc_auc({0.3, 0.3, 0.3, 0.3}, {1, 0, 1, 0}) == 0.5);
}

TEST_CASE("roc_auc: single-class input reported") {
    CHECK_THROWS_WITH_AS(roc_auc({0.1, 0.2}, {1, 1}),
                         doctest::Contains("both classes"), Error);
}

TEST_CASE("roc_auc matches the pairwise oracle") {
    Rng rng(66);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + static_cast<int>(rng.bounded(99));
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        bool pos = false, neg = false;
        for (int i = 0; i < n; ++i) {
            // Coarse grid so ties actually happen.
            scores[i] = std::floor(rng.u01() * 8) / 8.0;
            labels[i] = rng.u01() < 0.4 ? 1 : 0;
            (labels[i] ? pos : neg) = true;
        }
        if (!pos) labels[0] = 1;
        if (!neg) labels[n - 1] = 0;
        CHECK(roc_auc(scores, labels) ==
              doctest::Approx(auc_oracle(scores, labels)).epsilon(1e-12));
    }
}

TEST_CASE("mae and accuracy hand cases") {
    CHECK(mae({1, 2}, {1, 4}) == 1.0);
    CHECK(accuracy({1, 0, 1}, {1, 0, 1}) == 1.0);
    CHECK(accuracy({1, 0, 0}, {1, 0, 1}) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("expert report: collapse flagged when one expert takes all") {
    auto rep = expert_distribution_report(std::vector<int>(50, 0), 4);
    CHECK(rep.frequencies[0] == 1.0);
    CHECK(rep.collapsed);
    CHECK(rep.reported_experts == std::vector<int>{0});
}

TEST_CASE("expert report: frequencies sum to one") {
    Rng rng(4);
    std::vector<int> chosen;
    for (int i = 0; i < 1000; ++i)
        chosen.push_back(static_cast<int>(rng.bounded(6)));
    auto rep = expert_distribution_report(chosen, 6);
    double sum = 0.0;
    for (double f : rep.frequencies) sum += f;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(rep.collapsed);
}

TEST_CASE("expert report: threshold filters rare experts") {
    std::vector<int> chosen(1000, 1);
    chosen[0] = 0;  // 0.1% on expert 0
    auto rep = expert_distribution_report(chosen, 3);
    CHECK(rep.reported_experts == std::vector<int>{1});
}

TEST_CASE("oversmoothing: identical rows give similarity one") {
    Tensor h({4, 3});
    for (int u = 0; u < 4; ++u)
        for (int j = 0; j < 3; ++j) h.at(u, j) = j + 1.0;
    auto rows = oversmoothing_diagnostic({h});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].mean_cosine == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rows[0].excluded_pairs == 0);
}

TEST_CASE("oversmoothing: orthogonal rows give zero") {
    Tensor h = Tensor::matrix(2, 2, {1, 0, 0, 1});
    auto rows = oversmoothing_diagnostic({h});
    CHECK(rows[0].mean_cosine == doctest::Approx(0.0));
}

TEST_CASE("oversmoothing: zero vectors are excluded and counted") {
    Tensor h = Tensor::matrix(3, 2, {1, 0, 0, 0, 1, 0});  // middle row zero
    auto rows = oversmoothing_diagnostic({h});
    CHECK(rows[0].pairs == 1);
    CHECK(rows[0].excluded_pairs == 2);
    CHECK(rows[0].mean_cosine == doctest::Approx(1.0));
}

TEST_CASE("checkpoint: exact float round trip") {
    ParamStore ps;
    Rng rng(12);
    Tensor t({3, 5});
    for (double& v : t.values()) v = (rng.u01() * 2 - 1) * 1e-7;
    t.values()[0] = 0.1;  // not exactly representable, exercises shortest repr
    t.values()[1] = 1.0 / 3.0;
    ps.add("layer.w", t);
    ps.add("layer.b", Tensor::row({-0.0, 5e-324, 1e300}));
    save_checkpoint(ps, R"({"note":"roundtrip"})", "ckpt_test.json");
    LoadedCheckpoint back = load_checkpoint("ckpt_test.json");
    REQUIRE(back.params.size() == 2);
    CHECK(back.params.value(0).values() == ps.value(0).values());
    CHECK(back.params.value(1).values() == ps.value(1).values());
    CHECK(back.params.name(0) == "layer.w");
    std::remove("ckpt_test.json");
}

TEST_CASE("evaluate: batched equals unbatched") {
    TrainConfig cfg = tiny_sbm_config("train_tmp_eval");
    auto graphs = generate_sbm(*cfg.sbm);
    Dataset ds = prepare_dataset(
        std::vector<Graph>(graphs.begin(), graphs.begin() + 6), cfg.model);
    DataSchema schema = infer_schema({&ds}, cfg.model.task);
    SeaModel m = SeaModel::build(cfg.model, schema, 3);
    TaskSpec spec;
    spec.task = cfg.model.task;
    spec.weights = class_weights(ds, schema.num_classes);
    MetricsReport a = evaluate(m, ds, spec, 6);
    MetricsReport b = evaluate(m, ds, spec, 1);
    CHECK(a.metric == doctest::Approx(b.metric).epsilon(1e-10));
    CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-10));
}

TEST_CASE("train: runs, writes artifacts, reproduces bit-identically") {
    TrainConfig cfg = tiny_sbm_config("train_tmp_a");
    TrainResult r1 = train(cfg);
    CHECK(r1.epochs_run == 3);
    CHECK(std::filesystem::exists(r1.checkpoint_path));
    CHECK(std::filesystem::exists(r1.log_path));
    CHECK(std::filesystem::exists(r1.experts_report_path));
    CHECK(std::filesystem::exists(r1.oversmoothing_path));

    cfg.out_dir = "train_tmp_b";
    TrainResult r2 = train(cfg);
    CHECK(read_file(r1.log_path) == read_file(r2.log_path));
    CHECK(read_file(r1.checkpoint_path) == read_file(r2.checkpoint_path));

    // Checkpoints reload into a working model.
    SeaModel m = load_model(r1.checkpoint_path);
    CHECK(m.cfg.num_experts == 2);
    CHECK(m.schema.num_classes == 2);

    std::filesystem::remove_all("train_tmp_a");
    std::filesystem::remove_all("train_tmp_b");
}

TEST_CASE("train config json round trip") {
    TrainConfig cfg = tiny_sbm_config("x");
    TrainConfig back = TrainConfig::from_json_text(cfg.to_json());
    CHECK(back.batch_size == cfg.batch_size);
    CHECK(back.sbm_train == cfg.sbm_train);
    CHECK(back.model.num_experts == cfg.model.num_experts);
    CHECK(back.model.task == cfg.model.task);
    CHECK(back.sbm->p_intra == cfg.sbm->p_intra);
}

TEST_CASE("train config validation") {
    TrainConfig cfg = tiny_sbm_config("x");
    cfg.lr_reduce_factor = 1.5;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.lr_reduce_factor = 0.5;
    cfg.train_data = "also_paths.jsonl";  // both sbm and paths
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("dataset/task mismatch rejected") {
    TrainConfig cfg = tiny_sbm_config("train_tmp_c");
    cfg.model.task = Task::GraphRegression;  // SBM data has node labels
    CHECK_THROWS_WITH_AS(train(cfg), doctest::Contains("mismatch"), Error);
}
