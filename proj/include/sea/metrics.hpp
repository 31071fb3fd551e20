#pragma once

#include <string>
#include <vector>

#include "sea/tensor.hpp"

namespace sea {

double mae(const std::vector<double>& preds, const std::vector<double>& targets);
double accuracy(const std::vector<int>& preds, const std::vector<int>& targets);

// Mann-Whitney statistic P(score_pos > score_neg) + 0.5 P(tie), computed by
// sorting with averaged tie ranks. Throws on single-class input.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct ExpertDistributionReport {
    std::vector<double> frequencies;    // per expert, sums to 1
    std::vector<int> reported_experts;  // frequency >= threshold
    double threshold = 0.01;
    bool collapsed = false;  // one expert holds >= 95% of nodes
    std::size_t total_nodes = 0;
};

ExpertDistributionReport expert_distribution_report(
    const std::vector<int>& chosen_experts, int num_experts,
    double threshold = 0.01);

struct OversmoothingRow {
    int layer = 0;  // 1-based trunk layer
    double mean_cosine = 0.0;
    std::size_t pairs = 0;
    std::size_t excluded_pairs = 0;  // pairs involving zero vectors
};

// Mean pairwise cosine similarity of node states per trunk layer.
std::vector<OversmoothingRow> oversmoothing_diagnostic(
    const std::vector<Tensor>& layer_states);

}  // namespace sea
