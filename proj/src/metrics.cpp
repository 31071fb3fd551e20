#include "sea/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sea/error.hpp"

namespace sea {

double mae(const std::vector<double>& preds, const std::vector<double>& targets) {
    require(!preds.empty() && preds.size() == targets.size(),
            "mae: size mismatch or empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        s += std::abs(preds[i] - targets[i]);
    return s / static_cast<double>(preds.size());
}

double accuracy(const std::vector<int>& preds, const std::vector<int>& targets) {
    require(!preds.empty() && preds.size() == targets.size(),
            "accuracy: size mismatch or empty input");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i] == targets[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    require(scores.size() == labels.size() && !scores.empty(),
            "roc_auc: size mismatch or empty input");
    std::size_t pos = 0, neg = 0;
    for (int y : labels) {
        require(y == 0 || y == 1, "roc_auc: labels must be 0/1, got ", y);
        y == 1 ? ++pos : ++neg;
    }
    require(pos > 0 && neg > 0, "roc_auc: both classes must be present (",
            pos, " positive, ", neg, " negative)");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] < scores[b];
    });

    // Average ranks over tied scores, then the Mann-Whitney identity.
    std::vector<double> rank(scores.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() &&
               scores[order[j + 1]] == scores[order[i]])
            ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }
    double rank_sum_pos = 0.0;
    for (std::size_t k = 0; k < scores.size(); ++k)
        if (labels[k] == 1) rank_sum_pos += rank[k];
    const double u = rank_sum_pos - 0.5 * static_cast<double>(pos) *
                                        static_cast<double>(pos + 1);
    return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

ExpertDistributionReport expert_distribution_report(
    const std::vector<int>& chosen_experts, int num_experts, double threshold) {
    require(!chosen_experts.empty(), "expert report: no routing decisions");
    require(num_experts >= 1, "expert report: num_experts must be >= 1");
    ExpertDistributionReport r;
    r.threshold = threshold;
    r.total_nodes = chosen_experts.size();
    r.frequencies.assign(num_experts, 0.0);
    for (int e : chosen_experts) {
        require(e >= 0 && e < num_experts, "expert report: expert ", e,
                " out of range");
        r.frequencies[e] += 1.0;
    }
    for (double& f : r.frequencies) f /= static_cast<double>(r.total_nodes);
    for (int e = 0; e < num_experts; ++e) {
        if (r.frequencies[e] >= threshold) r.reported_experts.push_back(e);
        if (r.frequencies[e] >= 0.95) r.collapsed = true;
    }
    return r;
}

std::vector<OversmoothingRow> oversmoothing_diagnostic(
    const std::vector<Tensor>& layer_states) {
    require(!layer_states.empty(), "oversmoothing: trunk depth must be >= 1");
    std::vector<OversmoothingRow> rows;
    for (std::size_t l = 0; l < layer_states.size(); ++l) {
        const Tensor& h = layer_states[l];
        const std::size_t n = h.rows();
        std::vector<double> norms(n);
        for (std::size_t u = 0; u < n; ++u) {
            double s = 0.0;
            for (std::size_t j = 0; j < h.cols(); ++j)
                s += h.at(u, j) * h.at(u, j);
            norms[u] = std::sqrt(s);
        }
        OversmoothingRow row;
        row.layer = static_cast<int>(l) + 1;
        double total = 0.0;
        for (std::size_t u = 0; u < n; ++u) {
            for (std::size_t v = u + 1; v < n; ++v) {
                if (norms[u] == 0.0 || norms[v] == 0.0) {
                    ++row.excluded_pairs;
                    continue;
                }
                double dot = 0.0;
                for (std::size_t j = 0; j < h.cols(); ++j)
                    dot += h.at(u, j) * h.at(v, j);
                total += dot / (norms[u] * norms[v]);
                ++row.pairs;
            }
        }
        row.mean_cosine = row.pairs > 0 ? total / static_cast<double>(row.pairs)
                                        : 0.0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace sea
