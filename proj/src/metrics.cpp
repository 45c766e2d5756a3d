#include "xt/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>

#include "xt/errors.hpp"

namespace xt {

namespace {

void check_labels(const std::vector<double>& scores, const std::vector<double>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw ShapeError("metrics: scores and labels must be equal-length and non-empty");
    for (double y : labels)
        if (y != 0.0 && y != 1.0) throw ShapeError("metrics: labels must be 0 or 1");
}

}  // namespace

double auc_exact(const std::vector<double>& scores, const std::vector<double>& labels) {
    check_labels(scores, labels);
    int64_t n_pos = 0, n_neg = 0;
    for (double y : labels) (y == 1.0 ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0)
        throw DegenerateDataError("auc_exact: needs at least one sample of each class");

    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    // Twice the positive rank sum, so tied groups (average rank = (lo+hi)/2)
    // stay in integer arithmetic.
    int64_t twice_pos_rank_sum = 0;
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const int64_t twice_avg_rank = static_cast<int64_t>(i + 1) + static_cast<int64_t>(j + 1);
        for (size_t k = i; k <= j; ++k)
            if (labels[order[k]] == 1.0) twice_pos_rank_sum += twice_avg_rank;
        i = j + 1;
    }

    const int64_t numer = twice_pos_rank_sum - n_pos * (n_pos + 1);  // = 2*wins + ties
    return static_cast<double>(numer) / static_cast<double>(2 * n_pos * n_neg);
}

double average_precision(const std::vector<double>& scores, const std::vector<double>& labels) {
    check_labels(scores, labels);
    int64_t n_pos = 0;
    for (double y : labels)
        if (y == 1.0) ++n_pos;
    if (n_pos == 0) throw DegenerateDataError("average_precision: no positive samples");

    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    double sum = 0.0;
    int64_t seen_pos = 0;
    for (size_t k = 0; k < order.size(); ++k) {
        if (labels[order[k]] == 1.0) {
            ++seen_pos;
            sum += static_cast<double>(seen_pos) / static_cast<double>(k + 1);
        }
    }
    return sum / static_cast<double>(n_pos);
}

double accuracy_at(const std::vector<double>& scores, const std::vector<double>& labels,
                   double threshold) {
    check_labels(scores, labels);
    int64_t correct = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        const bool predicted_positive = scores[i] >= threshold;
        if (predicted_positive == (labels[i] == 1.0)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(scores.size());
}

EvalReport evaluate(const std::vector<double>& scores, const std::vector<double>& labels) {
    EvalReport r;
    for (double y : labels) (y == 1.0 ? r.n_pos : r.n_neg)++;
    r.auc = auc_exact(scores, labels);
    r.ap = average_precision(scores, labels);
    r.acc_at_half = accuracy_at(scores, labels, 0.5);
    return r;
}

}  // namespace xt
