#pragma once

#include <vector>

namespace xt {

struct EvalReport {
    double auc = 0.0;
    double ap = 0.0;
    double acc_at_half = 0.0;
    int n_pos = 0;
    int n_neg = 0;
};

// Mann-Whitney AUC with 0.5 credit for ties, computed from the rank
// statistic in O(N log N). Exactly equals pair counting: the numerator is
// the integer 2*wins + ties, divided by 2*|P|*|N|.
double auc_exact(const std::vector<double>& scores, const std::vector<double>& labels);

// Mean precision at positive ranks, no interpolation. Descending stable sort,
// ties broken by original index.
double average_precision(const std::vector<double>& scores, const std::vector<double>& labels);

// Fraction of samples where (score >= threshold) matches the label.
double accuracy_at(const std::vector<double>& scores, const std::vector<double>& labels,
                   double threshold = 0.5);

EvalReport evaluate(const std::vector<double>& scores, const std::vector<double>& labels);

}  // namespace xt
