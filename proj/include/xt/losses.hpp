#pragma once

#include <optional>

#include "xt/blocknet.hpp"
#include "xt/tensor.hpp"

namespace xt {

// Per-batch loss record. total is the differentiable combined loss
//   total = alpha*(l1+l2) + beta*l3 + (1-beta)*l_auc + s*omega_fc
// with alpha treated as a constant during differentiation.
struct LossBundle {
    Tensor total;
    double l1 = 0.0, l2 = 0.0, l3 = 0.0;
    double l_auc = 0.0;
    double alpha = 0.0;
    double beta = 0.0, s = 0.0;
    double omega_fc = 0.0;
    bool auc_active = false;  // false when the batch had one class after soft-label exclusion
};

// Mean binary cross-entropy; accepts soft labels in [0,1].
Tensor bce(const Tensor& scores, const Tensor& labels);

// Pairwise WMW term: 0 once si - sj >= gamma, else (gamma - (si - sj))^p.
// Subgradient 0 on the boundary.
double wmw_pair(double si, double sj, double gamma, double p);

// Mean of wmw_pair over all positive x negative pairs (hard labels only).
Tensor auc_loss(const Tensor& scores, const Tensor& labels, double gamma, double p);

// 2*l3/(l1+l2); 0 when l1+l2 < 1e-12 (covers the alpha-starts-at-zero rule
// and degenerate denominators). Plain double in, double out: the coefficient
// never joins the tape.
double alpha_coefficient(double l1, double l2, double l3);

// L2 penalty on the scoring head's affine weight and bias.
Tensor l2_fc(const BlockNet& net);

// Combined per-batch loss. AUC term is computed on out3 only; batches left
// single-class by soft-label exclusion skip it (l_auc = 0, auc_active=false).
// fixed_alpha overrides the Eq. 3 coefficient (first batch of a run, or the
// canned general-transfer config).
LossBundle target_loss(const Tensor& out1, const Tensor& out2, const Tensor& out3,
                       const Tensor& labels, const BlockNet& master, double beta, double s,
                       double gamma, double p, std::optional<double> fixed_alpha = std::nullopt);

}  // namespace xt
