#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "xt/tensor.hpp"

namespace xt::ops {

// Tape-recording primitives. Each op validates shapes, runs the forward
// kernel, and (when an input requires grad and a tape is active) records a
// backward closure.

// Cross-correlation. input [N,C,H,W], kernel [F,C,kh,kw], bias [F].
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              int stride = 1, int padding = 0);

// 2x2 mean pooling; H and W must be even.
Tensor avg_pool2(const Tensor& input);

// input [N,D] * weight [D,E] + bias [E].
Tensor affine(const Tensor& input, const Tensor& weight, const Tensor& bias);

Tensor relu(const Tensor& input);     // subgradient at 0 is 0
Tensor sigmoid(const Tensor& input);

// [N,C,H,W] -> [N,C], spatial mean per channel.
Tensor global_mean_pool(const Tensor& input);

Tensor reshape(const Tensor& input, std::vector<int> new_shape);
Tensor add(const Tensor& a, const Tensor& b);          // same shape
Tensor scale(const Tensor& a, double c);               // constant multiplier
Tensor sum_squares(const Tensor& a);                   // scalar

// Mean binary cross-entropy over the batch. labels in [0,1] (soft labels from
// CutMix are valid). Scores are clamped to [1e-12, 1-1e-12] before the logs.
Tensor bce_loss(const Tensor& scores, const Tensor& labels);
inline constexpr double kBceClamp = 1e-12;

// WMW surrogate over positive/negative pairs (hard labels only; soft-labeled
// samples are excluded from both sets). Throws DegenerateDataError when
// either set is empty after exclusion.
Tensor wmw_auc_loss(const Tensor& scores, const Tensor& labels, double gamma, double p);

using EvalFn = std::function<double()>;

// Central-difference oracle: perturbs each coordinate of each named tensor in
// place, re-evaluates, restores. Independent of the tape machinery.
std::map<std::string, std::vector<double>> finite_diff_gradient(
    const EvalFn& eval, const std::map<std::string, Tensor>& params, double epsilon);

}  // namespace xt::ops
