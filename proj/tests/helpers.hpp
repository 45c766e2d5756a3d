#pragma once

#include <vector>

#include "xt/blocknet.hpp"
#include "xt/rng.hpp"
#include "xt/tensor.hpp"

namespace xt::testing {

inline Tensor random_tensor(std::vector<int> shape, uint64_t seed, double lo = -1.0,
                            double hi = 1.0, bool requires_grad = false) {
    Rng rng(seed);
    Tensor t = Tensor::zeros(std::move(shape), requires_grad);
    for (auto& v : t.data()) v = rng.uniform(lo, hi);
    return t;
}

inline std::vector<SegmentSpec> tiny_spec(std::vector<int> channels, int kernel = 3) {
    std::vector<SegmentSpec> spec;
    for (int ch : channels) spec.push_back(SegmentSpec{{{ch, kernel}}, true});
    return spec;
}

// Random hard labels guaranteed to include both classes.
inline std::vector<double> random_hard_labels(size_t n, uint64_t seed) {
    Rng rng(seed);
    std::vector<double> y(n);
    for (auto& v : y) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
    y[0] = 0.0;
    y[n - 1] = 1.0;
    return y;
}

inline double max_rel_error(const std::vector<double>& got, const std::vector<double>& want,
                            double abs_floor = 1e-8) {
    double worst = 0.0;
    for (size_t i = 0; i < got.size(); ++i) {
        const double denom = std::max(std::abs(want[i]), abs_floor);
        worst = std::max(worst, std::abs(got[i] - want[i]) / denom);
    }
    return worst;
}

}  // namespace xt::testing
