#include "xt/ops.hpp"

#include <algorithm>
#include <cmath>

#include "xt/errors.hpp"
#include "xt/kernels.hpp"

namespace xt::ops {

namespace {

bool should_record(std::initializer_list<const Tensor*> inputs) {
    if (!Tape::active()) return false;
    for (const Tensor* t : inputs)
        if (t->requires_grad()) return true;
    return false;
}

void mark_and_record(const Tensor& out, std::function<void()> back) {
    const_cast<Tensor&>(out).set_requires_grad(true);
    Tape::active()->record(out, std::move(back));
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              int stride, int padding) {
    if (input.rank() != 4)
        throw ShapeError("conv2d: input must be rank 4 [N,C,H,W], got " + shape_str(input.shape()));
    if (kernel.rank() != 4)
        throw ShapeError("conv2d: kernel must be rank 4 [F,C,kh,kw], got " + shape_str(kernel.shape()));
    if (stride < 1) throw ShapeError("conv2d: stride must be positive");
    if (padding < 0) throw ShapeError("conv2d: padding must be non-negative");

    kernels::Conv2dDims d;
    d.n = input.dim(0); d.c = input.dim(1); d.h = input.dim(2); d.w = input.dim(3);
    d.f = kernel.dim(0); d.kh = kernel.dim(2); d.kw = kernel.dim(3);
    d.stride = stride; d.pad = padding;

    if (kernel.dim(1) != d.c)
        throw ShapeError("conv2d: channel dimension mismatch: input C=" + std::to_string(d.c) +
                         " vs kernel C=" + std::to_string(kernel.dim(1)));
    if (bias.rank() != 1 || bias.dim(0) != d.f)
        throw ShapeError("conv2d: bias dimension F must be " + std::to_string(d.f) +
                         ", got " + shape_str(bias.shape()));
    if (d.kh > d.h + 2 * padding)
        throw ShapeError("conv2d: kernel height " + std::to_string(d.kh) +
                         " exceeds padded input height " + std::to_string(d.h + 2 * padding));
    if (d.kw > d.w + 2 * padding)
        throw ShapeError("conv2d: kernel width " + std::to_string(d.kw) +
                         " exceeds padded input width " + std::to_string(d.w + 2 * padding));

    d.oh = (d.h + 2 * padding - d.kh) / stride + 1;
    d.ow = (d.w + 2 * padding - d.kw) / stride + 1;

    Tensor out = Tensor::zeros({d.n, d.f, d.oh, d.ow});
    kernels::conv2d_forward(input.data().data(), kernel.data().data(), bias.data().data(),
                            out.data().data(), d);

    if (should_record({&input, &kernel, &bias})) {
        mark_and_record(out, [input, kernel, bias, out, d]() {
            const double* gy = out.grad().data();
            if (input.requires_grad())
                kernels::conv2d_backward_input(gy, kernel.data().data(),
                                               const_cast<Tensor&>(input).grad().data(), d);
            if (kernel.requires_grad())
                kernels::conv2d_backward_weight(gy, input.data().data(),
                                                const_cast<Tensor&>(kernel).grad().data(), d);
            if (bias.requires_grad())
                kernels::conv2d_backward_bias(gy, const_cast<Tensor&>(bias).grad().data(), d);
        });
    }
    return out;
}

Tensor avg_pool2(const Tensor& input) {
    if (input.rank() != 4)
        throw ShapeError("avg_pool2: input must be rank 4, got " + shape_str(input.shape()));
    const int n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    if (h % 2 != 0 || w % 2 != 0)
        throw ShapeError("avg_pool2: spatial dims must be even, got H=" + std::to_string(h) +
                         " W=" + std::to_string(w));

    Tensor out = Tensor::zeros({n, c, h / 2, w / 2});
    kernels::avgpool2_forward(input.data().data(), out.data().data(), n, c, h, w);

    if (should_record({&input})) {
        mark_and_record(out, [input, out, n, c, h, w]() {
            kernels::avgpool2_backward(out.grad().data(),
                                       const_cast<Tensor&>(input).grad().data(), n, c, h, w);
        });
    }
    return out;
}

Tensor affine(const Tensor& input, const Tensor& weight, const Tensor& bias) {
    if (input.rank() != 2)
        throw ShapeError("affine: input must be rank 2 [N,D], got " + shape_str(input.shape()));
    if (weight.rank() != 2)
        throw ShapeError("affine: weight must be rank 2 [D,E], got " + shape_str(weight.shape()));
    const int n = input.dim(0), d = input.dim(1), e = weight.dim(1);
    if (weight.dim(0) != d)
        throw ShapeError("affine: inner dimension mismatch: input D=" + std::to_string(d) +
                         " vs weight D=" + std::to_string(weight.dim(0)));
    if (bias.rank() != 1 || bias.dim(0) != e)
        throw ShapeError("affine: bias dimension must be " + std::to_string(e) + ", got " +
                         shape_str(bias.shape()));

    Tensor out = Tensor::zeros({n, e});
    kernels::affine_forward(input.data().data(), weight.data().data(), bias.data().data(),
                            out.data().data(), n, d, e);

    if (should_record({&input, &weight, &bias})) {
        mark_and_record(out, [input, weight, bias, out, n, d, e]() {
            const double* gy = out.grad().data();
            if (input.requires_grad())
                kernels::affine_backward_input(gy, weight.data().data(),
                                               const_cast<Tensor&>(input).grad().data(), n, d, e);
            if (weight.requires_grad())
                kernels::affine_backward_weight(gy, input.data().data(),
                                                const_cast<Tensor&>(weight).grad().data(), n, d, e);
            if (bias.requires_grad())
                kernels::affine_backward_bias(gy, const_cast<Tensor&>(bias).grad().data(), n, e);
        });
    }
    return out;
}

Tensor relu(const Tensor& input) {
    Tensor out = Tensor::zeros(input.shape());
    const auto& x = input.data();
    auto& y = out.data();
    for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;

    if (should_record({&input})) {
        mark_and_record(out, [input, out]() {
            const auto& gy = out.grad();
            const auto& x = input.data();
            std::vector<double> gx(x.size());
            for (size_t i = 0; i < x.size(); ++i) gx[i] = x[i] > 0.0 ? gy[i] : 0.0;
            const_cast<Tensor&>(input).accumulate_grad(gx);
        });
    }
    return out;
}

Tensor sigmoid(const Tensor& input) {
    Tensor out = Tensor::zeros(input.shape());
    const auto& x = input.data();
    auto& y = out.data();
    for (size_t i = 0; i < x.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));

    if (should_record({&input})) {
        mark_and_record(out, [input, out]() {
            const auto& gy = out.grad();
            const auto& y = out.data();
            std::vector<double> gx(y.size());
            for (size_t i = 0; i < y.size(); ++i) gx[i] = gy[i] * y[i] * (1.0 - y[i]);
            const_cast<Tensor&>(input).accumulate_grad(gx);
        });
    }
    return out;
}

Tensor global_mean_pool(const Tensor& input) {
    if (input.rank() != 4)
        throw ShapeError("global_mean_pool: input must be rank 4, got " + shape_str(input.shape()));
    const int n = input.dim(0), c = input.dim(1), hw = input.dim(2) * input.dim(3);
    Tensor out = Tensor::zeros({n, c});
    const auto& x = input.data();
    auto& y = out.data();
    const double inv = 1.0 / hw;
    for (int p = 0; p < n * c; ++p) {
        double acc = 0.0;
        for (int k = 0; k < hw; ++k) acc += x[static_cast<size_t>(p) * hw + k];
        y[static_cast<size_t>(p)] = acc * inv;
    }

    if (should_record({&input})) {
        mark_and_record(out, [input, out, n, c, hw, inv]() {
            const auto& gy = out.grad();
            std::vector<double> gx(input.size());
            for (int p = 0; p < n * c; ++p)
                for (int k = 0; k < hw; ++k)
                    gx[static_cast<size_t>(p) * hw + k] = gy[static_cast<size_t>(p)] * inv;
            const_cast<Tensor&>(input).accumulate_grad(gx);
        });
    }
    return out;
}

Tensor reshape(const Tensor& input, std::vector<int> new_shape) {
    if (shape_numel(new_shape) != input.size())
        throw ShapeError("reshape: cannot view " + shape_str(input.shape()) + " as " +
                         shape_str(new_shape));
    Tensor out = Tensor::from_data(std::move(new_shape), input.data());

    if (should_record({&input})) {
        mark_and_record(out, [input, out]() {
            const_cast<Tensor&>(input).accumulate_grad(out.grad());
        });
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw ShapeError("add: shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    Tensor out = Tensor::zeros(a.shape());
    for (int64_t i = 0; i < a.size(); ++i)
        out.data()[static_cast<size_t>(i)] = a.data()[static_cast<size_t>(i)] + b.data()[static_cast<size_t>(i)];

    if (should_record({&a, &b})) {
        mark_and_record(out, [a, b, out]() {
            const_cast<Tensor&>(a).accumulate_grad(out.grad());
            const_cast<Tensor&>(b).accumulate_grad(out.grad());
        });
    }
    return out;
}

Tensor scale(const Tensor& a, double c) {
    Tensor out = Tensor::zeros(a.shape());
    for (int64_t i = 0; i < a.size(); ++i) out.data()[static_cast<size_t>(i)] = a.data()[static_cast<size_t>(i)] * c;

    if (should_record({&a})) {
        mark_and_record(out, [a, out, c]() {
            const auto& gy = out.grad();
            std::vector<double> gx(gy.size());
            for (size_t i = 0; i < gy.size(); ++i) gx[i] = gy[i] * c;
            const_cast<Tensor&>(a).accumulate_grad(gx);
        });
    }
    return out;
}

Tensor sum_squares(const Tensor& a) {
    double acc = 0.0;
    for (double v : a.data()) acc += v * v;
    Tensor out = Tensor::scalar(acc);

    if (should_record({&a})) {
        mark_and_record(out, [a, out]() {
            const double g = out.grad()[0];
            std::vector<double> gx(a.data().size());
            for (size_t i = 0; i < gx.size(); ++i) gx[i] = 2.0 * g * a.data()[i];
            const_cast<Tensor&>(a).accumulate_grad(gx);
        });
    }
    return out;
}

Tensor bce_loss(const Tensor& scores, const Tensor& labels) {
    if (scores.size() == 0 || scores.size() != labels.size())
        throw ShapeError("bce_loss: scores and labels must be equal-length and non-empty");
    const size_t n = scores.data().size();
    for (double y : labels.data())
        if (y < 0.0 || y > 1.0)
            throw ShapeError("bce_loss: label outside [0,1]: " + std::to_string(y));

    const double lo = kBceClamp, hi = 1.0 - kBceClamp;
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double s = std::clamp(scores.data()[i], lo, hi);
        const double y = labels.data()[i];
        acc += y * std::log(s) + (1.0 - y) * std::log(1.0 - s);
    }
    Tensor out = Tensor::scalar(-acc / static_cast<double>(n));

    if (should_record({&scores})) {
        mark_and_record(out, [scores, labels, out, n, lo, hi]() {
            const double g = out.grad()[0] / static_cast<double>(n);
            std::vector<double> gs(n);
            for (size_t i = 0; i < n; ++i) {
                const double s = std::clamp(scores.data()[i], lo, hi);
                const double y = labels.data()[i];
                gs[i] = -g * (y / s - (1.0 - y) / (1.0 - s));
            }
            const_cast<Tensor&>(scores).accumulate_grad(gs);
        });
    }
    return out;
}

Tensor wmw_auc_loss(const Tensor& scores, const Tensor& labels, double gamma, double p) {
    if (scores.size() == 0 || scores.size() != labels.size())
        throw ShapeError("wmw_auc_loss: scores and labels must be equal-length and non-empty");
    if (gamma <= 0.0 || gamma > 1.0) throw ShapeError("wmw_auc_loss: gamma must be in (0,1]");
    if (p <= 1.0) throw ShapeError("wmw_auc_loss: p must be > 1");

    std::vector<size_t> pos, neg;  // hard labels only
    for (size_t i = 0; i < labels.data().size(); ++i) {
        const double y = labels.data()[i];
        if (y == 1.0) pos.push_back(i);
        else if (y == 0.0) neg.push_back(i);
    }
    if (pos.empty() || neg.empty())
        throw DegenerateDataError("wmw_auc_loss: degenerate batch, needs both classes");

    const double inv = 1.0 / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
    double acc = 0.0;
    for (size_t i : pos)
        for (size_t j : neg) {
            const double d = scores.data()[i] - scores.data()[j];
            if (d < gamma) acc += std::pow(gamma - d, p);
        }
    Tensor out = Tensor::scalar(acc * inv);

    if (should_record({&scores})) {
        mark_and_record(out, [scores, out, pos, neg, gamma, p, inv]() {
            const double g = out.grad()[0] * inv;
            std::vector<double> gs(scores.data().size(), 0.0);
            for (size_t i : pos)
                for (size_t j : neg) {
                    const double d = scores.data()[i] - scores.data()[j];
                    if (d < gamma) {
                        const double t = g * p * std::pow(gamma - d, p - 1.0);
                        gs[i] -= t;
                        gs[j] += t;
                    }
                }
            const_cast<Tensor&>(scores).accumulate_grad(gs);
        });
    }
    return out;
}

std::map<std::string, std::vector<double>> finite_diff_gradient(
    const EvalFn& eval, const std::map<std::string, Tensor>& params, double epsilon) {
    if (epsilon < 1e-6 || epsilon > 1e-2)
        throw ShapeError("finite_diff_gradient: epsilon must be in [1e-6, 1e-2]");

    std::map<std::string, std::vector<double>> grads;
    for (const auto& [name, tensor] : params) {
        auto& data = const_cast<Tensor&>(tensor).data();
        std::vector<double> g(data.size());
        for (size_t i = 0; i < data.size(); ++i) {
            const double saved = data[i];
            data[i] = saved + epsilon;
            const double f_plus = eval();
            data[i] = saved - epsilon;
            const double f_minus = eval();
            data[i] = saved;
            if (!std::isfinite(f_plus) || !std::isfinite(f_minus))
                throw ShapeError("finite_diff_gradient: non-finite eval output at " + name);
            g[i] = (f_plus - f_minus) / (2.0 * epsilon);
        }
        grads[name] = std::move(g);
    }
    return grads;
}

}  // namespace xt::ops
