#include "xt/tensor.hpp"

#include <sstream>

#include "xt/errors.hpp"

namespace xt {

struct TapeCore {
    std::vector<Tensor> outputs;
    std::vector<std::function<void()>> backfns;
    bool consumed = false;
};

int64_t shape_numel(const std::vector<int>& shape) {
    int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
}

std::string shape_str(const std::vector<int>& shape) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
    for (int d : shape)
        if (d <= 0) throw ShapeError("tensor dimension must be positive, got " + shape_str(shape));
    Tensor t;
    t.impl_ = std::make_shared<Impl>();
    t.impl_->shape = std::move(shape);
    t.impl_->data.assign(static_cast<size_t>(shape_numel(t.impl_->shape)), 0.0);
    t.impl_->requires_grad = requires_grad;
    return t;
}

Tensor Tensor::from_data(std::vector<int> shape, std::vector<double> data, bool requires_grad) {
    if (shape_numel(shape) != static_cast<int64_t>(data.size()))
        throw ShapeError("data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_str(shape));
    Tensor t = zeros(std::move(shape), requires_grad);
    t.impl_->data = std::move(data);
    return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_data({1}, {value}, requires_grad);
}

const std::vector<int>& Tensor::shape() const { return impl_->shape; }

int64_t Tensor::size() const { return static_cast<int64_t>(impl_->data.size()); }

std::vector<double>& Tensor::data() { return impl_->data; }
const std::vector<double>& Tensor::data() const { return impl_->data; }

double Tensor::value() const {
    if (size() != 1) throw ShapeError("value() requires a scalar tensor, shape is " + shape_str(shape()));
    return impl_->data[0];
}

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }
void Tensor::set_requires_grad(bool rg) { impl_->requires_grad = rg; }

bool Tensor::has_grad() const { return impl_ && !impl_->grad.empty(); }

std::vector<double>& Tensor::grad() {
    ensure_grad();
    return impl_->grad;
}

const std::vector<double>& Tensor::grad() const {
    if (!has_grad()) throw TapeError("gradient not allocated");
    return impl_->grad;
}

void Tensor::ensure_grad() {
    if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
}

void Tensor::zero_grad() {
    if (!impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
}

void Tensor::accumulate_grad(const std::vector<double>& g) {
    if (!requires_grad()) return;
    ensure_grad();
    if (g.size() != impl_->grad.size())
        throw ShapeError("gradient shape mismatch: expected " + std::to_string(impl_->grad.size()) +
                         " values, got " + std::to_string(g.size()));
    for (size_t i = 0; i < g.size(); ++i) impl_->grad[i] += g[i];
}

Tensor Tensor::clone() const {
    Tensor t;
    t.impl_ = std::make_shared<Impl>();
    t.impl_->shape = impl_->shape;
    t.impl_->data = impl_->data;
    t.impl_->requires_grad = impl_->requires_grad;
    return t;
}

namespace {
thread_local Tape* g_active_tape = nullptr;
}

Tape::Tape() : core_(std::make_shared<TapeCore>()) {
    prev_ = g_active_tape;
    g_active_tape = this;
}

Tape::~Tape() { g_active_tape = prev_; }

Tape* Tape::active() { return g_active_tape; }

bool Tape::consumed() const { return core_->consumed; }

size_t Tape::node_count() const { return core_->outputs.size(); }

void Tape::record(const Tensor& out, std::function<void()> back) {
    if (core_->consumed) throw TapeError("recording onto a consumed tape");
    out.impl_->tape = core_;
    core_->outputs.push_back(out);
    core_->backfns.push_back(std::move(back));
}

void backward(const Tensor& loss) {
    if (!loss.defined()) throw TapeError("backward on an undefined tensor");
    if (loss.size() != 1)
        throw ShapeError("backward requires a scalar loss, shape is " + shape_str(loss.shape()));
    auto core = loss.impl_->tape.lock();
    if (!core || core->consumed)
        throw TapeError("stale tape: loss is not on a live, unconsumed tape");

    if (loss.impl_->grad.empty()) loss.impl_->grad.assign(1, 0.0);
    loss.impl_->grad[0] += 1.0;

    for (size_t i = core->outputs.size(); i-- > 0;) {
        if (core->outputs[i].has_grad()) core->backfns[i]();
    }
    core->consumed = true;
    core->outputs.clear();
    core->backfns.clear();
}

}  // namespace xt
