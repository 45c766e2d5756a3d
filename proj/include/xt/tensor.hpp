#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace xt {

struct TapeCore;

// Dense 64-bit float tensor, row-major. Tensor is a shared handle: copies
// alias the same storage, which is what the tape needs to accumulate
// gradients into parameters across ops.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
    static Tensor from_data(std::vector<int> shape, std::vector<double> data,
                            bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }

    const std::vector<int>& shape() const;
    int dim(int i) const { return shape()[static_cast<size_t>(i)]; }
    int rank() const { return static_cast<int>(shape().size()); }
    int64_t size() const;

    std::vector<double>& data();
    const std::vector<double>& data() const;
    double value() const;  // scalar tensors only

    bool requires_grad() const;
    void set_requires_grad(bool rg);

    // Gradient buffer. Allocated lazily; has_grad() is false until the first
    // accumulation (or ensure_grad) touches it.
    bool has_grad() const;
    std::vector<double>& grad();
    const std::vector<double>& grad() const;
    void ensure_grad();
    void zero_grad();

    // Accumulates g into the grad buffer iff requires_grad. No-op otherwise.
    void accumulate_grad(const std::vector<double>& g);

    Tensor clone() const;  // deep copy of values; grad not copied

    bool same_impl(const Tensor& other) const { return impl_ == other.impl_; }

private:
    struct Impl {
        std::vector<int> shape;
        std::vector<double> data;
        std::vector<double> grad;
        bool requires_grad = false;
        std::weak_ptr<TapeCore> tape;
    };
    std::shared_ptr<Impl> impl_;

    friend class Tape;
    friend void backward(const Tensor&);
};

// Reverse-mode tape. Single-use: one backward sweep consumes it. Ops record
// onto the innermost live Tape of the current thread; with no active tape a
// forward pass is plain evaluation. Nodes are stored in creation order, which
// is a topological order by construction.
class Tape {
public:
    Tape();
    ~Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    static Tape* active();

    bool consumed() const;
    size_t node_count() const;

    // out is the node output; back reads out's grad and accumulates into the
    // node inputs. Called at most once, in reverse recording order.
    void record(const Tensor& out, std::function<void()> back);

private:
    std::shared_ptr<TapeCore> core_;
    Tape* prev_ = nullptr;

    friend void backward(const Tensor&);
};

// Seeds d(loss)/d(loss) = 1 and sweeps the loss's tape in reverse, adding
// d(loss)/d(t) into every requires_grad tensor t reachable from loss.
// Repeated calls on fresh tapes accumulate; the swept tape is consumed.
void backward(const Tensor& loss);

std::string shape_str(const std::vector<int>& shape);
int64_t shape_numel(const std::vector<int>& shape);

}  // namespace xt
