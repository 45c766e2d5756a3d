#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "xt/tensor.hpp"

namespace xt {

// One crossing unit: a stack of same-padded 3x3-style convs (+relu), ending
// at a downsampling boundary.
struct SegmentSpec {
    struct ConvLayer {
        int out_channels;
        int kernel_size;  // odd, so "same" padding is well defined
    };
    std::vector<ConvLayer> conv_layers;
    bool ends_with_downsample = true;
};

bool operator==(const SegmentSpec::ConvLayer& a, const SegmentSpec::ConvLayer& b);
bool operator==(const SegmentSpec& a, const SegmentSpec& b);

// Segmented CNN binary classifier: K >= 2 segments, then a head of
// global mean pool -> affine(D -> 1) -> sigmoid. Parameters live in a name
// ordered registry (seg{k}.conv{j}.weight, seg{k}.conv{j}.bias, head.weight,
// head.bias; k and j are 1-based).
class BlockNet {
public:
    BlockNet() = default;

    // Kaiming-uniform conv/affine weights, zero biases, all draws from one
    // seeded stream: identical (spec, seed) gives bit-identical parameters.
    static BlockNet build(std::vector<SegmentSpec> spec, int input_channels, uint64_t seed);

    int segment_count() const { return static_cast<int>(spec_.size()); }
    const std::vector<SegmentSpec>& spec() const { return spec_; }
    int input_channels() const { return input_channels_; }
    int head_input_dim() const;

    // k is 1-based. Applies segment k's conv+relu stack, then its downsample.
    Tensor forward_segment(int k, const Tensor& x) const;
    Tensor forward_head(const Tensor& x) const;  // -> scores [N] in (0,1)
    Tensor forward(const Tensor& x) const;

    std::map<std::string, Tensor>& params() { return params_; }
    const std::map<std::string, Tensor>& params() const { return params_; }
    const Tensor& param(const std::string& name) const;

    std::vector<std::string> segment_param_names(int k) const;
    std::vector<std::string> head_param_names() const;

    void zero_grads();
    BlockNet clone() const;           // deep copy of parameters
    void copy_params_from(const BlockNet& other);

    // Checkpoint file, bit-exact layout:
    //   "XTCK" | version u32 LE (=1) | param count u32 LE |
    //   per parameter (name-sorted): name length u32 LE, UTF-8 name,
    //   rank u32 LE, dims u32 LE each, raw f32 LE values row-major.
    void save_checkpoint(const std::filesystem::path& path) const;
    static BlockNet load_checkpoint(const std::filesystem::path& path,
                                    std::vector<SegmentSpec> spec, int input_channels);

private:
    std::vector<SegmentSpec> spec_;
    int input_channels_ = 0;
    std::map<std::string, Tensor> params_;
};

}  // namespace xt
