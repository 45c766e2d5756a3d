#include "xt/blocknet.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "xt/errors.hpp"
#include "xt/ops.hpp"
#include "xt/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

namespace xt {

bool operator==(const SegmentSpec::ConvLayer& a, const SegmentSpec::ConvLayer& b) {
    return a.out_channels == b.out_channels && a.kernel_size == b.kernel_size;
}

bool operator==(const SegmentSpec& a, const SegmentSpec& b) {
    return a.conv_layers == b.conv_layers && a.ends_with_downsample == b.ends_with_downsample;
}

namespace {

std::string seg_name(int k, int j, const char* leaf) {
    return "seg" + std::to_string(k) + ".conv" + std::to_string(j) + "." + leaf;
}

void validate_spec(const std::vector<SegmentSpec>& spec) {
    if (spec.size() < 2)
        throw ShapeError("BlockNet requires K >= 2 segments, got " + std::to_string(spec.size()));
    for (size_t k = 0; k < spec.size(); ++k) {
        if (spec[k].conv_layers.empty())
            throw ShapeError("segment " + std::to_string(k + 1) + " has no conv layers");
        if (k + 1 < spec.size() && !spec[k].ends_with_downsample)
            throw ShapeError("segment " + std::to_string(k + 1) +
                             " must end with a downsample (only the last may omit it)");
        for (const auto& cl : spec[k].conv_layers) {
            if (cl.out_channels <= 0)
                throw ShapeError("segment " + std::to_string(k + 1) + ": out_channels must be positive");
            if (cl.kernel_size <= 0 || cl.kernel_size % 2 == 0)
                throw ShapeError("segment " + std::to_string(k + 1) + ": kernel_size must be odd");
        }
    }
}

}  // namespace

BlockNet BlockNet::build(std::vector<SegmentSpec> spec, int input_channels, uint64_t seed) {
    validate_spec(spec);
    BlockNet net;
    net.spec_ = std::move(spec);
    net.input_channels_ = input_channels;

    Rng rng(seed);
    auto kaiming = [&rng](std::vector<int> shape, int fan_in) {
        const double bound = std::sqrt(6.0 / fan_in);
        Tensor t = Tensor::zeros(std::move(shape), true);
        for (auto& v : t.data()) v = rng.uniform(-bound, bound);
        return t;
    };

    int in_c = input_channels;
    for (size_t k = 0; k < net.spec_.size(); ++k) {
        const auto& seg = net.spec_[k];
        for (size_t j = 0; j < seg.conv_layers.size(); ++j) {
            const auto& cl = seg.conv_layers[j];
            const int fan_in = in_c * cl.kernel_size * cl.kernel_size;
            net.params_[seg_name(static_cast<int>(k + 1), static_cast<int>(j + 1), "weight")] =
                kaiming({cl.out_channels, in_c, cl.kernel_size, cl.kernel_size}, fan_in);
            net.params_[seg_name(static_cast<int>(k + 1), static_cast<int>(j + 1), "bias")] =
                Tensor::zeros({cl.out_channels}, true);
            in_c = cl.out_channels;
        }
    }
    net.params_["head.weight"] = kaiming({in_c, 1}, in_c);
    net.params_["head.bias"] = Tensor::zeros({1}, true);
    return net;
}

int BlockNet::head_input_dim() const {
    return spec_.back().conv_layers.back().out_channels;
}

const Tensor& BlockNet::param(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw ShapeError("no parameter named " + name);
    return it->second;
}

Tensor BlockNet::forward_segment(int k, const Tensor& x) const {
    if (k < 1 || k > segment_count())
        throw ShapeError("segment index " + std::to_string(k) + " out of range");
    const auto& seg = spec_[static_cast<size_t>(k - 1)];
    Tensor h = x;
    for (size_t j = 0; j < seg.conv_layers.size(); ++j) {
        const int ks = seg.conv_layers[j].kernel_size;
        h = ops::relu(ops::conv2d(h, param(seg_name(k, static_cast<int>(j + 1), "weight")),
                                  param(seg_name(k, static_cast<int>(j + 1), "bias")),
                                  /*stride=*/1, /*padding=*/(ks - 1) / 2));
    }
    if (seg.ends_with_downsample) h = ops::avg_pool2(h);
    return h;
}

Tensor BlockNet::forward_head(const Tensor& x) const {
    Tensor pooled = ops::global_mean_pool(x);
    Tensor logits = ops::affine(pooled, param("head.weight"), param("head.bias"));
    Tensor scores = ops::sigmoid(logits);
    return ops::reshape(scores, {scores.dim(0)});
}

Tensor BlockNet::forward(const Tensor& x) const {
    Tensor h = x;
    for (int k = 1; k <= segment_count(); ++k) h = forward_segment(k, h);
    return forward_head(h);
}

std::vector<std::string> BlockNet::segment_param_names(int k) const {
    std::vector<std::string> names;
    const auto& seg = spec_[static_cast<size_t>(k - 1)];
    for (size_t j = 0; j < seg.conv_layers.size(); ++j) {
        names.push_back(seg_name(k, static_cast<int>(j + 1), "weight"));
        names.push_back(seg_name(k, static_cast<int>(j + 1), "bias"));
    }
    return names;
}

std::vector<std::string> BlockNet::head_param_names() const {
    return {"head.weight", "head.bias"};
}

void BlockNet::zero_grads() {
    for (auto& [name, t] : params_) t.zero_grad();
}

BlockNet BlockNet::clone() const {
    BlockNet net;
    net.spec_ = spec_;
    net.input_channels_ = input_channels_;
    for (const auto& [name, t] : params_) net.params_[name] = t.clone();
    return net;
}

void BlockNet::copy_params_from(const BlockNet& other) {
    if (!(spec_ == other.spec_)) throw ShapeError("copy_params_from: spec mismatch");
    for (auto& [name, t] : params_) t.data() = other.param(name).data();
}

namespace {

constexpr char kMagic[4] = {'X', 'T', 'C', 'K'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ofstream& os, uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
}

uint32_t get_u32(std::ifstream& is, const std::string& what) {
    uint32_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), 4))
        throw CheckpointError("truncated checkpoint while reading " + what);
    return v;
}

}  // namespace

void BlockNet::save_checkpoint(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open checkpoint for writing: " + path.string());

    os.write(kMagic, 4);
    put_u32(os, kVersion);
    put_u32(os, static_cast<uint32_t>(params_.size()));
    for (const auto& [name, t] : params_) {
        put_u32(os, static_cast<uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(os, static_cast<uint32_t>(t.rank()));
        for (int d : t.shape()) put_u32(os, static_cast<uint32_t>(d));
        for (double v : t.data()) {
            const float f = static_cast<float>(v);
            os.write(reinterpret_cast<const char*>(&f), 4);
        }
    }
    if (!os) throw IoError("write failure on checkpoint: " + path.string());
}

BlockNet BlockNet::load_checkpoint(const std::filesystem::path& path,
                                   std::vector<SegmentSpec> spec, int input_channels) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw CheckpointError("cannot open checkpoint: " + path.string());

    char magic[4] = {};
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw CheckpointError("bad checkpoint magic in " + path.string());
    const uint32_t version = get_u32(is, "version");
    if (version != kVersion)
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));

    BlockNet net = build(std::move(spec), input_channels, /*seed=*/0);

    const uint32_t count = get_u32(is, "parameter count");
    if (count != net.params_.size())
        throw CheckpointError("checkpoint has " + std::to_string(count) + " parameters, spec expects " +
                              std::to_string(net.params_.size()));

    for (uint32_t i = 0; i < count; ++i) {
        const uint32_t name_len = get_u32(is, "name length");
        std::string name(name_len, '\0');
        if (!is.read(name.data(), name_len)) throw CheckpointError("truncated checkpoint name");
        auto it = net.params_.find(name);
        if (it == net.params_.end())
            throw CheckpointError("checkpoint parameter " + name + " not in spec");
        const uint32_t rank = get_u32(is, "rank of " + name);
        std::vector<int> dims(rank);
        for (auto& d : dims) d = static_cast<int>(get_u32(is, "dims of " + name));
        if (dims != it->second.shape())
            throw CheckpointError("shape mismatch for " + name + ": checkpoint " + shape_str(dims) +
                                  " vs spec " + shape_str(it->second.shape()));
        for (auto& v : it->second.data()) {
            float f = 0.0f;
            if (!is.read(reinterpret_cast<char*>(&f), 4))
                throw CheckpointError("truncated checkpoint values for " + name);
            v = static_cast<double>(f);
        }
    }
    return net;
}

}  // namespace xt
