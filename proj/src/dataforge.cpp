#include "xt/dataforge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "xt/errors.hpp"
#include "xt/kernels.hpp"
#include "xt/rng.hpp"

namespace xt {

int SampleManifest::count_with_label(double label) const {
    int n = 0;
    for (const auto& e : entries)
        if (e.label == label) ++n;
    return n;
}

// ---------------------------------------------------------------------------
// XIMG + manifest IO
// ---------------------------------------------------------------------------

namespace {

constexpr char kXimgMagic[4] = {'X', 'I', 'M', 'G'};
constexpr uint32_t kXimgVersion = 1;

void put_u32(std::ofstream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }

uint32_t get_u32(std::ifstream& is, const std::string& path) {
    uint32_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), 4)) throw IoError("truncated XIMG file: " + path);
    return v;
}

}  // namespace

void write_ximg(const std::filesystem::path& path, const Image& img) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os.write(kXimgMagic, 4);
    put_u32(os, kXimgVersion);
    put_u32(os, static_cast<uint32_t>(img.c));
    put_u32(os, static_cast<uint32_t>(img.h));
    put_u32(os, static_cast<uint32_t>(img.w));
    for (double v : img.pix) {
        const float f = static_cast<float>(v);
        os.write(reinterpret_cast<const char*>(&f), 4);
    }
    if (!os) throw IoError("write failure: " + path.string());
}

Image read_ximg(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open XIMG file: " + path.string());
    char magic[4] = {};
    if (!is.read(magic, 4) || std::memcmp(magic, kXimgMagic, 4) != 0)
        throw IoError("bad XIMG magic in " + path.string());
    const uint32_t version = get_u32(is, path.string());
    if (version != kXimgVersion)
        throw IoError("unsupported XIMG version " + std::to_string(version) + " in " + path.string());
    Image img;
    img.c = static_cast<int>(get_u32(is, path.string()));
    img.h = static_cast<int>(get_u32(is, path.string()));
    img.w = static_cast<int>(get_u32(is, path.string()));
    if (img.c <= 0 || img.h <= 0 || img.w <= 0)
        throw IoError("bad XIMG dimensions in " + path.string());
    img.pix.resize(static_cast<size_t>(img.c) * img.h * img.w);
    for (auto& v : img.pix) {
        float f = 0.0f;
        if (!is.read(reinterpret_cast<char*>(&f), 4))
            throw IoError("truncated XIMG file: " + path.string());
        v = static_cast<double>(f);
    }
    return img;
}

void write_manifest(const std::filesystem::path& csv_path, const SampleManifest& manifest) {
    std::ofstream os(csv_path, std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + csv_path.string());
    os << "path,label\n";
    for (const auto& e : manifest.entries) os << e.path << "," << static_cast<int>(e.label) << "\n";
    if (!os) throw IoError("write failure: " + csv_path.string());
}

SampleManifest load_manifest(const std::filesystem::path& csv_path) {
    std::ifstream is(csv_path);
    if (!is) throw IoError("cannot open manifest: " + csv_path.string());
    SampleManifest m;
    m.root = csv_path.parent_path();
    std::string line;
    if (!std::getline(is, line) || line != "path,label")
        throw IoError("manifest missing 'path,label' header: " + csv_path.string());
    size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto comma = line.rfind(',');
        if (comma == std::string::npos)
            throw IoError("manifest line " + std::to_string(line_no) + " has no comma");
        const std::string path = line.substr(0, comma);
        const std::string label_str = line.substr(comma + 1);
        if (label_str != "0" && label_str != "1")
            throw IoError("manifest line " + std::to_string(line_no) + ": label must be 0 or 1");
        m.entries.push_back({path, label_str == "1" ? 1.0 : 0.0});
    }
    for (const auto& e : m.entries)
        if (!std::filesystem::exists(m.root / e.path))
            throw IoError("manifest references missing file: " + (m.root / e.path).string());
    return m;
}

// ---------------------------------------------------------------------------
// synthetic domains
// ---------------------------------------------------------------------------

namespace {

double artifact_at(const DomainRecipe& r, int row, int col) {
    const double t = static_cast<double>(r.artifact_period);
    if (r.orientation == Orientation::Axis)
        return 0.5 * (std::cos(2.0 * M_PI * col / t) + std::cos(2.0 * M_PI * row / t));
    return std::cos(2.0 * M_PI * (row + col) / t);
}

Image base_field(const DomainRecipe& r, Rng& rng) {
    Image img;
    img.c = r.channels;
    img.h = r.height;
    img.w = r.width;
    img.pix.resize(static_cast<size_t>(r.channels) * r.height * r.width);
    for (auto& v : img.pix) v = rng.normal();
    img = gaussian_blur(img, r.texture_scale);

    double mean = 0.0;
    for (double v : img.pix) mean += v;
    mean /= static_cast<double>(img.pix.size());
    double var = 0.0;
    for (double v : img.pix) var += (v - mean) * (v - mean);
    var /= static_cast<double>(img.pix.size());
    const double sd = std::sqrt(var);

    for (auto& v : img.pix) {
        const double z = sd > 0.0 ? (v - mean) / sd : 0.0;
        v = std::clamp(0.5 + 0.18 * z, 0.0, 1.0);
    }
    return img;
}

}  // namespace

SampleManifest generate_domain(const DomainRecipe& recipe, int count_real, int count_fake,
                               uint64_t seed, const std::filesystem::path& out_dir) {
    if (count_real < 0 || count_fake < 0)
        throw ConfigError("generate_domain: counts must be non-negative");
    if (recipe.artifact_period < 2)
        throw ConfigError("generate_domain: artifact_period must be >= 2");

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir.string());

    SampleManifest manifest;
    manifest.root = out_dir;

    char name[32];
    for (int i = 0; i < count_real; ++i) {
        Rng rng(mix64(seed, 1, static_cast<uint64_t>(i)));
        Image img = base_field(recipe, rng);
        std::snprintf(name, sizeof(name), "real_%05d.ximg", i);
        write_ximg(out_dir / name, img);
        manifest.entries.push_back({name, 0.0});
    }
    for (int i = 0; i < count_fake; ++i) {
        Rng rng(mix64(seed, 2, static_cast<uint64_t>(i)));
        Image img = base_field(recipe, rng);
        for (int ch = 0; ch < img.c; ++ch)
            for (int r = 0; r < img.h; ++r)
                for (int c = 0; c < img.w; ++c)
                    img.at(ch, r, c) = std::clamp(
                        img.at(ch, r, c) + recipe.artifact_amplitude * artifact_at(recipe, r, c),
                        0.0, 1.0);
        std::snprintf(name, sizeof(name), "fake_%05d.ximg", i);
        write_ximg(out_dir / name, img);
        manifest.entries.push_back({name, 1.0});
    }
    write_manifest(out_dir / "manifest.csv", manifest);
    return manifest;
}

// ---------------------------------------------------------------------------
// augmentations
// ---------------------------------------------------------------------------

Image gaussian_blur(const Image& img, double sigma) {
    if (sigma <= 0.0) throw ConfigError("gaussian_blur: sigma must be positive");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> taps(static_cast<size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double v = std::exp(-0.5 * (k * k) / (sigma * sigma));
        taps[static_cast<size_t>(k + radius)] = v;
        sum += v;
    }
    for (auto& t : taps) t /= sum;

    Image out = img;
    std::vector<double> tmp(static_cast<size_t>(img.h) * img.w);
    for (int ch = 0; ch < img.c; ++ch) {
        const double* src = img.pix.data() + static_cast<size_t>(ch) * img.h * img.w;
        double* dst = out.pix.data() + static_cast<size_t>(ch) * img.h * img.w;
        kernels::sep_filter(src, tmp.data(), img.h, img.w, taps.data(), radius, true);
        kernels::sep_filter(tmp.data(), dst, img.h, img.w, taps.data(), radius, false);
    }
    return out;
}

namespace {

// JPEG Annex-K luminance quantization table.
constexpr int kAnnexK[64] = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99};

struct DctBasis {
    double m[8][8];  // m[u][x]: orthonormal DCT-II row u at sample x
    DctBasis() {
        for (int u = 0; u < 8; ++u) {
            const double cu = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            for (int x = 0; x < 8; ++x)
                m[u][x] = cu * std::cos((2.0 * x + 1.0) * u * M_PI / 16.0);
        }
    }
};

const DctBasis& dct_basis() {
    static const DctBasis basis;
    return basis;
}

void dct8x8(const double in[8][8], double out[8][8], bool inverse) {
    const auto& b = dct_basis();
    double tmp[8][8];
    for (int r = 0; r < 8; ++r)  // transform rows
        for (int u = 0; u < 8; ++u) {
            double acc = 0.0;
            for (int x = 0; x < 8; ++x) acc += (inverse ? b.m[x][u] : b.m[u][x]) * in[r][x];
            tmp[r][u] = acc;
        }
    for (int c = 0; c < 8; ++c)  // transform columns
        for (int u = 0; u < 8; ++u) {
            double acc = 0.0;
            for (int y = 0; y < 8; ++y) acc += (inverse ? b.m[y][u] : b.m[u][y]) * tmp[y][c];
            out[u][c] = acc;
        }
}

int reflect_idx(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

}  // namespace

std::vector<int> jpeg_quant_table(int quality) {
    if (quality < 1 || quality > 100) throw ConfigError("jpeg quality must be in 1..100");
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    std::vector<int> table(64);
    for (int i = 0; i < 64; ++i)
        table[static_cast<size_t>(i)] = std::clamp((kAnnexK[i] * scale + 50) / 100, 1, 255);
    return table;
}

Image jpeg_proxy(const Image& img, int quality) {
    const std::vector<int> table = jpeg_quant_table(quality);
    const int ph = (img.h + 7) / 8 * 8;
    const int pw = (img.w + 7) / 8 * 8;

    Image out = img;
    for (int ch = 0; ch < img.c; ++ch) {
        for (int by = 0; by < ph; by += 8)
            for (int bx = 0; bx < pw; bx += 8) {
                double block[8][8], coef[8][8], rec[8][8];
                for (int r = 0; r < 8; ++r)
                    for (int c = 0; c < 8; ++c)
                        block[r][c] = img.at(ch, reflect_idx(by + r, img.h),
                                             reflect_idx(bx + c, img.w)) * 255.0 - 128.0;
                dct8x8(block, coef, false);
                for (int r = 0; r < 8; ++r)
                    for (int c = 0; c < 8; ++c) {
                        const double q = static_cast<double>(table[static_cast<size_t>(r * 8 + c)]);
                        coef[r][c] = std::round(coef[r][c] / q) * q;
                    }
                dct8x8(coef, rec, true);
                for (int r = 0; r < 8; ++r)
                    for (int c = 0; c < 8; ++c) {
                        const int rr = by + r, cc = bx + c;
                        if (rr < img.h && cc < img.w)
                            out.at(ch, rr, cc) = std::clamp((rec[r][c] + 128.0) / 255.0, 0.0, 1.0);
                    }
            }
    }
    return out;
}

std::pair<Image, double> cutmix(const Image& a, double label_a, const Image& b, double label_b,
                                double lambda, uint64_t box_seed) {
    if (a.c != b.c || a.h != b.h || a.w != b.w)
        throw ShapeError("cutmix: images must have identical shape");
    if (lambda < 0.0 || lambda > 1.0) throw ConfigError("cutmix: lambda must be in [0,1]");

    const double frac = std::sqrt(1.0 - lambda);
    const int bw = static_cast<int>(std::lround(a.w * frac));
    const int bh = static_cast<int>(std::lround(a.h * frac));

    Rng rng(box_seed);
    const int cx = static_cast<int>(rng.bounded(static_cast<uint64_t>(a.w)));
    const int cy = static_cast<int>(rng.bounded(static_cast<uint64_t>(a.h)));
    const int x0 = std::clamp(cx - bw / 2, 0, a.w);
    const int x1 = std::clamp(cx - bw / 2 + bw, 0, a.w);
    const int y0 = std::clamp(cy - bh / 2, 0, a.h);
    const int y1 = std::clamp(cy - bh / 2 + bh, 0, a.h);

    Image out = a;
    for (int ch = 0; ch < a.c; ++ch)
        for (int r = y0; r < y1; ++r)
            for (int c = x0; c < x1; ++c) out.at(ch, r, c) = b.at(ch, r, c);

    const double area = static_cast<double>(x1 - x0) * static_cast<double>(y1 - y0);
    const double lambda_adj = 1.0 - area / (static_cast<double>(a.h) * a.w);
    return {std::move(out), lambda_adj * label_a + (1.0 - lambda_adj) * label_b};
}

// ---------------------------------------------------------------------------
// batching
// ---------------------------------------------------------------------------

Dataset load_dataset(const SampleManifest& manifest) {
    Dataset data;
    data.images.reserve(manifest.entries.size());
    data.labels.reserve(manifest.entries.size());
    for (const auto& e : manifest.entries) {
        data.images.push_back(read_ximg(manifest.root / e.path));
        data.labels.push_back(e.label);
    }
    return data;
}

std::vector<Batch> make_batches(const Dataset& data, int batch_size, const AugmentConfig& aug,
                                uint64_t epoch_seed, bool augment) {
    if (data.images.empty()) throw DegenerateDataError("make_batches: empty dataset");
    if (batch_size < 2) throw ConfigError("make_batches: batch_size must be >= 2");

    const size_t n = data.images.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    Rng shuffle_rng(mix64(epoch_seed, 0x0e70c4));
    shuffle_rng.shuffle(order);

    std::vector<Batch> batches;
    for (size_t start = 0; start < n; start += static_cast<size_t>(batch_size)) {
        const size_t bsz = std::min(static_cast<size_t>(batch_size), n - start);

        // stage 1: flip / blur / jpeg, each sample from its own stream
        std::vector<Image> staged(bsz);
        std::vector<double> labels(bsz);
        std::vector<Rng> streams;
        streams.reserve(bsz);
        for (size_t k = 0; k < bsz; ++k) {
            const size_t idx = order[start + k];
            streams.emplace_back(mix64(aug.seed, epoch_seed, static_cast<uint64_t>(idx)));
            Rng& rng = streams.back();
            Image img = data.images[idx];
            labels[k] = data.labels[idx];
            if (augment) {
                if (rng.bernoulli(aug.p_flip)) {
                    for (int ch = 0; ch < img.c; ++ch)
                        for (int r = 0; r < img.h; ++r)
                            for (int c = 0; c < img.w / 2; ++c)
                                std::swap(img.at(ch, r, c), img.at(ch, r, img.w - 1 - c));
                }
                if (rng.bernoulli(aug.p_blur))
                    img = gaussian_blur(img, rng.uniform(aug.blur_sigma_min, aug.blur_sigma_max));
                if (rng.bernoulli(aug.p_jpeg))
                    img = jpeg_proxy(img, rng.uniform_int(aug.jpeg_q_min, aug.jpeg_q_max));
            }
            staged[k] = std::move(img);
        }

        // stage 2: cutmix against frozen stage-1 partners
        std::vector<Image> finals(bsz);
        std::vector<double> final_labels(bsz);
        for (size_t k = 0; k < bsz; ++k) {
            if (augment && bsz >= 2 && streams[k].bernoulli(aug.p_cutmix)) {
                size_t partner = static_cast<size_t>(streams[k].bounded(bsz - 1));
                if (partner >= k) ++partner;
                auto [img, label] = cutmix(staged[k], labels[k], staged[partner], labels[partner],
                                           streams[k].uniform(), streams[k].next_u64());
                finals[k] = std::move(img);
                final_labels[k] = label;
            } else {
                finals[k] = staged[k];
                final_labels[k] = labels[k];
            }
        }

        const Image& first = finals[0];
        Batch batch;
        batch.images = Tensor::zeros({static_cast<int>(bsz), first.c, first.h, first.w});
        auto& dst = batch.images.data();
        const size_t plane = first.pix.size();
        for (size_t k = 0; k < bsz; ++k) {
            if (finals[k].pix.size() != plane)
                throw ShapeError("make_batches: images in one dataset must share a shape");
            std::copy(finals[k].pix.begin(), finals[k].pix.end(),
                      dst.begin() + static_cast<long>(k * plane));
        }
        batch.labels = std::move(final_labels);
        batches.push_back(std::move(batch));
    }
    return batches;
}

std::vector<Batch> make_batches(const SampleManifest& manifest, int batch_size,
                                const AugmentConfig& aug, uint64_t epoch_seed, bool augment) {
    return make_batches(load_dataset(manifest), batch_size, aug, epoch_seed, augment);
}

}  // namespace xt
