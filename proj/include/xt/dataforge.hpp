#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "xt/tensor.hpp"

namespace xt {

// In-memory image, channel-major [C,H,W], pixel values in [0,1].
struct Image {
    int c = 0, h = 0, w = 0;
    std::vector<double> pix;

    double& at(int ch, int r, int col) { return pix[(static_cast<size_t>(ch) * h + r) * w + col]; }
    double at(int ch, int r, int col) const { return pix[(static_cast<size_t>(ch) * h + r) * w + col]; }
};

enum class Orientation { Axis, Diagonal };

// Synthetic two-domain recipe: real images are low-pass noise fields; fakes
// add a periodic grid on top (an upsampling-fingerprint stand-in). Domains
// differ by period and orientation.
struct DomainRecipe {
    double texture_scale = 2.0;       // low-pass sigma of the base noise field
    int artifact_period = 2;          // pixels, >= 2
    double artifact_amplitude = 0.3;  // in (0,1)
    Orientation orientation = Orientation::Diagonal;
    int height = 32, width = 32;
    int channels = 1;
};

struct ManifestEntry {
    std::string path;  // relative to the manifest file
    double label;      // 0 = real, 1 = fake
};

struct SampleManifest {
    std::filesystem::path root;  // directory holding the manifest
    std::vector<ManifestEntry> entries;

    int count_with_label(double label) const;
};

struct AugmentConfig {
    double p_flip = 0.5;
    double p_blur = 0.5;
    double p_jpeg = 0.5;
    double p_cutmix = 0.5;
    double blur_sigma_min = 0.1, blur_sigma_max = 3.0;
    int jpeg_q_min = 30, jpeg_q_max = 100;
    uint64_t seed = 0;
};

// XIMG sample file: "XIMG", version u32 LE (=1), C,H,W u32 LE, then C*H*W
// f32 LE values in [0,1], channel-major.
void write_ximg(const std::filesystem::path& path, const Image& img);
Image read_ximg(const std::filesystem::path& path);

// Manifest: UTF-8 CSV, header "path,label", relative paths.
void write_manifest(const std::filesystem::path& csv_path, const SampleManifest& manifest);
SampleManifest load_manifest(const std::filesystem::path& csv_path);

// Writes count_real + count_fake XIMG files plus manifest.csv into out_dir.
// Byte-identical for identical (recipe, counts, seed).
SampleManifest generate_domain(const DomainRecipe& recipe, int count_real, int count_fake,
                               uint64_t seed, const std::filesystem::path& out_dir);

// Separable Gaussian blur, kernel radius ceil(3*sigma), taps normalized to
// sum 1, reflect padding.
Image gaussian_blur(const Image& img, double sigma);

// Codec-free JPEG distortion: per channel 8x8 orthonormal DCT-II, quantize
// with the Annex-K luminance table under the IJG quality scaling, dequantize,
// invert, clamp. Non-multiple-of-8 sizes are reflect-padded then cropped.
Image jpeg_proxy(const Image& img, int quality);

// The scaled quantization table for a quality factor (test hook).
std::vector<int> jpeg_quant_table(int quality);

// Pastes a box from b into a; box side fractions are sqrt(1-lambda), center
// uniform, clipped to bounds. Returned label mixes by surviving area.
std::pair<Image, double> cutmix(const Image& a, double label_a, const Image& b, double label_b,
                                double lambda, uint64_t box_seed);

struct Batch {
    Tensor images;               // [B,C,H,W]
    std::vector<double> labels;  // soft labels possible after cutmix
};

// Manifest materialized in memory; load order = manifest order.
struct Dataset {
    std::vector<Image> images;
    std::vector<double> labels;
};

Dataset load_dataset(const SampleManifest& manifest);

// Epoch-seeded shuffle + per-sample augmentation; per-sample randomness is
// derived from (aug.seed, epoch_seed, manifest index) so the stream is
// reproducible and independent of any prefetch order. Last short batch kept.
std::vector<Batch> make_batches(const Dataset& data, int batch_size, const AugmentConfig& aug,
                                uint64_t epoch_seed, bool augment = true);
std::vector<Batch> make_batches(const SampleManifest& manifest, int batch_size,
                                const AugmentConfig& aug, uint64_t epoch_seed,
                                bool augment = true);

}  // namespace xt
