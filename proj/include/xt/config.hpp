#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "xt/dataforge.hpp"
#include "xt/trainer.hpp"

namespace xt {

// Flat key = value run configuration ('#' comments, no nesting). Every field
// has a default; render_config() writes the fully resolved form.
struct RunConfig {
    std::string experiment = "run";
    std::filesystem::path out_dir = "runs/run";

    // network
    int input_channels = 1;
    int image_size = 32;
    std::vector<int> segment_channels = {8, 16, 32};  // one conv per segment
    int kernel_size = 3;

    // data manifests
    std::filesystem::path source_train;
    std::filesystem::path source_eval;
    std::filesystem::path target_train;
    std::filesystem::path target_eval;

    OptimConfig optim;
    AugmentConfig aug;

    int threads = 0;  // 0 = all cores

    std::vector<SegmentSpec> make_spec() const;
    void validate() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::filesystem::path& path);
std::string render_config(const RunConfig& cfg);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace xt
