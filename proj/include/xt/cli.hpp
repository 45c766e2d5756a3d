#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "xt/config.hpp"

namespace xt::cli {

// Exit codes shared by every subcommand:
//   0 ok, 2 flag/config error, 3 I/O failure, 4 checkpoint mismatch,
//   5 degenerate data. map_exit_code translates the throwing error families.
int map_exit_code(const std::exception& e);

struct GenDataArgs {
    std::string domain = "A";  // A: period 2 diagonal; B: period 4 axis
    std::filesystem::path out;
    int count_real = 1000;
    int count_fake = 1000;
    uint64_t seed = 7;
    int image_size = 32;
    double amplitude = 0.3;
};

int cmd_gen_data(const GenDataArgs& args);
int cmd_pretrain(const std::filesystem::path& config_path);
int cmd_transfer(const std::filesystem::path& config_path,
                 const std::filesystem::path& source_ckpt);
int cmd_eval(const std::filesystem::path& ckpt, const std::filesystem::path& data_csv,
             const std::optional<std::filesystem::path>& config_path,
             const std::optional<std::filesystem::path>& out_json);
int cmd_report(const std::filesystem::path& log_path, const std::string& format);

DomainRecipe domain_recipe(const std::string& domain, int image_size, double amplitude);

}  // namespace xt::cli
