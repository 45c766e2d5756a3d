#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "xt/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"X-Transfer: sibling-network transfer learning for real-vs-generated image "
                 "classification"};
    app.require_subcommand(1);

    // gen-data
    xt::cli::GenDataArgs gen;
    std::string gen_out;
    auto* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic two-class domain");
    gen_cmd->add_option("--domain", gen.domain, "domain preset: A (period 2, diagonal) or B (period 4, axis)")
        ->required();
    gen_cmd->add_option("--out", gen_out, "output directory")->required();
    gen_cmd->add_option("--count-real", gen.count_real, "number of real samples");
    gen_cmd->add_option("--count-fake", gen.count_fake, "number of fake samples");
    gen_cmd->add_option("--seed", gen.seed, "generation seed");
    gen_cmd->add_option("--image-size", gen.image_size, "square image side");
    gen_cmd->add_option("--amplitude", gen.amplitude, "artifact amplitude in (0,1)");

    // pretrain
    std::string pretrain_config;
    auto* pre_cmd = app.add_subcommand("pretrain", "train a single network on the source domain");
    pre_cmd->add_option("config", pretrain_config, "run config file")->required();

    // transfer
    std::string transfer_config, source_ckpt;
    auto* tr_cmd = app.add_subcommand("transfer", "run the X-Transfer stage from a checkpoint");
    tr_cmd->add_option("config", transfer_config, "run config file")->required();
    tr_cmd->add_option("--source-ckpt", source_ckpt, "pretrained checkpoint")->required();

    // eval
    std::string eval_ckpt, eval_data, eval_config, eval_out;
    auto* ev_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a manifest");
    ev_cmd->add_option("--ckpt", eval_ckpt, "checkpoint file")->required();
    ev_cmd->add_option("--data", eval_data, "manifest csv")->required();
    ev_cmd->add_option("--config", eval_config, "run config (for the network spec)");
    ev_cmd->add_option("--out", eval_out, "also write the JSON report here");

    // report
    std::string report_log, report_format = "csv";
    auto* rp_cmd = app.add_subcommand("report", "summarize train logs");
    rp_cmd->add_option("--log", report_log, "train log csv or a directory of runs")->required();
    rp_cmd->add_option("--format", report_format, "csv or json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (gen_cmd->parsed()) {
            gen.out = gen_out;
            return xt::cli::cmd_gen_data(gen);
        }
        if (pre_cmd->parsed()) return xt::cli::cmd_pretrain(pretrain_config);
        if (tr_cmd->parsed()) return xt::cli::cmd_transfer(transfer_config, source_ckpt);
        if (ev_cmd->parsed()) {
            std::optional<std::filesystem::path> cfg, out;
            if (!eval_config.empty()) cfg = eval_config;
            if (!eval_out.empty()) out = eval_out;
            return xt::cli::cmd_eval(eval_ckpt, eval_data, cfg, out);
        }
        if (rp_cmd->parsed()) return xt::cli::cmd_report(report_log, report_format);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return xt::cli::map_exit_code(e);
    }
    return 2;
}
