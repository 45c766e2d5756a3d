#include "xt/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "xt/errors.hpp"
#include "xt/kernels.hpp"

namespace xt::cli {

using nlohmann::json;

int map_exit_code(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const IoError*>(&e)) return 3;
    if (dynamic_cast<const CheckpointError*>(&e)) return 4;
    if (dynamic_cast<const DegenerateDataError*>(&e)) return 5;
    return 1;
}

DomainRecipe domain_recipe(const std::string& domain, int image_size, double amplitude) {
    DomainRecipe r;
    r.height = image_size;
    r.width = image_size;
    r.channels = 1;
    r.texture_scale = 2.0;
    r.artifact_amplitude = amplitude;
    if (domain == "A") {
        r.artifact_period = 2;
        r.orientation = Orientation::Diagonal;
    } else if (domain == "B") {
        r.artifact_period = 4;
        r.orientation = Orientation::Axis;
    } else {
        throw ConfigError("unknown domain '" + domain + "' (expected A or B)");
    }
    return r;
}

int cmd_gen_data(const GenDataArgs& args) {
    if (args.count_real < 0 || args.count_fake < 0)
        throw ConfigError("counts must be non-negative");
    if (args.out.empty()) throw ConfigError("--out is required");
    const DomainRecipe recipe = domain_recipe(args.domain, args.image_size, args.amplitude);
    SampleManifest manifest =
        generate_domain(recipe, args.count_real, args.count_fake, args.seed, args.out);
    std::cout << "domain " << args.domain << ": " << manifest.entries.size() << " samples ("
              << manifest.count_with_label(0.0) << " real, " << manifest.count_with_label(1.0)
              << " fake) -> " << (args.out / "manifest.csv").string() << "\n";
    return 0;
}

namespace {

void prepare_run(const RunConfig& cfg) {
    kernels::set_threads(cfg.threads);
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create out_dir: " + cfg.out_dir.string());
    std::ofstream os(cfg.out_dir / "effective.cfg", std::ios::trunc);
    if (!os) throw IoError("cannot write effective config under " + cfg.out_dir.string());
    os << render_config(cfg);
}

Dataset load_split(const std::filesystem::path& manifest_csv, const char* which) {
    if (manifest_csv.empty())
        throw ConfigError(std::string("config is missing the ") + which + " manifest path");
    return load_dataset(load_manifest(manifest_csv));
}

json report_to_json(const EvalReport& r) {
    return json{{"auc", r.auc},
                {"ap", r.ap},
                {"acc_at_half", r.acc_at_half},
                {"n_pos", r.n_pos},
                {"n_neg", r.n_neg}};
}

}  // namespace

int cmd_pretrain(const std::filesystem::path& config_path) {
    RunConfig cfg = parse_config_file(config_path);
    prepare_run(cfg);

    Dataset train = load_split(cfg.source_train, "source_train");
    Dataset val = load_split(cfg.source_eval, "source_eval");

    BlockNet net = BlockNet::build(cfg.make_spec(), cfg.input_channels, cfg.optim.seed);
    PretrainResult result = pretrain(net, train, val, cfg.optim, cfg.aug);

    const auto ckpt = cfg.out_dir / "pretrain_best.xtck";
    result.best_net.save_checkpoint(ckpt);
    result.log.write_csv(cfg.out_dir / "pretrain_log.csv");
    std::cout << "pretrain '" << cfg.experiment << "': best epoch " << result.best_epoch
              << ", val AUC " << result.best_val_auc << " -> " << ckpt.string() << "\n";
    return 0;
}

int cmd_transfer(const std::filesystem::path& config_path,
                 const std::filesystem::path& source_ckpt) {
    RunConfig cfg = parse_config_file(config_path);
    prepare_run(cfg);

    Dataset target_train = load_split(cfg.target_train, "target_train");
    Dataset source_eval = load_split(cfg.source_eval, "source_eval");
    Dataset target_eval = load_split(cfg.target_eval, "target_eval");

    TransferResult result = run_transfer(source_ckpt, cfg.make_spec(), cfg.input_channels,
                                         target_train, source_eval, target_eval, cfg.optim, cfg.aug);

    const auto ckpt = cfg.out_dir / "master_best.xtck";
    result.best_master.save_checkpoint(ckpt);
    result.log.write_csv(cfg.out_dir / "transfer_log.csv");
    std::cout << "transfer '" << cfg.experiment << "': best epoch " << result.best_epoch
              << ", source AUC " << result.best_source_auc << ", target AUC "
              << result.best_target_auc << " -> " << ckpt.string() << "\n";
    return 0;
}

int cmd_eval(const std::filesystem::path& ckpt, const std::filesystem::path& data_csv,
             const std::optional<std::filesystem::path>& config_path,
             const std::optional<std::filesystem::path>& out_json) {
    RunConfig cfg = config_path ? parse_config_file(*config_path) : RunConfig{};
    kernels::set_threads(cfg.threads);

    BlockNet net = BlockNet::load_checkpoint(ckpt, cfg.make_spec(), cfg.input_channels);
    Dataset data = load_dataset(load_manifest(data_csv));
    EvalReport report = eval_model(net, data, cfg.optim.batch_size);

    const std::string text = report_to_json(report).dump();
    std::cout << text << "\n";
    if (out_json) {
        std::ofstream os(*out_json, std::ios::trunc);
        if (!os) throw IoError("cannot write eval report: " + out_json->string());
        os << text << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

namespace {

struct RunSummary {
    double beta = 0.0;
    int best_epoch = 0;
    double source_auc = 0.0;
    double target_auc = 0.0;
    std::vector<double> alpha_trace;
};

double beta_beside(const std::filesystem::path& log_path) {
    const auto cfg_path = log_path.parent_path() / "effective.cfg";
    if (!std::filesystem::exists(cfg_path)) return 0.0;
    return parse_config_file(cfg_path).optim.beta;
}

RunSummary summarize_log(const std::filesystem::path& log_path) {
    const TrainLog log = TrainLog::read_csv(log_path);
    if (log.rows.empty()) throw ConfigError("train log is empty: " + log_path.string());

    RunSummary s;
    s.beta = beta_beside(log_path);

    std::map<int, double> src_auc, tgt_auc;
    for (const auto& r : log.rows) {
        if (r.split == "train") s.alpha_trace.push_back(r.alpha);
        else if (r.split == "source_eval" || r.split == "val") src_auc[r.epoch] = r.auc;
        else if (r.split == "target_eval") tgt_auc[r.epoch] = r.auc;
    }

    double best = -1.0;
    for (const auto& [epoch, src] : src_auc) {
        const auto it = tgt_auc.find(epoch);
        const double tgt = it == tgt_auc.end() ? 0.0 : it->second;
        const double mean = it == tgt_auc.end() ? src : 0.5 * (src + tgt);
        if (mean > best) {
            best = mean;
            s.best_epoch = epoch;
            s.source_auc = src;
            s.target_auc = tgt;
        }
    }
    if (best < 0.0) throw ConfigError("train log has no evaluation rows: " + log_path.string());
    return s;
}

std::string trace_str(const std::vector<double>& trace) {
    std::string out;
    for (size_t i = 0; i < trace.size(); ++i) {
        if (i) out += ";";
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.10g", trace[i]);
        out += buf;
    }
    return out;
}

}  // namespace

int cmd_report(const std::filesystem::path& log_path, const std::string& format) {
    if (format != "csv" && format != "json")
        throw ConfigError("report format must be csv or json, got '" + format + "'");

    std::vector<std::filesystem::path> logs;
    if (std::filesystem::is_directory(log_path)) {
        for (const auto& entry : std::filesystem::recursive_directory_iterator(log_path)) {
            const auto name = entry.path().filename().string();
            if (name == "transfer_log.csv" || name == "pretrain_log.csv")
                logs.push_back(entry.path());
        }
        std::sort(logs.begin(), logs.end());
        if (logs.empty())
            throw ConfigError("no *_log.csv files under " + log_path.string());
    } else {
        logs.push_back(log_path);
    }

    std::vector<RunSummary> summaries;
    for (const auto& p : logs) summaries.push_back(summarize_log(p));
    std::stable_sort(summaries.begin(), summaries.end(),
                     [](const RunSummary& a, const RunSummary& b) { return a.beta < b.beta; });

    if (format == "json") {
        json arr = json::array();
        for (const auto& s : summaries)
            arr.push_back(json{{"beta", s.beta},
                               {"best_epoch", s.best_epoch},
                               {"source_auc", s.source_auc},
                               {"target_auc", s.target_auc},
                               {"alpha_trace", s.alpha_trace}});
        std::cout << arr.dump() << "\n";
    } else {
        std::cout << "beta,best_epoch,source_auc,target_auc,alpha_trace\n";
        for (const auto& s : summaries) {
            char buf[128];
            std::snprintf(buf, sizeof(buf), "%.10g,%d,%.10g,%.10g,", s.beta, s.best_epoch,
                          s.source_auc, s.target_auc);
            std::cout << buf << trace_str(s.alpha_trace) << "\n";
        }
    }
    return 0;
}

}  // namespace xt::cli
