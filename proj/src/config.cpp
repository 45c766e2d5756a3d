#include "xt/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "xt/errors.hpp"

namespace xt {

std::vector<SegmentSpec> RunConfig::make_spec() const {
    std::vector<SegmentSpec> spec;
    for (int ch : segment_channels)
        spec.push_back(SegmentSpec{{{ch, kernel_size}}, true});
    return spec;
}

void RunConfig::validate() const {
    optim.validate();
    if (input_channels < 1) throw ConfigError("input_channels must be >= 1");
    if (image_size < 4) throw ConfigError("image_size must be >= 4");
    if (segment_channels.size() < 2) throw ConfigError("segment_channels needs >= 2 segments");
    if (image_size % (1 << segment_channels.size()) != 0)
        throw ConfigError("image_size must be divisible by 2^K for K downsampling segments");
    if (kernel_size <= 0 || kernel_size % 2 == 0) throw ConfigError("kernel_size must be odd");
    if (threads < 0) throw ConfigError("threads must be >= 0");
    auto check_p = [](double p, const char* name) {
        if (p < 0.0 || p > 1.0) throw ConfigError(std::string(name) + " must be in [0,1]");
    };
    check_p(aug.p_flip, "p_flip");
    check_p(aug.p_blur, "p_blur");
    check_p(aug.p_jpeg, "p_jpeg");
    check_p(aug.p_cutmix, "p_cutmix");
    if (aug.blur_sigma_min <= 0.0 || aug.blur_sigma_max < aug.blur_sigma_min)
        throw ConfigError("blur sigma range must satisfy 0 < min <= max");
    if (aug.jpeg_q_min < 1 || aug.jpeg_q_max > 100 || aug.jpeg_q_min > aug.jpeg_q_max)
        throw ConfigError("jpeg quality range must satisfy 1 <= min <= max <= 100");
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
    }
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const int i = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("bad integer value for " + key + ": '" + v + "'");
    }
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const uint64_t u = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return u;
    } catch (const std::exception&) {
        throw ConfigError("bad unsigned value for " + key + ": '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("bad boolean value for " + key + ": '" + v + "' (use true/false)");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_int(key, trim(item)));
    if (out.empty()) throw ConfigError("empty list for " + key);
    return out;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string raw;
    size_t line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        if (key == "experiment") cfg.experiment = val;
        else if (key == "out_dir") cfg.out_dir = val;
        else if (key == "input_channels") cfg.input_channels = parse_int(key, val);
        else if (key == "image_size") cfg.image_size = parse_int(key, val);
        else if (key == "segment_channels") cfg.segment_channels = parse_int_list(key, val);
        else if (key == "kernel_size") cfg.kernel_size = parse_int(key, val);
        else if (key == "source_train") cfg.source_train = val;
        else if (key == "source_eval") cfg.source_eval = val;
        else if (key == "target_train") cfg.target_train = val;
        else if (key == "target_eval") cfg.target_eval = val;
        else if (key == "lr_init") cfg.optim.lr_init = parse_double(key, val);
        else if (key == "lr_min") cfg.optim.lr_min = parse_double(key, val);
        else if (key == "momentum") cfg.optim.momentum = parse_double(key, val);
        else if (key == "epochs") cfg.optim.epochs = parse_int(key, val);
        else if (key == "batch_size") cfg.optim.batch_size = parse_int(key, val);
        else if (key == "early_stop_patience") cfg.optim.early_stop_patience = parse_int(key, val);
        else if (key == "beta") cfg.optim.beta = parse_double(key, val);
        else if (key == "s") cfg.optim.s = parse_double(key, val);
        else if (key == "gamma") cfg.optim.gamma = parse_double(key, val);
        else if (key == "p") cfg.optim.p = parse_double(key, val);
        else if (key == "update_aux") cfg.optim.update_aux = parse_bool(key, val);
        else if (key == "force_alpha_zero") cfg.optim.force_alpha_zero = parse_bool(key, val);
        else if (key == "freeze_early_segments")
            cfg.optim.freeze_early_segments = parse_bool(key, val);
        else if (key == "route_head") {
            if (val == "last_segment_owner") cfg.optim.route_head = RouteHead::LastSegmentOwner;
            else if (val == "master") cfg.optim.route_head = RouteHead::Master;
            else throw ConfigError("route_head must be last_segment_owner or master, got '" + val + "'");
        }
        else if (key == "seed") cfg.optim.seed = parse_u64(key, val);
        else if (key == "log_batches") cfg.optim.log_batches = parse_bool(key, val);
        else if (key == "p_flip") cfg.aug.p_flip = parse_double(key, val);
        else if (key == "p_blur") cfg.aug.p_blur = parse_double(key, val);
        else if (key == "p_jpeg") cfg.aug.p_jpeg = parse_double(key, val);
        else if (key == "p_cutmix") cfg.aug.p_cutmix = parse_double(key, val);
        else if (key == "blur_sigma_min") cfg.aug.blur_sigma_min = parse_double(key, val);
        else if (key == "blur_sigma_max") cfg.aug.blur_sigma_max = parse_double(key, val);
        else if (key == "jpeg_q_min") cfg.aug.jpeg_q_min = parse_int(key, val);
        else if (key == "jpeg_q_max") cfg.aug.jpeg_q_max = parse_int(key, val);
        else if (key == "aug_seed") cfg.aug.seed = parse_u64(key, val);
        else if (key == "threads") cfg.threads = parse_int(key, val);
        else throw ConfigError("unknown config key '" + key + "' (line " + std::to_string(line_no) + ")");
    }
    cfg.validate();
    return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str());
}

std::string render_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "aug_seed = " << cfg.aug.seed << "\n";
    os << "batch_size = " << cfg.optim.batch_size << "\n";
    os << "beta = " << fmt_double(cfg.optim.beta) << "\n";
    os << "blur_sigma_max = " << fmt_double(cfg.aug.blur_sigma_max) << "\n";
    os << "blur_sigma_min = " << fmt_double(cfg.aug.blur_sigma_min) << "\n";
    os << "early_stop_patience = " << cfg.optim.early_stop_patience << "\n";
    os << "epochs = " << cfg.optim.epochs << "\n";
    os << "experiment = " << cfg.experiment << "\n";
    os << "force_alpha_zero = " << (cfg.optim.force_alpha_zero ? "true" : "false") << "\n";
    os << "freeze_early_segments = " << (cfg.optim.freeze_early_segments ? "true" : "false") << "\n";
    os << "gamma = " << fmt_double(cfg.optim.gamma) << "\n";
    os << "image_size = " << cfg.image_size << "\n";
    os << "input_channels = " << cfg.input_channels << "\n";
    os << "jpeg_q_max = " << cfg.aug.jpeg_q_max << "\n";
    os << "jpeg_q_min = " << cfg.aug.jpeg_q_min << "\n";
    os << "kernel_size = " << cfg.kernel_size << "\n";
    os << "log_batches = " << (cfg.optim.log_batches ? "true" : "false") << "\n";
    os << "lr_init = " << fmt_double(cfg.optim.lr_init) << "\n";
    os << "lr_min = " << fmt_double(cfg.optim.lr_min) << "\n";
    os << "momentum = " << fmt_double(cfg.optim.momentum) << "\n";
    os << "out_dir = " << cfg.out_dir.string() << "\n";
    os << "p = " << fmt_double(cfg.optim.p) << "\n";
    os << "p_blur = " << fmt_double(cfg.aug.p_blur) << "\n";
    os << "p_cutmix = " << fmt_double(cfg.aug.p_cutmix) << "\n";
    os << "p_flip = " << fmt_double(cfg.aug.p_flip) << "\n";
    os << "p_jpeg = " << fmt_double(cfg.aug.p_jpeg) << "\n";
    os << "route_head = "
       << (cfg.optim.route_head == RouteHead::Master ? "master" : "last_segment_owner") << "\n";
    os << "s = " << fmt_double(cfg.optim.s) << "\n";
    os << "seed = " << cfg.optim.seed << "\n";
    std::string channels;
    for (size_t i = 0; i < cfg.segment_channels.size(); ++i) {
        if (i) channels += ",";
        channels += std::to_string(cfg.segment_channels[i]);
    }
    os << "segment_channels = " << channels << "\n";
    os << "source_eval = " << cfg.source_eval.string() << "\n";
    os << "source_train = " << cfg.source_train.string() << "\n";
    os << "target_eval = " << cfg.target_eval.string() << "\n";
    os << "target_train = " << cfg.target_train.string() << "\n";
    os << "threads = " << cfg.threads << "\n";
    os << "update_aux = " << (cfg.optim.update_aux ? "true" : "false") << "\n";
    return os.str();
}

bool operator==(const RunConfig& a, const RunConfig& b) {
    return render_config(a) == render_config(b);
}

}  // namespace xt
