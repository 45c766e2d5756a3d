#include "xt/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "xt/errors.hpp"
#include "xt/losses.hpp"
#include "xt/ops.hpp"
#include "xt/rng.hpp"

namespace xt {

void OptimConfig::validate() const {
    if (lr_init <= 0.0) throw ConfigError("lr_init must be positive");
    if (lr_min < 0.0 || lr_min > lr_init) throw ConfigError("lr_min must be in [0, lr_init]");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must be in [0,1)");
    if (epochs < 0) throw ConfigError("epochs must be non-negative");
    if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
    if (beta < 0.0 || beta > 1.0) throw ConfigError("beta must be in [0,1]");
    if (s < 0.0) throw ConfigError("s must be non-negative");
    if (gamma <= 0.0 || gamma > 1.0) throw ConfigError("gamma must be in (0,1]");
    if (p <= 1.0) throw ConfigError("p must be > 1");
    if (early_stop_patience < 0) throw ConfigError("early_stop_patience must be >= 0");
}

// ---------------------------------------------------------------------------
// log
// ---------------------------------------------------------------------------

namespace {

std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

constexpr const char* kCsvHeader = "epoch,split,l1,l2,l3,l_auc,alpha,total,auc,ap,acc,lr";

}  // namespace

std::string TrainLog::to_csv() const {
    std::ostringstream os;
    os << kCsvHeader << "\n";
    for (const auto& r : rows) {
        os << r.epoch << "," << r.split << "," << fmt_num(r.l1) << "," << fmt_num(r.l2) << ","
           << fmt_num(r.l3) << "," << fmt_num(r.l_auc) << "," << fmt_num(r.alpha) << ","
           << fmt_num(r.total) << "," << fmt_num(r.auc) << "," << fmt_num(r.ap) << ","
           << fmt_num(r.acc) << "," << fmt_num(r.lr) << "\n";
    }
    return os.str();
}

void TrainLog::write_csv(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open log for writing: " + path.string());
    os << to_csv();
    if (!os) throw IoError("write failure: " + path.string());
}

TrainLog TrainLog::read_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open train log: " + path.string());
    std::string line;
    if (!std::getline(is, line) || line != kCsvHeader)
        throw ConfigError("train log missing expected header: " + path.string());
    TrainLog log;
    size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 12)
            throw ConfigError("train log line " + std::to_string(line_no) + " has " +
                              std::to_string(cells.size()) + " fields, expected 12");
        try {
            TrainLogRow r;
            r.epoch = std::stoi(cells[0]);
            r.split = cells[1];
            r.l1 = std::stod(cells[2]);
            r.l2 = std::stod(cells[3]);
            r.l3 = std::stod(cells[4]);
            r.l_auc = std::stod(cells[5]);
            r.alpha = std::stod(cells[6]);
            r.total = std::stod(cells[7]);
            r.auc = std::stod(cells[8]);
            r.ap = std::stod(cells[9]);
            r.acc = std::stod(cells[10]);
            r.lr = std::stod(cells[11]);
            log.rows.push_back(std::move(r));
        } catch (const std::exception&) {
            throw ConfigError("train log line " + std::to_string(line_no) + " is not numeric");
        }
    }
    return log;
}

// ---------------------------------------------------------------------------
// optimizer
// ---------------------------------------------------------------------------

void sgd_step(ParamMap& params, VelocityMap& velocity, double lr, double momentum,
              const std::set<std::string>& mask) {
    for (const auto& name : mask) {
        auto it = params.find(name);
        if (it == params.end()) throw ShapeError("sgd_step: no parameter named " + name);
        Tensor& t = it->second;
        auto& v = velocity[name];
        if (v.empty()) v.assign(t.data().size(), 0.0);
        const bool has_g = t.has_grad();
        for (size_t i = 0; i < v.size(); ++i) {
            const double g = has_g ? t.grad()[i] : 0.0;
            v[i] = momentum * v[i] + g;
            t.data()[i] -= lr * v[i];
        }
    }
    for (auto& [name, t] : params) t.zero_grad();
}

double cosine_lr(int t, int total_steps, double lr_init, double lr_min) {
    if (total_steps < 1) throw ConfigError("cosine_lr: total_steps must be >= 1");
    if (t < 0 || t > total_steps)
        throw ConfigError("cosine_lr: step " + std::to_string(t) + " outside [0, " +
                          std::to_string(total_steps) + "]");
    return lr_min + 0.5 * (lr_init - lr_min) * (1.0 + std::cos(M_PI * t / total_steps));
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

namespace {

std::vector<double> score_dataset(const BlockNet& net, const Dataset& data, int batch_size) {
    std::vector<double> scores;
    scores.reserve(data.images.size());
    const size_t n = data.images.size();
    for (size_t start = 0; start < n; start += static_cast<size_t>(batch_size)) {
        const size_t bsz = std::min(static_cast<size_t>(batch_size), n - start);
        const Image& first = data.images[start];
        Tensor x = Tensor::zeros({static_cast<int>(bsz), first.c, first.h, first.w});
        const size_t plane = first.pix.size();
        for (size_t k = 0; k < bsz; ++k)
            std::copy(data.images[start + k].pix.begin(), data.images[start + k].pix.end(),
                      x.data().begin() + static_cast<long>(k * plane));
        Tensor out = net.forward(x);  // no active tape: plain evaluation
        for (double v : out.data()) scores.push_back(v);
    }
    return scores;
}

// Metrics over the hard-labeled subset; zeros when degenerate (e.g. a batch
// stream that CutMix left single-class).
void fill_metrics(TrainLogRow& row, const std::vector<double>& scores,
                  const std::vector<double>& labels) {
    std::vector<double> s, y;
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == 0.0 || labels[i] == 1.0) {
            s.push_back(scores[i]);
            y.push_back(labels[i]);
        }
    try {
        row.auc = auc_exact(s, y);
        row.ap = average_precision(s, y);
        row.acc = accuracy_at(s, y, 0.5);
    } catch (const std::exception&) {
        row.auc = row.ap = row.acc = 0.0;
    }
}

}  // namespace

EvalReport eval_model(const BlockNet& net, const Dataset& data, int batch_size) {
    return evaluate(score_dataset(net, data, batch_size), data.labels);
}

// ---------------------------------------------------------------------------
// pretrain
// ---------------------------------------------------------------------------

PretrainResult pretrain(const BlockNet& initial, const Dataset& train, const Dataset& val,
                        const OptimConfig& cfg, const AugmentConfig& aug) {
    cfg.validate();
    if (train.images.empty()) throw DegenerateDataError("pretrain: empty training data");
    bool has_pos = false, has_neg = false;
    for (double y : train.labels) (y == 1.0 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
        throw DegenerateDataError("pretrain: training data has a single class");

    PretrainResult result;
    result.best_net = initial.clone();

    if (cfg.epochs == 0) return result;

    BlockNet net = initial.clone();
    ParamMap& params = net.params();
    VelocityMap velocity;
    std::set<std::string> all_names;
    for (const auto& [name, t] : params) all_names.insert(name);

    const int batches_per_epoch =
        static_cast<int>((train.images.size() + cfg.batch_size - 1) / cfg.batch_size);
    const int total_steps = cfg.epochs * batches_per_epoch;

    int step = 0;
    int epochs_since_improve = 0;
    double best_val_auc = -1.0;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        auto batches = make_batches(train, cfg.batch_size, aug, mix64(cfg.seed, static_cast<uint64_t>(epoch)));

        TrainLogRow train_row;
        train_row.epoch = epoch;
        train_row.split = "train";
        std::vector<double> epoch_scores, epoch_labels;
        double lr = cfg.lr_init;

        for (auto& batch : batches) {
            Tape tape;
            Tensor labels = Tensor::from_data({static_cast<int>(batch.labels.size())}, batch.labels);
            Tensor scores = net.forward(batch.images);

            Tensor t3 = bce(scores, labels);
            bool both = false, pos = false, neg = false;
            for (double y : batch.labels) {
                if (y == 1.0) pos = true;
                else if (y == 0.0) neg = true;
            }
            both = pos && neg;
            Tensor t_auc = both ? auc_loss(scores, labels, cfg.gamma, cfg.p) : Tensor::scalar(0.0);
            Tensor total = ops::add(ops::add(ops::scale(t3, cfg.beta), ops::scale(t_auc, 1.0 - cfg.beta)),
                                    ops::scale(l2_fc(net), cfg.s));

            backward(total);
            lr = cosine_lr(step, total_steps, cfg.lr_init, cfg.lr_min);
            sgd_step(params, velocity, lr, cfg.momentum, all_names);
            ++step;

            train_row.l3 += t3.value();
            train_row.l_auc += t_auc.value();
            train_row.total += total.value();
            for (double v : scores.data()) epoch_scores.push_back(v);
            for (double y : batch.labels) epoch_labels.push_back(y);
        }
        const double inv_b = 1.0 / static_cast<double>(batches.size());
        train_row.l3 *= inv_b;
        train_row.l_auc *= inv_b;
        train_row.total *= inv_b;
        train_row.lr = lr;
        fill_metrics(train_row, epoch_scores, epoch_labels);
        result.log.rows.push_back(train_row);

        EvalReport report = eval_model(net, val, cfg.batch_size);
        TrainLogRow val_row;
        val_row.epoch = epoch;
        val_row.split = "val";
        val_row.auc = report.auc;
        val_row.ap = report.ap;
        val_row.acc = report.acc_at_half;
        val_row.lr = lr;
        result.log.rows.push_back(val_row);

        if (report.auc >= best_val_auc + 0.001)
            epochs_since_improve = 0;
        else
            ++epochs_since_improve;
        if (report.auc > best_val_auc) {
            best_val_auc = report.auc;
            result.best_net = net.clone();
            result.best_epoch = epoch;
            result.best_val_auc = report.auc;
        }
        if (cfg.early_stop_patience > 0 && epochs_since_improve >= cfg.early_stop_patience) break;
    }
    return result;
}

// ---------------------------------------------------------------------------
// transfer
// ---------------------------------------------------------------------------

TransferState make_transfer_state(const SiblingPair& pair, const OptimConfig& cfg,
                                  int batches_per_epoch) {
    TransferState st;
    st.params = pair.qualified_params();
    st.total_steps = cfg.epochs * batches_per_epoch;

    st.mask = route_gradient_mask(pair, cfg.update_aux);
    if (cfg.freeze_early_segments) {
        const std::string last_seg = "seg" + std::to_string(pair.master.segment_count()) + ".";
        std::set<std::string> kept;
        for (const auto& name : st.mask) {
            const auto dot = name.find('.');
            const std::string local = name.substr(dot + 1);
            if (local.rfind(last_seg, 0) == 0 || local.rfind("head.", 0) == 0) kept.insert(name);
        }
        st.mask = std::move(kept);
    }
    return st;
}

void xtransfer_epoch(SiblingPair& pair, const Dataset& data, const OptimConfig& cfg,
                     const AugmentConfig& aug, int epoch_index, TransferState& state,
                     TrainLog& log) {
    auto batches = make_batches(data, cfg.batch_size, aug,
                                mix64(cfg.seed, static_cast<uint64_t>(epoch_index)));

    TrainLogRow row;
    row.epoch = epoch_index;
    row.split = "train";
    std::vector<double> epoch_scores, epoch_labels;
    double lr = cfg.lr_init;

    for (auto& batch : batches) {
        Tape tape;
        Tensor labels = Tensor::from_data({static_cast<int>(batch.labels.size())}, batch.labels);

        RouteResult r1 = route_forward(pair, batch.images, 0, cfg.route_head);
        RouteResult r2 = route_forward(pair, batch.images, 1, cfg.route_head);
        Tensor out3 = route3_forward(pair, batch.images);

        std::optional<double> fixed_alpha;
        if (!state.first_batch_done || cfg.force_alpha_zero) fixed_alpha = 0.0;
        LossBundle bundle = target_loss(r1.scores, r2.scores, out3, labels, pair.master, cfg.beta,
                                        cfg.s, cfg.gamma, cfg.p, fixed_alpha);
        state.first_batch_done = true;

        backward(bundle.total);
        lr = cosine_lr(state.step, state.total_steps, cfg.lr_init, cfg.lr_min);
        sgd_step(state.params, state.velocity, lr, cfg.momentum, state.mask);
        ++state.step;

        row.l1 += bundle.l1;
        row.l2 += bundle.l2;
        row.l3 += bundle.l3;
        row.l_auc += bundle.l_auc;
        row.alpha += bundle.alpha;
        row.total += bundle.total.value();
        for (double v : out3.data()) epoch_scores.push_back(v);
        for (double y : batch.labels) epoch_labels.push_back(y);

        if (cfg.log_batches) {
            TrainLogRow b;
            b.epoch = epoch_index;
            b.split = "batch";
            b.l1 = bundle.l1;
            b.l2 = bundle.l2;
            b.l3 = bundle.l3;
            b.l_auc = bundle.l_auc;
            b.alpha = bundle.alpha;
            b.total = bundle.total.value();
            b.lr = lr;
            log.rows.push_back(b);
        }
    }

    const double inv_b = 1.0 / static_cast<double>(batches.size());
    row.l1 *= inv_b;
    row.l2 *= inv_b;
    row.l3 *= inv_b;
    row.l_auc *= inv_b;
    row.alpha *= inv_b;
    row.total *= inv_b;
    row.lr = lr;
    fill_metrics(row, epoch_scores, epoch_labels);
    log.rows.push_back(row);
}

TransferResult run_transfer(SiblingPair pair, const Dataset& target_train,
                            const Dataset& source_eval, const Dataset& target_eval,
                            const OptimConfig& cfg, const AugmentConfig& aug) {
    cfg.validate();
    if (target_train.images.empty()) throw DegenerateDataError("run_transfer: empty target data");

    TransferResult result;
    const int batches_per_epoch =
        static_cast<int>((target_train.images.size() + cfg.batch_size - 1) / cfg.batch_size);
    TransferState state = make_transfer_state(pair, cfg, std::max(1, batches_per_epoch));

    double best_mean = -1.0;
    result.best_master = pair.master.clone();

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        xtransfer_epoch(pair, target_train, cfg, aug, epoch, state, result.log);

        const double lr_now = result.log.rows.back().lr;
        EvalReport src = eval_model(pair.master, source_eval, cfg.batch_size);
        EvalReport tgt = eval_model(pair.master, target_eval, cfg.batch_size);

        TrainLogRow src_row;
        src_row.epoch = epoch;
        src_row.split = "source_eval";
        src_row.auc = src.auc;
        src_row.ap = src.ap;
        src_row.acc = src.acc_at_half;
        src_row.lr = lr_now;
        result.log.rows.push_back(src_row);

        TrainLogRow tgt_row;
        tgt_row.epoch = epoch;
        tgt_row.split = "target_eval";
        tgt_row.auc = tgt.auc;
        tgt_row.ap = tgt.ap;
        tgt_row.acc = tgt.acc_at_half;
        tgt_row.lr = lr_now;
        result.log.rows.push_back(tgt_row);

        const double mean = 0.5 * (src.auc + tgt.auc);
        if (mean > best_mean) {
            best_mean = mean;
            result.best_master = pair.master.clone();
            result.best_epoch = epoch;
            result.best_source_auc = src.auc;
            result.best_target_auc = tgt.auc;
        }
    }
    return result;
}

TransferResult run_transfer(const std::filesystem::path& source_ckpt,
                            std::vector<SegmentSpec> spec, int input_channels,
                            const Dataset& target_train, const Dataset& source_eval,
                            const Dataset& target_eval, const OptimConfig& cfg,
                            const AugmentConfig& aug) {
    SiblingPair pair = SiblingPair::from_checkpoint(source_ckpt, std::move(spec), input_channels);
    return run_transfer(std::move(pair), target_train, source_eval, target_eval, cfg, aug);
}

}  // namespace xt
