#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xt/blocknet.hpp"
#include "xt/dataforge.hpp"
#include "xt/metrics.hpp"
#include "xt/xroutes.hpp"

namespace xt {

struct OptimConfig {
    double lr_init = 0.002;
    double lr_min = 0.0;
    double momentum = 0.001;
    int epochs = 30;
    int batch_size = 32;
    int early_stop_patience = 0;  // 0 disables; otherwise epochs without +0.001 val AUC
    double beta = 0.6;
    double s = 1e-4;
    double gamma = 0.16;
    double p = 2.0;
    bool update_aux = false;
    bool force_alpha_zero = false;      // general-transfer: drop the route terms
    bool freeze_early_segments = false;  // general-transfer: train only last segment + head
    RouteHead route_head = RouteHead::LastSegmentOwner;
    uint64_t seed = 7;
    bool log_batches = false;

    void validate() const;
};

struct TrainLogRow {
    int epoch = 0;
    std::string split;  // train | val | source_eval | target_eval | batch
    double l1 = 0, l2 = 0, l3 = 0, l_auc = 0, alpha = 0, total = 0;
    double auc = 0, ap = 0, acc = 0;
    double lr = 0;
};

struct TrainLog {
    std::vector<TrainLogRow> rows;

    std::string to_csv() const;
    void write_csv(const std::filesystem::path& path) const;
    static TrainLog read_csv(const std::filesystem::path& path);  // throws ConfigError
};

using ParamMap = std::map<std::string, Tensor>;
using VelocityMap = std::map<std::string, std::vector<double>>;

// v <- momentum*v + grad; theta <- theta - lr*v, for names in mask only.
// All grads in params are zeroed afterwards.
void sgd_step(ParamMap& params, VelocityMap& velocity, double lr, double momentum,
              const std::set<std::string>& mask);

// lr_min + 0.5*(lr_init - lr_min)*(1 + cos(pi*t/T)); requires 0 <= t <= T.
double cosine_lr(int t, int total_steps, double lr_init, double lr_min);

EvalReport eval_model(const BlockNet& net, const Dataset& data, int batch_size);

struct PretrainResult {
    BlockNet best_net;
    TrainLog log;
    int best_epoch = 0;
    double best_val_auc = 0.0;
};

// Supervised single-net stage: loss beta*BCE + (1-beta)*L_AUC + s*Omega_fc.
// Keeps (and returns) the epoch-best net by validation AUC; optional patience
// early stop.
PretrainResult pretrain(const BlockNet& initial, const Dataset& train, const Dataset& val,
                        const OptimConfig& cfg, const AugmentConfig& aug);

struct TransferState {
    ParamMap params;  // qualified aux.* / master.*
    VelocityMap velocity;
    std::set<std::string> mask;
    int step = 0;
    int total_steps = 0;
    bool first_batch_done = false;
};

TransferState make_transfer_state(const SiblingPair& pair, const OptimConfig& cfg,
                                  int batches_per_epoch);

// One pass of the batch loop: three route forwards, one combined backward,
// one masked SGD step per batch. Appends a train row (means over batches)
// and, with log_batches, one row per batch.
void xtransfer_epoch(SiblingPair& pair, const Dataset& data, const OptimConfig& cfg,
                     const AugmentConfig& aug, int epoch_index, TransferState& state,
                     TrainLog& log);

struct TransferResult {
    BlockNet best_master;
    TrainLog log;
    int best_epoch = 0;
    double best_source_auc = 0.0;
    double best_target_auc = 0.0;
};

// Full transfer stage: per-epoch source/target evaluation, master selected at
// the best (source AUC + target AUC)/2.
TransferResult run_transfer(SiblingPair pair, const Dataset& target_train,
                            const Dataset& source_eval, const Dataset& target_eval,
                            const OptimConfig& cfg, const AugmentConfig& aug);

TransferResult run_transfer(const std::filesystem::path& source_ckpt,
                            std::vector<SegmentSpec> spec, int input_channels,
                            const Dataset& target_train, const Dataset& source_eval,
                            const Dataset& target_eval, const OptimConfig& cfg,
                            const AugmentConfig& aug);

}  // namespace xt
