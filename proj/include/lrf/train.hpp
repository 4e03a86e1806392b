#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lrf/checkpoint.hpp"
#include "lrf/common.hpp"
#include "lrf/data.hpp"
#include "lrf/network.hpp"
#include "lrf/optim.hpp"
#include "lrf/rng.hpp"
#include "lrf/tensor.hpp"

namespace lrf {

struct EpochScaleStat {
  int scale = 0;
  double mean_loss = 0.0;
  std::int64_t patches = 0;
};

struct EpochStat {
  std::int64_t epoch = 0;
  double lr = 0.0;
  std::int64_t step_end = 0;  // optimizer steps completed so far
  std::vector<EpochScaleStat> per_scale;
};

struct TrainHooks {
  /// Called after every completed epoch, before checkpointing.
  std::function<void(const EpochStat&)> on_epoch_end;
};

struct TrainResult {
  std::vector<EpochStat> epochs;
  std::int64_t final_step = 0;
};

/// Mutable training state: the model, its optimizer state, and how many
/// epochs are already done. A fresh run starts at epoch 0; a resumed run
/// comes out of load_checkpoint.
struct TrainRun {
  Model<float> model;
  AdamState<float> adam;
  std::uint64_t seed = 0;
  std::int64_t start_epoch = 0;
};

inline TrainRun make_train_run(const NetworkConfig& net, std::uint64_t seed) {
  TrainRun run;
  run.model = build_model<float>(net, seed);
  run.adam = AdamState<float>::init(run.model.named_parameters());
  run.seed = seed;
  return run;
}

inline TrainRun resume_train_run(const LoadedCheckpoint& ck) {
  TrainRun run;
  run.model = ck.model;
  run.adam = ck.adam;
  run.seed = ck.meta.seed;
  run.start_epoch = ck.meta.epoch;
  return run;
}

/// Trains epochs [run.start_epoch, cfg.epochs). Every epoch draws its batch
/// order, augmentation and the gradient path from Rng(mix_seed(seed, epoch)),
/// so a resumed run replays exactly the batches an uninterrupted run would
/// have seen: bit-identical parameters at every epoch boundary.
///
/// When checkpoint_path is nonempty, a checkpoint is written every
/// cfg.checkpoint_every epochs and after the last epoch; writes are
/// rename-atomic, and a non-finite loss or gradient aborts by exception
/// before any write, so the file always holds the last good state. When
/// log_path is nonempty, per-epoch per-scale rows are appended as CSV.
inline TrainResult train(TrainRun& run, const TrainDataset& ds,
                         const TrainConfig& cfg,
                         const std::string& checkpoint_path = "",
                         const std::string& log_path = "",
                         const TrainHooks& hooks = {}) {
  config_check(ds.total_patches() > 0,
               "training dataset has no patches (images smaller than the "
               "patch size?)");
  config_check(run.start_epoch <= cfg.epochs,
               "checkpoint is already past the requested epoch count");
  auto params = run.model.named_parameters();
  std::int64_t step = run.adam.t;

  std::ofstream log;
  if (!log_path.empty()) {
    const bool fresh = !std::filesystem::exists(log_path) ||
                       std::filesystem::file_size(log_path) == 0;
    log.open(log_path, std::ios::app);
    if (!log) throw IoError("cannot open training log: " + log_path);
    if (fresh) log << "epoch,step,scale,lr,loss,val_psnr\n";
  }

  auto save = [&](std::int64_t completed_epochs) {
    if (checkpoint_path.empty()) return;
    CheckpointMeta meta;
    meta.net = run.model.config;
    meta.seed = run.seed;
    meta.epoch = completed_epochs;
    meta.step = run.adam.t;
    save_checkpoint(checkpoint_path, run.model, run.adam, meta);
  };

  TrainResult result;
  if (run.start_epoch == cfg.epochs) {
    // Nothing to train (e.g. --epochs 0): still leave a valid checkpoint.
    save(run.start_epoch);
    result.final_step = step;
    return result;
  }

  for (std::int64_t epoch = run.start_epoch; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_schedule(cfg.initial_lr, cfg.lr_halving_period,
                                  epoch);
    EpochBatches batches(ds, cfg.batch_size, Rng(mix_seed(run.seed, epoch)));
    std::map<int, std::pair<double, std::int64_t>> acc;  // scale -> (sum, n)
    while (auto b = batches.next()) {
      Tape<float> tape;
      run.model.zero_grad();
      Tensor<float> pred = run.model.forward(&tape, b->inputs);
      Tensor<float> loss = cfg.loss == Loss::L1
                               ? l1_loss(&tape, pred, b->targets)
                               : mse_loss(&tape, pred, b->targets);
      backward(tape, loss);
      AdamConfig ac;
      ac.lr = lr;
      adam_step(params, run.adam, ac);
      ++step;
      const auto n = b->inputs.shape().n;
      auto& [sum, count] = acc[b->scale];
      sum += static_cast<double>(loss.item()) * static_cast<double>(n);
      count += n;
    }
    EpochStat stat;
    stat.epoch = epoch;
    stat.lr = lr;
    stat.step_end = step;
    for (const auto& [scale, sc] : acc) {
      stat.per_scale.push_back(
          EpochScaleStat{scale, sc.first / static_cast<double>(sc.second),
                         sc.second});
    }
    if (log.is_open()) {
      for (const auto& s : stat.per_scale) {
        char lrbuf[32], lossbuf[32];
        std::snprintf(lrbuf, sizeof lrbuf, "%.9g", stat.lr);
        std::snprintf(lossbuf, sizeof lossbuf, "%.9g", s.mean_loss);
        log << stat.epoch << "," << stat.step_end << "," << s.scale << ","
            << lrbuf << "," << lossbuf << ",\n";
      }
      log.flush();
    }
    if (hooks.on_epoch_end) hooks.on_epoch_end(stat);
    const bool last = epoch + 1 == cfg.epochs;
    if (last || (cfg.checkpoint_every > 0 &&
                 (epoch + 1) % cfg.checkpoint_every == 0)) {
      save(epoch + 1);
    }
    result.epochs.push_back(std::move(stat));
  }
  run.start_epoch = cfg.epochs;
  result.final_step = step;
  return result;
}

}  // namespace lrf
