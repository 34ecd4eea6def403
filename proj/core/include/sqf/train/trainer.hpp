#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "sqf/data/example.hpp"
#include "sqf/model/checkpoint.hpp"
#include "sqf/model/params.hpp"
#include "sqf/train/config.hpp"

namespace sqf::train {

struct StepMetrics {
  int64_t step = 0;
  double lr = 0;
  double loss = 0;
  double policy_loss = 0;
  double value_loss = 0;
  double policy_acc = 0;
  double value_acc = 0;
  double grad_norm = 0;  // pre-clip global norm
  bool aborted = false;  // non-finite loss: no update applied
};

// Running mean of parameter snapshots.
struct SwaState {
  std::vector<std::vector<float>> mean;
  int64_t count = 0;
};

void swa_update(SwaState& state, const model::Parameters& params);
model::Parameters swa_finalize(const SwaState& state,
                               const model::Parameters& like);

// One optimizer step over a batch: forward, loss, backward, global-norm
// clip, AdamW or Nadam update with the scheduled learning rate. Owns the
// moment buffers and the step counter; checkpoints carry both.
class Trainer {
 public:
  Trainer(model::Parameters& params, const TrainConfig& cfg);

  StepMetrics train_step(std::span<const data::TrainingExample> batch);

  // Forward-only metrics on a held-out batch.
  StepMetrics evaluate(std::span<const data::TrainingExample> batch) const;

  int64_t step() const { return step_; }
  const TrainConfig& config() const { return cfg_; }
  SwaState& swa() { return swa_; }

  void save(const std::filesystem::path& path) const;
  // Restores optimizer state and step from a checkpoint's extras; the
  // parameter tensors themselves load via load_checkpoint.
  void restore(const model::CheckpointExtra& extra);

 private:
  model::Parameters& params_;
  TrainConfig cfg_;
  std::vector<std::vector<float>> m_, v_;
  SwaState swa_;
  int64_t step_ = 0;
};

// Newline-delimited JSON metrics log.
class MetricsLog {
 public:
  explicit MetricsLog(const std::filesystem::path& path);
  void append(const StepMetrics& m);

 private:
  std::ofstream out_;
};

std::string metrics_json(const StepMetrics& m);

}  // namespace sqf::train
