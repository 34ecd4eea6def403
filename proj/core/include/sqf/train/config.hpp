#pragma once

#include <string>

namespace sqf::train {

enum class Optimizer { AdamW, Nadam };

const char* to_string(Optimizer o);
Optimizer optimizer_from_string(const std::string& s);

// Training hyperparameters; text keys follow the published configuration
// table. The mixed-precision block is recorded for config fidelity but inert
// in this 32-bit engine.
struct TrainConfig {
  int batch_size_train = 128;
  int batch_size_val = 16;
  int gradient_accumulation_steps = 4;
  int num_workers = 8;

  double lr = 5e-5;
  double min_lr = 1e-5;
  double wd = 1e-6;
  double grad_clip_norm = 3.5;
  int warmup_steps = 1000;
  // Cycle length in optimizer steps; the cosine restarts from lr when
  // refresh_lr_scheduler is set and parks at min_lr otherwise.
  int cosine_cycles = 50000;
  bool refresh_lr_scheduler = true;

  bool use_amp = true;
  double amp_init_scale = 256;
  double amp_max_scale = 8192;
  double amp_growth_factor = 1.5;
  int amp_growth_interval = 2000;
  double amp_backoff_factor = 0.5;

  double value_coefficient = 0.1;

  double history_mask_prob = 0.05;
  bool swa = false;
  Optimizer optimizer = Optimizer::AdamW;

  // AdamW moments; Nadam overrides below.
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double nadam_beta1 = 0.9;
  double nadam_beta2 = 0.98;
  double nadam_eps = 1e-7;
  double nadam_clip = 10.0;

  // Moment constants and clip threshold for the active optimizer.
  double active_beta1() const { return optimizer == Optimizer::Nadam ? nadam_beta1 : beta1; }
  double active_beta2() const { return optimizer == Optimizer::Nadam ? nadam_beta2 : beta2; }
  double active_eps() const { return optimizer == Optimizer::Nadam ? nadam_eps : eps; }
  double active_clip() const { return optimizer == Optimizer::Nadam ? nadam_clip : grad_clip_norm; }

  void validate() const;
  std::string to_text() const;
  static TrainConfig from_text(const std::string& text);

  bool operator==(const TrainConfig&) const = default;
};

// Linear warmup 0 -> lr over warmup_steps, then cosine from lr to min_lr
// over each cosine_cycles-step cycle, restarting while refresh_lr_scheduler
// is set.
double lr_at(int64_t step, const TrainConfig& cfg);

}  // namespace sqf::train
