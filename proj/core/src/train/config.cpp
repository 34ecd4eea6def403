#include "sqf/train/config.hpp"

#include <cmath>
#include <sstream>

#include "sqf/common/error.hpp"

namespace sqf::train {

const char* to_string(Optimizer o) {
  return o == Optimizer::Nadam ? "nadam" : "adamw";
}

Optimizer optimizer_from_string(const std::string& s) {
  if (s == "adamw") return Optimizer::AdamW;
  if (s == "nadam") return Optimizer::Nadam;
  throw ParseError("unknown optimizer '" + s + "'");
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw ShapeError("train config: " + what);
  };
  if (batch_size_train <= 0 || batch_size_val <= 0) fail("batch sizes must be positive");
  if (gradient_accumulation_steps <= 0) fail("gradient_accumulation_steps must be positive");
  if (lr <= 0 || min_lr <= 0 || lr < min_lr) fail("need lr >= min_lr > 0");
  if (wd < 0) fail("wd must be non-negative");
  if (grad_clip_norm <= 0 || nadam_clip <= 0) fail("clip norms must be positive");
  if (warmup_steps < 0) fail("warmup_steps must be non-negative");
  if (cosine_cycles <= 0) fail("cosine_cycles must be positive");
  if (value_coefficient < 0) fail("value_coefficient must be non-negative");
  if (history_mask_prob < 0 || history_mask_prob > 1) fail("history_mask_prob must be in [0, 1]");
  auto moments = [&](double b1, double b2, double e) {
    return b1 > 0 && b1 < 1 && b2 > 0 && b2 < 1 && e > 0;
  };
  if (!moments(beta1, beta2, eps) || !moments(nadam_beta1, nadam_beta2, nadam_eps))
    fail("optimizer moment constants out of range");
}

std::string TrainConfig::to_text() const {
  std::ostringstream os;
  os << "batch_size_train=" << batch_size_train << '\n'
     << "batch_size_val=" << batch_size_val << '\n'
     << "gradient_accumulation_steps=" << gradient_accumulation_steps << '\n'
     << "num_workers=" << num_workers << '\n'
     << "lr=" << lr << '\n'
     << "min_lr=" << min_lr << '\n'
     << "wd=" << wd << '\n'
     << "grad_clip_norm=" << grad_clip_norm << '\n'
     << "warmup_steps=" << warmup_steps << '\n'
     << "cosine_cycles=" << cosine_cycles << '\n'
     << "refresh_lr_scheduler=" << (refresh_lr_scheduler ? "true" : "false") << '\n'
     << "use_amp=" << (use_amp ? "true" : "false") << '\n'
     << "amp_init_scale=" << amp_init_scale << '\n'
     << "amp_max_scale=" << amp_max_scale << '\n'
     << "amp_growth_factor=" << amp_growth_factor << '\n'
     << "amp_growth_interval=" << amp_growth_interval << '\n'
     << "amp_backoff_factor=" << amp_backoff_factor << '\n'
     << "value_coefficient=" << value_coefficient << '\n'
     << "history_mask_prob=" << history_mask_prob << '\n'
     << "swa=" << (swa ? "true" : "false") << '\n'
     << "optimizer=" << to_string(optimizer) << '\n';
  return os.str();
}

namespace {

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ParseError("expected boolean, got '" + v + "'");
}

}  // namespace

TrainConfig TrainConfig::from_text(const std::string& text) {
  TrainConfig cfg;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("train config line missing '=': " + line);
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    if (key == "batch_size_train") cfg.batch_size_train = std::stoi(val);
    else if (key == "batch_size_val") cfg.batch_size_val = std::stoi(val);
    else if (key == "gradient_accumulation_steps") cfg.gradient_accumulation_steps = std::stoi(val);
    else if (key == "num_workers") cfg.num_workers = std::stoi(val);
    else if (key == "lr") cfg.lr = std::stod(val);
    else if (key == "min_lr") cfg.min_lr = std::stod(val);
    else if (key == "wd") cfg.wd = std::stod(val);
    else if (key == "grad_clip_norm") cfg.grad_clip_norm = std::stod(val);
    else if (key == "warmup_steps") cfg.warmup_steps = std::stoi(val);
    else if (key == "cosine_cycles") cfg.cosine_cycles = std::stoi(val);
    else if (key == "refresh_lr_scheduler") cfg.refresh_lr_scheduler = parse_bool(val);
    else if (key == "use_amp") cfg.use_amp = parse_bool(val);
    else if (key == "amp_init_scale") cfg.amp_init_scale = std::stod(val);
    else if (key == "amp_max_scale") cfg.amp_max_scale = std::stod(val);
    else if (key == "amp_growth_factor") cfg.amp_growth_factor = std::stod(val);
    else if (key == "amp_growth_interval") cfg.amp_growth_interval = std::stoi(val);
    else if (key == "amp_backoff_factor") cfg.amp_backoff_factor = std::stod(val);
    else if (key == "value_coefficient") cfg.value_coefficient = std::stod(val);
    else if (key == "history_mask_prob") cfg.history_mask_prob = std::stod(val);
    else if (key == "swa") cfg.swa = parse_bool(val);
    else if (key == "optimizer") cfg.optimizer = optimizer_from_string(val);
    else throw ParseError("unknown train config key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

double lr_at(int64_t step, const TrainConfig& cfg) {
  if (step < cfg.warmup_steps)
    return cfg.lr * static_cast<double>(step) / cfg.warmup_steps;
  int64_t t = step - cfg.warmup_steps;
  if (!cfg.refresh_lr_scheduler && t >= cfg.cosine_cycles) return cfg.min_lr;
  t %= cfg.cosine_cycles;
  const double phase = M_PI * static_cast<double>(t) / cfg.cosine_cycles;
  return cfg.min_lr + 0.5 * (cfg.lr - cfg.min_lr) * (1.0 + std::cos(phase));
}

}  // namespace sqf::train
