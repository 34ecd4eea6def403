#include "sqf/train/trainer.hpp"

#include <cmath>
#include <cstdio>

#include "sqf/common/error.hpp"
#include "sqf/model/forward.hpp"
#include "sqf/train/loss.hpp"

namespace sqf::train {

void swa_update(SwaState& state, const model::Parameters& params) {
  if (state.mean.empty()) {
    state.mean.resize(params.count());
    for (int i = 0; i < params.count(); ++i)
      state.mean[i].assign(params.tensor(i).data.size(), 0.0f);
  }
  if (static_cast<int>(state.mean.size()) != params.count())
    throw ShapeError("swa: tensor count mismatch");
  ++state.count;
  const float k = 1.0f / static_cast<float>(state.count);
  for (int i = 0; i < params.count(); ++i) {
    const auto& src = params.tensor(i).data;
    auto& dst = state.mean[i];
    if (src.size() != dst.size()) throw ShapeError("swa: shape mismatch");
    for (size_t j = 0; j < src.size(); ++j) dst[j] += (src[j] - dst[j]) * k;
  }
}

model::Parameters swa_finalize(const SwaState& state,
                               const model::Parameters& like) {
  if (state.count == 0) throw ShapeError("swa: no snapshots");
  model::Parameters out = like;
  for (int i = 0; i < out.count(); ++i) out.tensor(i).data = state.mean[i];
  return out;
}

Trainer::Trainer(model::Parameters& params, const TrainConfig& cfg)
    : params_(params), cfg_(cfg) {
  cfg_.validate();
  m_.resize(params.count());
  v_.resize(params.count());
  for (int i = 0; i < params.count(); ++i) {
    m_[i].assign(params.tensor(i).data.size(), 0.0f);
    v_[i].assign(params.tensor(i).data.size(), 0.0f);
  }
}

StepMetrics Trainer::train_step(std::span<const data::TrainingExample> batch) {
  if (batch.empty()) throw ShapeError("train_step: empty batch");

  nn::Tape<float> tape;
  auto tp = model::stage_parameters<float>(tape, params_, true);
  auto fw = model::model_forward<float>(tape, tp, params_.config(), batch);
  auto terms = build_loss<float>(tape, fw, batch, cfg_.value_coefficient);

  StepMetrics metrics;
  metrics.step = step_ + 1;
  metrics.lr = lr_at(step_ + 1, cfg_);
  metrics.loss = terms.total.value()[0];
  metrics.policy_loss = terms.policy.value()[0];
  metrics.value_loss = terms.value.value()[0];
  metrics.policy_acc = static_cast<double>(terms.policy_correct) / batch.size();
  metrics.value_acc = static_cast<double>(terms.value_correct) / batch.size();
  if (!std::isfinite(metrics.loss)) {
    metrics.aborted = true;
    return metrics;
  }

  tape.backward(terms.total);

  double sq = 0;
  for (int i = 0; i < params_.count(); ++i)
    for (float g : tp.vars[i].grad()) sq += static_cast<double>(g) * g;
  metrics.grad_norm = std::sqrt(sq);
  const double clip = cfg_.active_clip();
  const double scale =
      metrics.grad_norm > clip ? clip / metrics.grad_norm : 1.0;

  ++step_;
  const double b1 = cfg_.active_beta1();
  const double b2 = cfg_.active_beta2();
  const double eps = cfg_.active_eps();
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const bool nesterov = cfg_.optimizer == Optimizer::Nadam;

  for (int i = 0; i < params_.count(); ++i) {
    auto& theta = params_.tensor(i).data;
    const auto& grad = tp.vars[i].grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (size_t j = 0; j < theta.size(); ++j) {
      const double g = grad[j] * scale;
      m[j] = static_cast<float>(b1 * m[j] + (1.0 - b1) * g);
      v[j] = static_cast<float>(b2 * v[j] + (1.0 - b2) * g * g);
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      // Nadam looks ahead with the Nesterov-corrected first moment.
      const double dir =
          nesterov ? b1 * mhat + (1.0 - b1) * g / bc1 : mhat;
      const double update =
          dir / (std::sqrt(vhat) + eps) + cfg_.wd * theta[j];
      theta[j] = static_cast<float>(theta[j] - metrics.lr * update);
    }
  }
  return metrics;
}

StepMetrics Trainer::evaluate(
    std::span<const data::TrainingExample> batch) const {
  if (batch.empty()) throw ShapeError("evaluate: empty batch");
  nn::Tape<float> tape;
  auto tp = model::stage_parameters<float>(tape, params_, false);
  auto fw = model::model_forward<float>(tape, tp, params_.config(), batch);
  auto terms = build_loss<float>(tape, fw, batch, cfg_.value_coefficient);
  StepMetrics metrics;
  metrics.step = step_;
  metrics.lr = lr_at(step_, cfg_);
  metrics.loss = terms.total.value()[0];
  metrics.policy_loss = terms.policy.value()[0];
  metrics.value_loss = terms.value.value()[0];
  metrics.policy_acc = static_cast<double>(terms.policy_correct) / batch.size();
  metrics.value_acc = static_cast<double>(terms.value_correct) / batch.size();
  return metrics;
}

void Trainer::save(const std::filesystem::path& path) const {
  model::CheckpointExtra extra;
  extra.meta["step"] = std::to_string(step_);
  extra.meta["optimizer"] = to_string(cfg_.optimizer);
  extra.meta["train_config"] = cfg_.to_text();
  for (int i = 0; i < params_.count(); ++i) {
    const auto& t = params_.tensor(i);
    extra.tensors.push_back({"opt.m." + t.name, t.shape, m_[i]});
    extra.tensors.push_back({"opt.v." + t.name, t.shape, v_[i]});
  }
  if (swa_.count > 0) {
    extra.meta["swa_count"] = std::to_string(swa_.count);
    for (int i = 0; i < params_.count(); ++i) {
      const auto& t = params_.tensor(i);
      extra.tensors.push_back({"swa." + t.name, t.shape, swa_.mean[i]});
    }
  }
  model::save_checkpoint(path.string(), params_, &extra);
}

void Trainer::restore(const model::CheckpointExtra& extra) {
  if (auto it = extra.meta.find("step"); it != extra.meta.end())
    step_ = std::stoll(it->second);
  auto take = [&](const std::string& name, std::vector<float>* dst) {
    for (const auto& t : extra.tensors)
      if (t.name == name) {
        if (t.data.size() != dst->size())
          throw ShapeError("restore: size mismatch for " + name);
        *dst = t.data;
        return true;
      }
    return false;
  };
  for (int i = 0; i < params_.count(); ++i) {
    const std::string& name = params_.tensor(i).name;
    if (!take("opt.m." + name, &m_[i]) || !take("opt.v." + name, &v_[i]))
      throw ParseError("restore: missing optimizer state for " + name);
  }
  if (auto it = extra.meta.find("swa_count"); it != extra.meta.end()) {
    swa_.count = std::stoll(it->second);
    swa_.mean.resize(params_.count());
    for (int i = 0; i < params_.count(); ++i) {
      swa_.mean[i].assign(params_.tensor(i).data.size(), 0.0f);
      if (!take("swa." + params_.tensor(i).name, &swa_.mean[i]))
        throw ParseError("restore: missing swa state");
    }
  }
}

MetricsLog::MetricsLog(const std::filesystem::path& path) : out_(path) {
  if (!out_) throw IoError("metrics: cannot open " + path.string());
}

void MetricsLog::append(const StepMetrics& m) {
  out_ << metrics_json(m) << '\n';
  out_.flush();
}

std::string metrics_json(const StepMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "{\"step\":%lld,\"lr\":%.8g,\"loss\":%.8g,"
                "\"policy_acc\":%.6g,\"value_acc\":%.6g}",
                static_cast<long long>(m.step), m.lr, m.loss, m.policy_acc,
                m.value_acc);
  return buf;
}

}  // namespace sqf::train
