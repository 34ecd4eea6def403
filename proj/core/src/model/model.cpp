#include "sqf/model/model.hpp"

#include <algorithm>
#include <cmath>

#include "sqf/model/forward.hpp"

namespace sqf::model {

std::array<float, 3> ValueLogits::probs() const {
  const float mx = std::max({logits[0], logits[1], logits[2]});
  std::array<float, 3> p{};
  float sum = 0.0f;
  for (int i = 0; i < 3; ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (float& v : p) v /= sum;
  return p;
}

float ValueLogits::expected_score() const {
  const auto p = probs();
  return p[0] + 0.5f * p[1];
}

EvalResult evaluate(const Parameters& params, const data::TrainingExample& ex,
                    AttentionTrace* trace) {
  nn::Tape<float> tape;
  auto tp = stage_parameters(tape, params, false);
  auto out = model_forward<float>(tape, tp, params.config(), {&ex, 1}, trace);
  EvalResult result;
  result.policy.columns = out.policy.value();
  const auto& v = out.value.value();
  result.value.logits = {v[0], v[1], v[2]};
  return result;
}

std::vector<double> masked_policy(const PolicyLogits& logits,
                                  const std::vector<chess::Move>& legal) {
  if (legal.empty()) throw ShapeError("masked_policy: no legal moves");
  std::vector<double> out(legal.size());
  double mx = -1e30;
  for (size_t i = 0; i < legal.size(); ++i) {
    out[i] = logits.score(legal[i]);
    mx = std::max(mx, out[i]);
  }
  double sum = 0.0;
  for (double& v : out) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : out) v /= sum;
  return out;
}

}  // namespace sqf::model
