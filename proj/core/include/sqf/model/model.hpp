#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sqf/chess/types.hpp"
#include "sqf/data/example.hpp"
#include "sqf/model/params.hpp"
#include "sqf/model/policy_space.hpp"

namespace sqf::model {

// Per-layer attention decomposition for a single position. The row-wise
// identity weights = softmax(dpa_logits + gab_bias) holds for every encoding;
// encodings whose bias is not generated from the tokens fold it into
// dpa_logits and report a zero gab_bias.
struct AttentionTrace {
  struct Layer {
    std::vector<float> gab_bias;    // heads*64*64
    std::vector<float> dpa_logits;  // heads*64*64, post-scaling
    std::vector<float> weights;     // heads*64*64, post-softmax
  };
  int layers = 0;
  int heads = 0;
  std::vector<Layer> layer;

  float at(const std::vector<float> Layer::*field, int l, int h, int q,
           int k) const {
    return (layer[l].*field)[(static_cast<size_t>(h) * 64 + q) * 64 + k];
  }
};

// Scores over the canonical from-to column space.
struct PolicyLogits {
  std::vector<float> columns;  // kPolicyColumns

  float score(const chess::Move& m) const { return columns[policy_column(m)]; }
};

// Win/draw/loss scores from the mover's perspective.
struct ValueLogits {
  std::array<float, 3> logits{};

  std::array<float, 3> probs() const;
  float expected_score() const;  // P(win) + 0.5 P(draw)
};

struct EvalResult {
  PolicyLogits policy;
  ValueLogits value;
};

// Single-position forward pass in 32-bit; pass a trace to capture the
// attention decomposition.
EvalResult evaluate(const Parameters& params, const data::TrainingExample& ex,
                    AttentionTrace* trace = nullptr);

// Softmax restricted to the legal moves, aligned with `legal`.
std::vector<double> masked_policy(const PolicyLogits& logits,
                                  const std::vector<chess::Move>& legal);

// Analytic forward-pass FLOP estimate (multiply-add = 2 FLOPs).
int64_t count_flops(const ModelConfig& cfg);

}  // namespace sqf::model
