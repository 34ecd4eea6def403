#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "sqf/common/error.hpp"
#include "sqf/data/example.hpp"
#include "sqf/model/forward.hpp"
#include "sqf/model/policy_space.hpp"
#include "sqf/nn/autograd.hpp"

namespace sqf::train {

template <typename T>
struct LossTerms {
  nn::Var<T> total;
  nn::Var<T> policy;  // mean CE over the legal-move-masked policy
  nn::Var<T> value;   // mean CE over the 3-way outcome
  int policy_correct = 0;
  int value_correct = 0;
};

// Cross-entropy of the played move within the legal set plus
// value_coefficient times the outcome cross-entropy. Examples carrying a
// soft_target distribution contribute a soft cross-entropy instead of the
// hard label; a batch must be uniformly hard or uniformly soft.
template <typename T>
LossTerms<T> build_loss(nn::Tape<T>& tape, const model::ForwardResult<T>& out,
                        std::span<const data::TrainingExample> batch,
                        double value_coefficient) {
  const int B = static_cast<int>(batch.size());
  if (B == 0) throw ShapeError("loss: empty batch");
  const bool soft = !batch[0].soft_target.empty();
  size_t width = 0;
  for (const data::TrainingExample& ex : batch) {
    if (ex.legal.empty()) throw IllegalMoveError("loss: no legal moves");
    if (ex.soft_target.empty() == soft)
      throw ShapeError("loss: mixed hard and soft targets in one batch");
    if (soft && ex.soft_target.size() != ex.legal.size())
      throw ShapeError("loss: soft target length mismatch");
    width = std::max(width, ex.legal.size());
  }

  // Pad every row to `width` with a sentinel column whose score is a large
  // negative constant, invisible to the softmax.
  const int cols = model::kPolicyColumns;
  auto padded = tape.concat(
      {out.policy, tape.constant({B, 1}, std::vector<T>(B, T(-1e9)))}, 1);
  std::vector<int64_t> idx(static_cast<size_t>(B) * width);
  std::vector<int> targets(B);
  std::vector<T> soft_rows;
  if (soft) soft_rows.assign(static_cast<size_t>(B) * width, T(0));
  for (int b = 0; b < B; ++b) {
    const data::TrainingExample& ex = batch[b];
    int target_at = -1;
    for (size_t j = 0; j < ex.legal.size(); ++j) {
      idx[b * width + j] = static_cast<int64_t>(b) * (cols + 1) +
                           model::policy_column(ex.legal[j]);
      if (ex.legal[j] == ex.target_move) target_at = static_cast<int>(j);
      if (soft) soft_rows[b * width + j] = T(ex.soft_target[j]);
    }
    for (size_t j = ex.legal.size(); j < width; ++j)
      idx[b * width + j] = static_cast<int64_t>(b) * (cols + 1) + cols;
    if (target_at < 0)
      throw IllegalMoveError("loss: target move " + ex.target_move.uci() +
                             " not in the legal set");
    targets[b] = target_at;
  }

  auto masked = tape.reshape(tape.gather(padded, std::move(idx)),
                             {B, static_cast<int>(width)});
  auto policy_ce = soft ? tape.cross_entropy_soft(masked, soft_rows)
                        : tape.cross_entropy(masked, targets);

  std::vector<int> outcomes(B);
  for (int b = 0; b < B; ++b)
    outcomes[b] = static_cast<int>(batch[b].target_outcome);
  auto value_ce = tape.cross_entropy(out.value, outcomes);

  LossTerms<T> terms;
  terms.policy = policy_ce;
  terms.value = value_ce;
  terms.total = tape.add(policy_ce, tape.scale(value_ce, T(value_coefficient)));

  const auto& scores = masked.value();
  for (int b = 0; b < B; ++b) {
    const T* row = scores.data() + static_cast<size_t>(b) * width;
    const int best = static_cast<int>(
        std::max_element(row, row + width) - row);
    int want = targets[b];
    if (soft) {
      const T* srow = soft_rows.data() + static_cast<size_t>(b) * width;
      want = static_cast<int>(std::max_element(srow, srow + width) - srow);
    }
    if (best == want) ++terms.policy_correct;
    const auto& vrow = out.value.value();
    const int vbest = static_cast<int>(
        std::max_element(vrow.begin() + b * 3, vrow.begin() + b * 3 + 3) -
        (vrow.begin() + b * 3));
    if (vbest == outcomes[b]) ++terms.value_correct;
  }
  return terms;
}

}  // namespace sqf::train
