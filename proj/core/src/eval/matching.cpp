#include "sqf/eval/matching.hpp"

#include <algorithm>
#include <cmath>

#include "sqf/common/error.hpp"
#include "sqf/model/model.hpp"

namespace sqf::eval {

std::pair<double, double> wilson_interval(int64_t correct, int64_t n,
                                          double z) {
  if (n <= 0) throw ShapeError("wilson_interval: empty sample");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(correct) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {center - half, center + half};
}

MatchingStats move_matching(const model::Parameters& params,
                            std::span<const data::TrainingExample> testset) {
  if (testset.empty()) throw ShapeError("move_matching: empty test set");
  MatchingStats stats;
  stats.n = static_cast<int64_t>(testset.size());
  double nll = 0.0;
  for (const data::TrainingExample& ex : testset) {
    const auto out = model::evaluate(params, ex);
    const auto probs = model::masked_policy(out.policy, ex.legal);
    size_t best = 0;
    int target = -1;
    for (size_t i = 0; i < ex.legal.size(); ++i) {
      if (ex.legal[i] == ex.target_move) target = static_cast<int>(i);
      if (i > 0 && (probs[i] > probs[best] ||
                    (probs[i] == probs[best] &&
                     ex.legal[i].encoding() < ex.legal[best].encoding())))
        best = i;
    }
    if (target < 0)
      throw ShapeError("move_matching: target " + ex.target_move.uci() +
                       " not in the legal list");
    if (static_cast<int>(best) == target) ++stats.correct;
    nll -= std::log(std::max(probs[target], 1e-300));
  }
  stats.accuracy = static_cast<double>(stats.correct) / stats.n;
  std::tie(stats.ci_low, stats.ci_high) =
      wilson_interval(stats.correct, stats.n);
  stats.perplexity = std::exp(nll / static_cast<double>(stats.n));
  return stats;
}

MatchingStats move_matching(const Agent& agent,
                            std::span<const data::TrainingExample> testset) {
  if (!agent.params)
    throw ShapeError("move_matching: agent '" + agent.name + "' has no model");
  return move_matching(*agent.params, testset);
}

}  // namespace sqf::eval
