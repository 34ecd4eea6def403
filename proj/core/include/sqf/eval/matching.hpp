#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include "sqf/data/example.hpp"
#include "sqf/eval/agent.hpp"
#include "sqf/model/params.hpp"

namespace sqf::eval {

struct MatchingStats {
  int64_t n = 0;
  int64_t correct = 0;
  double accuracy = 0.0;
  double ci_low = 0.0;  // Wilson 95% bounds on the accuracy
  double ci_high = 0.0;
  double perplexity = 0.0;  // exp(mean nll of the target under the masked policy)
};

// Wilson score interval for `correct` successes in `n` trials.
std::pair<double, double> wilson_interval(int64_t correct, int64_t n,
                                          double z = 1.96);

// Top-1 match rate of the masked policy against each example's target, with
// the same tie-break as select_move. Throws ShapeError on an empty set.
MatchingStats move_matching(const model::Parameters& params,
                            std::span<const data::TrainingExample> testset);
MatchingStats move_matching(const Agent& agent,
                            std::span<const data::TrainingExample> testset);

}  // namespace sqf::eval
