#pragma once

#include "sqf/common/rng.hpp"
#include "sqf/data/example.hpp"

namespace sqf::train {

// With probability p, truncates the example's history: draws m uniform in
// {1..n} and overwrites the m oldest stack slots with the oldest surviving
// board (and its repetition flag), exactly how genuinely missing history is
// encoded. Identity otherwise, and always when n == 0.
data::TrainingExample mask_history(const data::TrainingExample& ex, double p,
                                   Rng& rng);

}  // namespace sqf::train
