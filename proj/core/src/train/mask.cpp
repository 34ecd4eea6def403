#include "sqf/train/mask.hpp"

namespace sqf::train {

data::TrainingExample mask_history(const data::TrainingExample& ex, double p,
                                   Rng& rng) {
  const int n = ex.history();
  if (n == 0 || rng.uniform() >= p) return ex;
  const int m = 1 + static_cast<int>(rng.below(n));
  data::TrainingExample out = ex;
  const int survivor = n - m;
  for (int i = survivor + 1; i <= n; ++i) {
    out.boards[i] = out.boards[survivor];
    out.repetition[i] = out.repetition[survivor];
  }
  return out;
}

}  // namespace sqf::train
