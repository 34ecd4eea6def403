#pragma once

#include <vector>

#include "sqf/eval/tournament.hpp"

namespace sqf::eval {

struct EloEstimate {
  std::vector<double> rating;
  std::vector<double> ci_low;  // profile-likelihood 95% bounds
  std::vector<double> ci_high;
  int anchor = 0;
  bool degenerate = false;  // some rating or bound ran off the search box
};

// Maximum-likelihood ratings under P(i beats j) = 1/(1+10^((Rj-Ri)/400))
// with draws counted as half wins; the anchor's rating is pinned. Throws
// ShapeError when some agent is not connected to the anchor by played games.
EloEstimate estimate_elo(const MatchResult& result, int anchor,
                         double anchor_elo = 0.0);

}  // namespace sqf::eval
