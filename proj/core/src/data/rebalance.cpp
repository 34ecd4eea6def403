#include "sqf/data/rebalance.hpp"

#include <cmath>

namespace sqf::data {

int rating_bin(double average_elo) {
  if (average_elo < 600.0) return 0;
  if (average_elo >= 2600.0) return kRatingBins - 1;
  return 1 + static_cast<int>((average_elo - 600.0) / 100.0);
}

bool Rebalancer::admit(const GameRecord& g) {
  if (seen_ == chunk_) {
    counts_.fill(0);
    full_bins_ = 0;
    seen_ = 0;
  }
  ++seen_;
  if (full_bins_ == kRatingBins) return false;
  const int bin = rating_bin(average_elo(g));
  if (counts_[bin] >= per_bin_) return false;
  if (++counts_[bin] == per_bin_) ++full_bins_;
  return true;
}

std::vector<GameRecord> rebalance(const std::vector<GameRecord>& games,
                                  int chunk, int per_bin) {
  Rebalancer r(chunk, per_bin);
  std::vector<GameRecord> out;
  for (const GameRecord& g : games)
    if (r.admit(g)) out.push_back(g);
  return out;
}

bool IntervalCapper::admit(const GameRecord& g) {
  const double avg = average_elo(g);
  if (avg < 550.0 || avg >= 2950.0) return false;
  const int center = 600 + 100 * static_cast<int>((avg - 550.0) / 100.0);
  int& used = counts_[center];
  if (used >= cap_) return false;
  ++used;
  return true;
}

}  // namespace sqf::data
