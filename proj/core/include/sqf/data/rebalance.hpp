#pragma once

#include <array>
#include <map>
#include <vector>

#include "sqf/data/pgn.hpp"

namespace sqf::data {

// Skill bins over the average rating of the two players: bin 0 below 600,
// bins 1..20 in 100-point steps over [600, 2600), bin 21 at 2600 and above.
// Boundaries are half-open [lo, hi).
inline constexpr int kRatingBins = 22;

int rating_bin(double average_elo);

inline double average_elo(const GameRecord& g) {
  return (g.white_elo + g.black_elo) / 2.0;
}

// Downsampler equalizing skill representation: within each sequential chunk
// of `chunk` games, at most `per_bin` games pass per skill bin; admission
// stops early once every bin is full. Stateful, single-stream.
class Rebalancer {
 public:
  explicit Rebalancer(int chunk = 20000, int per_bin = 10)
      : chunk_(chunk), per_bin_(per_bin) {}

  bool admit(const GameRecord& g);

  const std::array<int, kRatingBins>& chunk_counts() const { return counts_; }

 private:
  int chunk_;
  int per_bin_;
  int seen_ = 0;
  int full_bins_ = 0;
  std::array<int, kRatingBins> counts_{};
};

std::vector<GameRecord> rebalance(const std::vector<GameRecord>& games,
                                  int chunk = 20000, int per_bin = 10);

// Cap for assembling rating-stratified evaluation corpora: games fall into
// 100-point buckets over [550, 2950) keyed by the bucket's center rating
// (600, 700, ..., 2900); each bucket admits at most `cap` games and ratings
// outside the range are dropped.
class IntervalCapper {
 public:
  explicit IntervalCapper(int cap = 1000) : cap_(cap) {}

  bool admit(const GameRecord& g);

  const std::map<int, int>& bucket_counts() const { return counts_; }

 private:
  int cap_;
  std::map<int, int> counts_;
};

}  // namespace sqf::data
