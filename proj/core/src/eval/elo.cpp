#include "sqf/eval/elo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "sqf/common/error.hpp"

namespace sqf::eval {

namespace {

const double kScale = std::log(10.0) / 400.0;
constexpr double kBound = 4000.0;  // search box radius around the anchor
constexpr double kChi2 = 3.841458820694124;  // 95% quantile, one dof

struct PairStat {
  int a, b;
  double score;  // a's points
  double n;
};

double log_likelihood(const std::vector<PairStat>& pairs,
                      const std::vector<double>& r) {
  double ll = 0.0;
  for (const PairStat& p : pairs) {
    const double d = kScale * (r[p.a] - r[p.b]);
    const double lse = d > 0 ? std::log1p(std::exp(-d))
                             : -d + std::log1p(std::exp(d));
    ll += p.score * -lse + (p.n - p.score) * (-d - lse);
  }
  return ll;
}

// Damped Newton coordinate ascent over the free coordinates, clamped to the
// search box.
void optimize(const std::vector<PairStat>& pairs, std::span<const int> free,
              std::vector<double>& r, double center) {
  for (int iter = 0; iter < 20000; ++iter) {
    double shift = 0.0;
    for (int i : free) {
      double g = 0.0;
      double h = 0.0;
      for (const PairStat& p : pairs) {
        if (p.a != i && p.b != i) continue;
        const double d = kScale * (r[p.a] - r[p.b]);
        const double prob = 1.0 / (1.0 + std::exp(-d));
        const double own = p.a == i ? p.score : p.n - p.score;
        const double own_prob = p.a == i ? prob : 1.0 - prob;
        g += kScale * (own - p.n * own_prob);
        h += kScale * kScale * p.n * prob * (1.0 - prob);
      }
      if (h <= 0.0) continue;
      const double step = std::clamp(g / h, -200.0, 200.0);
      const double next = std::clamp(r[i] + step, center - kBound,
                                     center + kBound);
      shift = std::max(shift, std::abs(next - r[i]));
      r[i] = next;
    }
    if (shift < 1e-9) break;
  }
}

double profile_ll(const std::vector<PairStat>& pairs,
                  std::span<const int> others, std::vector<double> r, int i,
                  double ri, double center) {
  r[i] = ri;
  optimize(pairs, others, r, center);
  return log_likelihood(pairs, r);
}

// Bound of the 95% profile-likelihood interval on coordinate i, searching
// from the MLE in direction dir; +/-infinity when the deficit never reaches
// the chi-square threshold inside the box.
double profile_bound(const std::vector<PairStat>& pairs,
                     std::span<const int> free,
                     const std::vector<double>& mle, int i, double center,
                     double ll_max, int dir) {
  std::vector<int> others;
  for (int j : free)
    if (j != i) others.push_back(j);
  const double target = ll_max - kChi2 / 2.0;
  double lo = mle[i];
  double hi = mle[i];
  double step = 25.0;
  while (true) {
    hi = mle[i] + dir * step;
    if (std::abs(hi - center) > kBound)
      return dir > 0 ? std::numeric_limits<double>::infinity()
                     : -std::numeric_limits<double>::infinity();
    if (profile_ll(pairs, others, mle, i, hi, center) < target) break;
    lo = hi;
    step *= 2.0;
  }
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (profile_ll(pairs, others, mle, i, mid, center) >= target) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

EloEstimate estimate_elo(const MatchResult& result, int anchor,
                         double anchor_elo) {
  const int n = static_cast<int>(result.names.size());
  if (n < 2) throw ShapeError("estimate_elo: need at least two agents");
  if (anchor < 0 || anchor >= n)
    throw ShapeError("estimate_elo: anchor out of range");

  std::vector<PairStat> pairs;
  for (const PairRecord& pr : result.pairs)
    if (pr.games() > 0)
      pairs.push_back(
          {pr.a, pr.b, pr.points(), static_cast<double>(pr.games())});

  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const PairStat& p : pairs) parent[find(p.a)] = find(p.b);
  for (int i = 0; i < n; ++i)
    if (find(i) != find(anchor))
      throw ShapeError("estimate_elo: agent '" + result.names[i] +
                       "' not connected to the anchor");

  EloEstimate est;
  est.anchor = anchor;
  est.rating.assign(n, anchor_elo);
  std::vector<int> free;
  for (int i = 0; i < n; ++i)
    if (i != anchor) free.push_back(i);
  optimize(pairs, free, est.rating, anchor_elo);
  for (int i : free)
    if (std::abs(est.rating[i] - anchor_elo) >= kBound - 1e-6)
      est.degenerate = true;

  const double ll_max = log_likelihood(pairs, est.rating);
  est.ci_low = est.rating;
  est.ci_high = est.rating;
  for (int i : free) {
    est.ci_low[i] = profile_bound(pairs, free, est.rating, i, anchor_elo,
                                  ll_max, -1);
    est.ci_high[i] = profile_bound(pairs, free, est.rating, i, anchor_elo,
                                   ll_max, +1);
    if (std::isinf(est.ci_low[i]) || std::isinf(est.ci_high[i]))
      est.degenerate = true;
  }
  return est;
}

}  // namespace sqf::eval
