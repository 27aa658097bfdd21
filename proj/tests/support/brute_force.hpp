#pragma once

// Independent enumeration oracles.  Nothing here calls into the library
// except the Pmf container.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

#include "stein_poisson/pmf.hpp"

namespace brute {

using stein_poisson::Pmf;

inline Pmf from_counts(const std::map<long long, double>& w, double total) {
  Pmf p;
  const long long top = w.empty() ? 0 : w.rbegin()->first;
  p.mass.assign(static_cast<std::size_t>(top) + 1, 0.0);
  for (const auto& [k, v] : w) p.mass[static_cast<std::size_t>(k)] = v / total;
  return p;
}

// Poi(lambda) on 0..cut, with the remainder as tail, by the textbook formula.
inline Pmf poisson(double lambda, int cut = 200) {
  Pmf p;
  double s = 0.0;
  for (int j = 0; j <= cut; ++j) {
    const double m = std::exp(-lambda + j * std::log(lambda) - std::lgamma(j + 1.0));
    p.mass.push_back(m);
    s += m;
  }
  p.tail = std::max(0.0, 1.0 - s);
  return p;
}

inline double tv(const Pmf& a, const Pmf& b) {
  const std::size_t n = std::max(a.mass.size(), b.mass.size());
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += std::abs(a.at(j) - b.at(j));
  return 0.5 * (s + a.tail + b.tail);
}

// Law of sum of independent Bernoulli(p_i) over all 2^n outcomes.
inline Pmf poisson_binomial(const std::vector<double>& p) {
  const std::size_t n = p.size();
  std::map<long long, double> w;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double m = 1.0;
    for (std::size_t i = 0; i < n; ++i) m *= ((mask >> i) & 1u) ? p[i] : 1.0 - p[i];
    w[__builtin_popcountll(mask)] += m;
  }
  return from_counts(w, 1.0);
}

// Law of the number of positions where a uniform rearrangement of `word`
// agrees with `word`; every one of the n! position permutations is visited.
inline Pmf rearrangement_matches(const std::vector<int>& word) {
  const int n = static_cast<int>(word.size());
  std::vector<int> pos(n);
  std::iota(pos.begin(), pos.end(), 0);
  std::map<long long, double> w;
  double total = 0;
  do {
    int m = 0;
    for (int i = 0; i < n; ++i) m += word[pos[i]] == word[i];
    w[m] += 1;
    total += 1;
  } while (std::next_permutation(pos.begin(), pos.end()));
  return from_counts(w, total);
}

inline Pmf fixed_points(int n) { return rearrangement_matches([&] {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}()); }

// Law of stat(box counts) over all n^k placements of k labelled balls.
inline Pmf placements(int n, int k, const std::function<long long(const std::vector<int>&)>& stat) {
  std::vector<int> ball(k, 0), counts(n, 0);
  counts[0] = k;
  std::map<long long, double> w;
  double total = 0;
  while (true) {
    w[stat(counts)] += 1;
    total += 1;
    int i = 0;
    while (i < k) {
      --counts[ball[i]];
      if (++ball[i] < n) {
        ++counts[ball[i]];
        break;
      }
      ball[i] = 0;
      ++counts[0];
      ++i;
    }
    if (i == k) break;
  }
  return from_counts(w, total);
}

// Law of the number of monochromatic k-subsets over all c^n colorings.
inline Pmf monochromatic(int n, int k, int c) {
  std::vector<unsigned> subsets;
  for (unsigned mask = 0; mask < (1u << n); ++mask)
    if (__builtin_popcount(mask) == k) subsets.push_back(mask);
  std::vector<int> col(n, 0);
  std::map<long long, double> w;
  double total = 0;
  while (true) {
    long long m = 0;
    for (unsigned s : subsets) {
      int first = -1;
      bool mono = true;
      for (int i = 0; i < n && mono; ++i)
        if ((s >> i) & 1u) {
          if (first < 0) first = col[i];
          else mono = col[i] == first;
        }
      m += mono;
    }
    w[m] += 1;
    total += 1;
    int i = 0;
    while (i < n && ++col[i] == c) col[i++] = 0;
    if (i == n) break;
  }
  return from_counts(w, total);
}

inline long long choose_ll(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace brute
