#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmf.hpp"
#include "rational.hpp"

namespace stein_poisson {

// Thrown when an exact computation would exceed its size cap.
struct CapError : std::length_error {
  double estimate;
  double cap;
  CapError(const std::string& what, double est, double lim)
      : std::length_error(what + " (size estimate " + fmt_num(est) + " > cap " + fmt_num(lim) + ")"),
        estimate(est),
        cap(lim) {}

 private:
  static std::string fmt_num(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
  }
};

inline constexpr int kPlainMatchingCap = 500;
inline constexpr int kMultisetMatchingCap = 10;
inline constexpr double kDpStateCap = 1e8;

// ===========================================================================
// Independent trials

inline Pmf poisson_binomial_pmf(const std::vector<double>& p) {
  for (double x : p)
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("poisson_binomial_pmf: p_i outside [0,1]");
  std::vector<double> f{1.0};
  for (double x : p) {
    f.push_back(0.0);
    for (std::size_t j = f.size() - 1; j > 0; --j) f[j] = f[j] * (1.0 - x) + f[j - 1] * x;
    f[0] *= 1.0 - x;
  }
  return Pmf{std::move(f), 0.0};
}

// ===========================================================================
// Matching

struct MatchingSpec {
  int n = 0;
  std::vector<int> multiplicities;  // empty: plain matching

  bool plain() const {
    return multiplicities.empty() ||
           std::all_of(multiplicities.begin(), multiplicities.end(), [](int l) { return l == 1; });
  }
  std::vector<int> lengths() const { return multiplicities.empty() ? std::vector<int>(n, 1) : multiplicities; }
};

inline MatchingSpec multiset_spec(std::vector<int> l) {
  for (int x : l)
    if (x < 1) throw std::invalid_argument("multiplicities must be positive");
  const int n = std::accumulate(l.begin(), l.end(), 0);
  return MatchingSpec{n, std::move(l)};
}

inline void validate(const MatchingSpec& s) {
  if (s.n < 1) throw std::invalid_argument("matching: n must be positive");
  if (!s.multiplicities.empty()) {
    int total = 0;
    for (int l : s.multiplicities) {
      if (l < 1) throw std::invalid_argument("matching: multiplicities must be positive");
      total += l;
    }
    if (total != s.n) throw std::invalid_argument("matching: multiplicities must sum to n");
  }
}

// P(W = m) = C(n,m) D_{n-m} / n!
inline std::vector<mpq_class> rencontres_law_exact(int n) {
  if (n < 0) throw std::invalid_argument("rencontres: n must be non-negative");
  const auto d = derangements(static_cast<std::size_t>(n));
  const mpz_class nf = factorial(static_cast<unsigned long>(n));
  std::vector<mpq_class> law(static_cast<std::size_t>(n) + 1);
  for (int m = 0; m <= n; ++m) {
    law[m] = mpq_class(binomial(n, m) * d[n - m], nf);
    law[m].canonicalize();
  }
  return law;
}

// Symbol word 0..0 1..1 ... with the given multiplicities.
inline std::vector<int> symbol_word(const std::vector<int>& l) {
  std::vector<int> w;
  for (std::size_t i = 0; i < l.size(); ++i) w.insert(w.end(), static_cast<std::size_t>(l[i]), static_cast<int>(i));
  return w;
}

inline Pmf matching_pmf(const MatchingSpec& spec) {
  validate(spec);
  if (spec.plain()) {
    if (spec.n > kPlainMatchingCap) throw CapError("matching_pmf: plain n over cap", spec.n, kPlainMatchingCap);
    return Pmf{to_double(rencontres_law_exact(spec.n)), 0.0};
  }
  if (spec.n > kMultisetMatchingCap)
    throw CapError("matching_pmf: multiset case enumerates n!", std::tgamma(spec.n + 1.0),
                   std::tgamma(kMultisetMatchingCap + 1.0));
  const std::vector<int> sym = symbol_word(spec.multiplicities);
  const int n = spec.n;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(n) + 1, 0);
  std::uint64_t total = 0;
  do {
    int w = 0;
    for (int m = 0; m < n; ++m) w += sym[perm[m]] == sym[m];
    ++counts[w];
    ++total;
  } while (std::next_permutation(perm.begin(), perm.end()));
  Pmf out;
  for (auto c : counts) out.mass.push_back(static_cast<double>(c) / static_cast<double>(total));
  return out;
}

struct MatchingMoments {
  double lambda;
  double EW2;
  double E2a2;
  std::vector<double> EWi;
  std::vector<double> EWi2;
  std::vector<std::vector<double>> EWijWji;  // off-diagonal entries only
  double cross_term;                         // E(W^2 - sum_i W_i^2)
};

inline MatchingMoments matching_moments(const MatchingSpec& spec) {
  validate(spec);
  if (spec.n < 2) throw std::invalid_argument("matching_moments: n must be at least 2");
  const double n = spec.n;
  const std::vector<int> l = spec.lengths();
  const std::size_t k = l.size();
  MatchingMoments m;
  m.E2a2 = 1.0;
  m.EWi.resize(k);
  m.EWi2.resize(k);
  m.EWijWji.assign(k, std::vector<double>(k, 0.0));
  double lam = 0.0, diag = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double li = l[i];
    m.EWi[i] = li * li / n;
    m.EWi2[i] = li * li * (n + li * li - 2.0 * li) / (n * (n - 1.0));
    lam += m.EWi[i];
    diag += m.EWi2[i];
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      const double lj = l[j];
      m.EWijWji[i][j] = li * li * lj * lj / (n * (n - 1.0));
      cross += m.EWijWji[i][j];
    }
  }
  m.lambda = lam;
  m.cross_term = cross;
  m.EW2 = diag + cross;
  return m;
}

// ===========================================================================
// Balls in boxes

enum class OccupancyStatistic {
  pairs,        // boxes with at least two balls
  triples,      // sum over boxes of C(count, 3)
  empty,        // empty boxes
  exact_level,  // boxes with exactly `level` balls
  pair_count    // sum over boxes of C(count, 2)
};

struct OccupancySpec {
  int n_boxes = 1;
  int k_balls = 0;
  OccupancyStatistic statistic = OccupancyStatistic::pairs;
  int level = 0;
};

inline long long occupancy_stat(const OccupancySpec& s, int count) {
  const long long c = count;
  switch (s.statistic) {
    case OccupancyStatistic::pairs: return c >= 2;
    case OccupancyStatistic::triples: return c * (c - 1) * (c - 2) / 6;
    case OccupancyStatistic::empty: return c == 0;
    case OccupancyStatistic::exact_level: return c == s.level;
    case OccupancyStatistic::pair_count: return c * (c - 1) / 2;
  }
  return 0;
}

inline long long occupancy_stat_max(const OccupancySpec& s) {
  const long long n = s.n_boxes, k = s.k_balls;
  switch (s.statistic) {
    case OccupancyStatistic::pairs: return std::min(n, k / 2);
    case OccupancyStatistic::triples: return k * (k - 1) * (k - 2) / 6;
    case OccupancyStatistic::empty: return n;
    case OccupancyStatistic::exact_level: return s.level == 0 ? n : std::min(n, k / s.level);
    case OccupancyStatistic::pair_count: return k * (k - 1) / 2;
  }
  return 0;
}

inline void validate(const OccupancySpec& s) {
  if (s.n_boxes < 1) throw std::invalid_argument("occupancy: n_boxes must be at least 1");
  if (s.k_balls < 0) throw std::invalid_argument("occupancy: k_balls must be nonnegative");
  if (s.statistic == OccupancyStatistic::exact_level && s.level < 0)
    throw std::invalid_argument("occupancy: level must be nonnegative");
}

namespace detail {

// Law of sum_b stat(count_b) for `balls` balls thrown uniformly into `boxes`
// boxes.  Boxes are filled one at a time: given r balls already placed, the
// next box receives Binomial(balls - r, 1/remaining boxes).
template <class Stat>
Pmf additive_occupancy_dp(int boxes, int balls, long long stat_max, Stat stat) {
  const double estimate = static_cast<double>(boxes) * (balls + 1.0) * (stat_max + 1.0);
  if (estimate > kDpStateCap) throw CapError("occupancy DP over cap", estimate, kDpStateCap);

  const std::size_t K = static_cast<std::size_t>(balls);
  // dp[r][s]; only s in [0, hi[r]] can be nonzero
  std::vector<std::vector<double>> dp(K + 1);
  dp[0] = {1.0};
  std::vector<double> binom;
  for (int b = 0; b < boxes; ++b) {
    const int remaining = boxes - b;
    const bool last = remaining == 1;
    const double q = 1.0 / remaining;
    std::vector<std::vector<double>> next(K + 1);
    for (std::size_t r = 0; r <= K; ++r) {
      if (dp[r].empty()) continue;
      const int left = balls - static_cast<int>(r);
      binom.assign(static_cast<std::size_t>(left) + 1, 0.0);
      if (last) {
        binom[left] = 1.0;
      } else {
        for (int c = 0; c <= left; ++c)
          binom[c] = std::exp(log_choose(left, c) + c * std::log(q) + (left - c) * std::log1p(-q));
      }
      for (int c = 0; c <= left; ++c) {
        if (binom[c] == 0.0) continue;
        const auto ds = static_cast<std::size_t>(stat(c));
        std::vector<double>& dst = next[r + static_cast<std::size_t>(c)];
        const std::vector<double>& src = dp[r];
        if (dst.size() < src.size() + ds) dst.resize(src.size() + ds, 0.0);
        for (std::size_t s = 0; s < src.size(); ++s)
          if (src[s] != 0.0) dst[s + ds] += src[s] * binom[c];
      }
    }
    dp.swap(next);
  }
  Pmf out;
  out.mass = dp[K];
  if (out.mass.empty()) out.mass = {1.0};
  while (out.mass.size() > 1 && out.mass.back() == 0.0) out.mass.pop_back();
  return out;
}

}  // namespace detail

// Exact empty-box law by inclusion-exclusion over integers:
// P(W = w) = C(n,w) sum_j (-1)^j C(n-w,j) (n-w-j)^k / n^k
inline std::vector<mpq_class> empty_boxes_law_exact(int n, int k) {
  if (n < 1 || k < 0) throw std::invalid_argument("empty_boxes_law_exact: bad n or k");
  std::vector<mpz_class> pw(static_cast<std::size_t>(n) + 1);
  for (int x = 0; x <= n; ++x) mpz_ui_pow_ui(pw[x].get_mpz_t(), static_cast<unsigned long>(x), static_cast<unsigned long>(k));
  const mpz_class denom = pw[n];
  std::vector<mpq_class> law(static_cast<std::size_t>(n) + 1);
  for (int w = 0; w <= n; ++w) {
    const int m = n - w;
    mpz_class acc = 0;
    for (int j = 0; j <= m; ++j) {
      const mpz_class term = binomial(m, j) * pw[m - j];
      if (j % 2 == 0) acc += term;
      else acc -= term;
    }
    law[w] = mpq_class(binomial(n, w) * acc, denom);
    law[w].canonicalize();
  }
  return law;
}

inline constexpr double kEmptyBoxesExactCap = 2e5;  // n * k for the rational path

// Same law in floating point: each alternating inner sum is dominated by
// Poisson-like terms, so it is cut once terms fall below 1e-20 of the running
// maximum.  Mass beyond the last computed w is bounded by
// P(W >= w) <= E C(W, w) = C(n,w)(1 - w/n)^k, which is stored as the tail.
inline Pmf empty_boxes_law_float(int n, int k) {
  if (n < 1 || k < 0) throw std::invalid_argument("empty_boxes_law_float: bad n or k");
  // log S_i = log C(n,i) + k log(1 - i/n), built incrementally: lgamma(n)
  // alone would cost ~n*eps of absolute accuracy.
  std::vector<double> log_s(static_cast<std::size_t>(n) + 1, -INFINITY);
  log_s[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    const double step = (k == 0) ? 0.0 : (i + 1 == n ? -INFINITY : k * std::log1p(-1.0 / (n - i)));
    log_s[i + 1] = log_s[i] + std::log(static_cast<double>(n - i) / (i + 1)) + step;
    if (log_s[i + 1] == -INFINITY) break;
  }
  // P(W = w) = sum_j (-1)^j C(w+j, w) S_{w+j}
  Pmf out;
  double total = 0.0;
  int w = 0;
  for (; w <= n; ++w) {
    double sum = 0.0, comp = 0.0, tmax = 0.0, log_c = 0.0;
    for (int j = 0; w + j <= n; ++j) {
      if (j > 0) log_c += std::log(static_cast<double>(w + j) / j);
      const double lt = log_s[w + j] + log_c;
      if (lt == -INFINITY) break;
      const double t = std::exp(lt);
      tmax = std::max(tmax, t);
      const double y = ((j % 2 == 0) ? t : -t) - comp;
      const double s2 = sum + y;
      comp = (s2 - sum) - y;
      sum = s2;
      if (t < 1e-20 * tmax && j > 2) break;
    }
    out.mass.push_back(std::max(0.0, sum));
    total += out.mass.back();
    if (w > 0 && total > 0.5 && out.mass.back() < 1e-300) break;
  }
  out.tail = (w >= n) ? 0.0 : std::exp(log_s[w + 1]);
  return out;
}

inline Pmf empty_boxes_law(int n, int k) {
  if (static_cast<double>(n) * k <= kEmptyBoxesExactCap) return Pmf{to_double(empty_boxes_law_exact(n, k)), 0.0};
  return empty_boxes_law_float(n, k);
}

inline Pmf occupancy_pmf(const OccupancySpec& spec) {
  validate(spec);
  if (spec.statistic == OccupancyStatistic::empty) {
    Pmf p = empty_boxes_law(spec.n_boxes, spec.k_balls);
    while (p.mass.size() > 1 && p.mass.back() == 0.0) p.mass.pop_back();
    return p;
  }
  return detail::additive_occupancy_dp(spec.n_boxes, spec.k_balls, occupancy_stat_max(spec),
                                       [&](int c) { return occupancy_stat(spec, c); });
}

// Same law by the box DP even for the empty-box statistic; used to cross-check
// the closed form.
inline Pmf occupancy_pmf_dp(const OccupancySpec& spec) {
  validate(spec);
  return detail::additive_occupancy_dp(spec.n_boxes, spec.k_balls, occupancy_stat_max(spec),
                                       [&](int c) { return occupancy_stat(spec, c); });
}

struct OccupancyMoments {
  std::vector<double> EMl;   // E M_l, l = 0..k
  double EW = 0.0;
  std::vector<double> EMl2;  // E M_l^2, l = 0..k
};

// P(box 1 holds exactly l balls), in logs
inline double log_level_prob(int n, int k, int l) {
  const double nd = n;
  if (l > k) return -INFINITY;
  if (n == 1) return l == k ? 0.0 : -INFINITY;
  return log_choose(k, l) - l * std::log(nd) + (k - l) * std::log1p(-1.0 / nd);
}

// P(box 1 and box 2 each hold exactly l balls), in logs
inline double log_level_pair_prob(int n, int k, int l) {
  const double nd = n;
  if (2 * l > k || n < 2) return -INFINITY;
  const double lf = std::lgamma(l + 1.0);
  const double rest = (n == 2) ? (k == 2 * l ? 0.0 : -INFINITY) : (k - 2 * l) * std::log1p(-2.0 / nd);
  return std::lgamma(k + 1.0) - 2.0 * lf - std::lgamma(k - 2.0 * l + 1.0) - 2.0 * l * std::log(nd) + rest;
}

inline OccupancyMoments occupancy_moments(const OccupancySpec& spec) {
  validate(spec);
  const int n = spec.n_boxes, k = spec.k_balls;
  const double nd = n;
  OccupancyMoments m;
  m.EMl.resize(static_cast<std::size_t>(k) + 1);
  m.EMl2.resize(static_cast<std::size_t>(k) + 1);
  for (int l = 0; l <= k; ++l) {
    m.EMl[l] = nd * std::exp(log_level_prob(n, k, l));
    m.EMl2[l] = m.EMl[l] + nd * (nd - 1.0) * std::exp(log_level_pair_prob(n, k, l));
  }
  switch (spec.statistic) {
    case OccupancyStatistic::triples: m.EW = choose(k, 3) / (nd * nd); break;
    case OccupancyStatistic::empty: m.EW = m.EMl[0]; break;
    case OccupancyStatistic::pairs: m.EW = nd - m.EMl[0] - (k >= 1 ? m.EMl[1] : 0.0); break;
    case OccupancyStatistic::exact_level: m.EW = spec.level <= k ? m.EMl[spec.level] : 0.0; break;
    case OccupancyStatistic::pair_count: m.EW = choose(k, 2) / nd; break;
  }
  return m;
}

// Mean and variance of the empty-box count, with the variance assembled as
// lambda + lambda^2 expm1(r) to avoid cancelling two O(1) quantities.
struct MeanVariance {
  double mean;
  double variance;
};

inline MeanVariance empty_boxes_mean_variance(int n, int k) {
  if (n < 2 || k < 0) throw std::invalid_argument("empty_boxes_mean_variance: need n >= 2, k >= 0");
  const double nd = n;
  const double lambda = nd * std::exp(k * std::log1p(-1.0 / nd));
  if (n == 2) {
    const double second = 2.0 * std::pow(0.0, k);  // n(n-1)(1-2/n)^k
    return {lambda, lambda + second - lambda * lambda};
  }
  const double r = std::log1p(-1.0 / nd) + k * (std::log1p(-2.0 / nd) - 2.0 * std::log1p(-1.0 / nd));
  return {lambda, lambda + lambda * lambda * std::expm1(r)};
}

// ===========================================================================
// Colorings

struct ColoringSpec {
  int n_points = 2;
  int k = 2;
  int n_colors = 1;
};

inline void validate(const ColoringSpec& s) {
  if (s.n_points < 1) throw std::invalid_argument("coloring: n_points must be positive");
  if (s.k < 2) throw std::invalid_argument("coloring: k must be at least 2");
  if (s.k > s.n_points) throw std::invalid_argument("coloring: k must not exceed n_points");
  if (s.n_colors < 1) throw std::invalid_argument("coloring: n_colors must be positive");
}

inline Pmf coloring_pmf(const ColoringSpec& spec) {
  validate(spec);
  const long long smax = static_cast<long long>(choose(spec.n_points, spec.k));
  return detail::additive_occupancy_dp(spec.n_colors, spec.n_points, smax, [&](int c) {
    return static_cast<long long>(choose(c, spec.k));
  });
}

inline double coloring_lambda(const ColoringSpec& s) {
  return choose(s.n_points, s.k) * std::pow(static_cast<double>(s.n_colors), 1.0 - s.k);
}

// ===========================================================================
// Coupon collector

struct CouponDiagnostics {
  double EW;
  double EN1W;
  double p;
  double rho;
  double varN1_exact;
  double varN1_upper;
};

inline CouponDiagnostics coupon_collector_diagnostics(int n, int k) {
  if (n < 3 || k < 0) throw std::invalid_argument("coupon diagnostics: need n >= 3, k >= 0");
  const double nd = n, kd = k;
  const double a1 = std::log1p(-1.0 / nd), a2 = std::log1p(-2.0 / nd);
  CouponDiagnostics d;
  d.EW = nd * std::exp(kd * a1);
  d.EN1W = k >= 1 ? nd * (nd - 1.0) * (kd / nd) * std::exp((kd - 1.0) * a2) : 0.0;
  d.p = k >= 1 ? kd / nd * std::exp((kd - 1.0) * a1) : 0.0;
  d.rho = k >= 2 ? kd * (kd - 1.0) / (nd * nd) * std::exp((kd - 2.0) * a2) : 0.0;
  d.varN1_exact = nd * d.p * (1.0 - d.p) + nd * (nd - 1.0) * (d.rho - d.p * d.p);
  d.varN1_upper = (k >= 1 ? kd * std::exp((kd - 1.0) * a1) : 0.0) +
                        (k >= 2 ? 2.0 * kd * kd / nd * std::exp((kd - 2.0) * a2) : 0.0);
  return d;
}

inline int coupon_balls_for_theta(int n, double theta) {
  return static_cast<int>(std::llround(n * std::log(static_cast<double>(n)) + theta * n));
}

inline double coupon_theta(int n, int k) {
  const double nd = n;
  return (k - nd * std::log(nd)) / nd;
}

}  // namespace stein_poisson
