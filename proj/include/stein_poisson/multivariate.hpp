#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "bounds.hpp"
#include "exact_laws.hpp"
#include "pmf.hpp"
#include "rational.hpp"
#include "stein_core.hpp"

namespace stein_poisson {

// ===========================================================================
// Joint laws on N^d

struct JointPmf {
  std::size_t dim = 0;
  std::map<std::vector<int>, double> mass;
  double tail = 0.0;

  double total() const {
    double s = tail;
    for (const auto& [x, m] : mass) s += m;
    return s;
  }
  double at(const std::vector<int>& x) const {
    const auto it = mass.find(x);
    return it == mass.end() ? 0.0 : it->second;
  }
};

inline constexpr int kJointEnumerationCap = 9;

// Exact law of (fixed points, cyclic successions sigma(i) = i+1 mod n) under uniform S_n.
inline JointPmf joint_fixed_point_succession_pmf(int n) {
  if (n < 1) throw std::invalid_argument("joint_fixed_point_succession_pmf: n must be positive");
  if (n > kJointEnumerationCap)
    throw CapError("joint_fixed_point_succession_pmf: enumerates n!", std::tgamma(n + 1.0),
                   std::tgamma(kJointEnumerationCap + 1.0));
  std::vector<int> s(n);
  std::iota(s.begin(), s.end(), 0);
  std::map<std::vector<int>, std::uint64_t> counts;
  std::uint64_t total = 0;
  do {
    int w1 = 0, w2 = 0;
    for (int i = 0; i < n; ++i) {
      w1 += s[i] == i;
      w2 += s[i] == (i + 1) % n;
    }
    ++counts[{w1, w2}];
    ++total;
  } while (std::next_permutation(s.begin(), s.end()));
  JointPmf out;
  out.dim = 2;
  for (const auto& [x, c] : counts) out.mass[x] = static_cast<double>(c) / static_cast<double>(total);
  return out;
}

inline Pmf marginal(const JointPmf& j, std::size_t coord) {
  if (coord >= j.dim) throw std::invalid_argument("marginal: coordinate out of range");
  Pmf p;
  for (const auto& [x, m] : j.mass) {
    const auto v = static_cast<std::size_t>(x[coord]);
    if (v >= p.mass.size()) p.mass.resize(v + 1, 0.0);
    p.mass[v] += m;
  }
  p.tail = j.tail;
  return p;
}

inline JointPmf product_poisson_joint(const std::vector<double>& lambdas, double truncation_eps = 1e-12) {
  if (lambdas.empty()) throw std::invalid_argument("product_poisson_joint: no coordinates");
  std::vector<Pmf> marg;
  double log_inside = 0.0;
  for (double l : lambdas) {
    if (!(l > 0.0)) throw std::invalid_argument("product_poisson_joint: lambda_i must be positive");
    marg.push_back(poisson_pmf(SteinParams{l, truncation_eps}));
    log_inside += std::log1p(-marg.back().tail);
  }
  JointPmf out;
  out.dim = lambdas.size();
  out.tail = -std::expm1(log_inside);
  std::vector<int> x(out.dim, 0);
  while (true) {
    double m = 1.0;
    for (std::size_t i = 0; i < out.dim; ++i) m *= marg[i].mass[x[i]];
    out.mass[x] = m;
    std::size_t i = 0;
    while (i < out.dim && ++x[i] == static_cast<int>(marg[i].mass.size())) x[i++] = 0;
    if (i == out.dim) break;
  }
  return out;
}

inline double joint_tv(const JointPmf& p, const JointPmf& q) {
  if (p.dim != q.dim) throw std::invalid_argument("joint_tv: dimension mismatch");
  double s = 0.0;
  for (const auto& [x, m] : p.mass) s += std::abs(m - q.at(x));
  for (const auto& [x, m] : q.mass)
    if (!p.mass.count(x)) s += m;
  s += p.tail + q.tail;
  return std::clamp(0.5 * s, 0.0, 1.0);
}

// Exact E|lambda_k - c P(A_k | sigma)| and E|W_k - c P(B_k | sigma)| for the
// fixed-point / succession pair built from a uniform random transposition,
// c = (n-1)/2, lambda_k = 1.
struct ErrorTerms {
  std::vector<double> lambdas;
  std::vector<double> up_terms;
  std::vector<double> down_terms;
};

inline ErrorTerms fixed_point_succession_error_terms(int n) {
  if (n < 3) throw std::invalid_argument("fixed_point_succession_error_terms: n must be at least 3");
  if (n > kJointEnumerationCap)
    throw CapError("fixed_point_succession_error_terms: enumerates n!", std::tgamma(n + 1.0),
                   std::tgamma(kJointEnumerationCap + 1.0));
  const double c = (n - 1) / 2.0;
  const double q = 2.0 / (static_cast<double>(n) * (n - 1));
  const double ps = 1.0 / std::tgamma(n + 1.0);
  auto stats = [n](const std::vector<int>& s) {
    int w1 = 0, w2 = 0;
    for (int i = 0; i < n; ++i) {
      w1 += s[i] == i;
      w2 += s[i] == (i + 1) % n;
    }
    return std::pair<int, int>{w1, w2};
  };
  ErrorTerms out{{1.0, 1.0}, {0.0, 0.0}, {0.0, 0.0}};
  std::vector<int> s(n);
  std::iota(s.begin(), s.end(), 0);
  do {
    const auto [w1, w2] = stats(s);
    double a1 = 0, b1 = 0, a2 = 0, b2 = 0;
    std::vector<int> t = s;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        std::swap(t[a], t[b]);
        const auto [v1, v2] = stats(t);
        if (v2 == w2 && v1 == w1 + 1) a1 += q;
        if (v2 == w2 && v1 == w1 - 1) b1 += q;
        if (v2 == w2 + 1) a2 += q;
        if (v2 == w2 - 1) b2 += q;
        std::swap(t[a], t[b]);
      }
    out.up_terms[0] += ps * std::abs(1.0 - c * a1);
    out.down_terms[0] += ps * std::abs(w1 - c * b1);
    out.up_terms[1] += ps * std::abs(1.0 - c * a2);
    out.down_terms[1] += ps * std::abs(w2 - c * b2);
  } while (std::next_permutation(s.begin(), s.end()));
  return out;
}

// ===========================================================================
// Configuration laws on {0,1}^n, index i <-> bit i of the mask

struct ConfigLaw {
  int n = 0;
  std::vector<double> mass;  // 2^n entries
  double tail = 0.0;         // mass outside binary configurations
};

using Configuration = std::vector<int>;

inline constexpr int kConfigCap = 14;

// P(fixed-point set = S) = D_{n-|S|} / n!
inline ConfigLaw matching_config_law(int n) {
  if (n < 1) throw std::invalid_argument("matching_config_law: n must be positive");
  if (n > kConfigCap) throw CapError("matching_config_law: 2^n configurations", std::ldexp(1.0, n), std::ldexp(1.0, kConfigCap));
  const auto d = derangements(static_cast<std::size_t>(n));
  const mpz_class nf = factorial(static_cast<unsigned long>(n));
  std::vector<double> by_size(static_cast<std::size_t>(n) + 1);
  for (int s = 0; s <= n; ++s) by_size[s] = to_double(mpq_class(d[n - s], nf));
  ConfigLaw out;
  out.n = n;
  out.mass.resize(std::size_t{1} << n);
  for (std::size_t mask = 0; mask < out.mass.size(); ++mask) out.mass[mask] = by_size[__builtin_popcountll(mask)];
  return out;
}

inline ConfigLaw product_poisson_config_law(const std::vector<double>& p) {
  const int n = static_cast<int>(p.size());
  if (n < 1) throw std::invalid_argument("product_poisson_config_law: empty index set");
  if (n > kConfigCap) throw CapError("product_poisson_config_law: 2^n configurations", std::ldexp(1.0, n), std::ldexp(1.0, kConfigCap));
  double log_binary = 0.0;
  for (double x : p) {
    if (!(x > 0.0)) throw std::invalid_argument("product_poisson_config_law: p_i must be positive");
    log_binary += -x + std::log1p(x);
  }
  ConfigLaw out;
  out.n = n;
  out.tail = -std::expm1(log_binary);
  out.mass.resize(std::size_t{1} << n);
  for (std::size_t mask = 0; mask < out.mass.size(); ++mask) {
    double m = 1.0;
    for (int i = 0; i < n; ++i) m *= std::exp(-p[i]) * (((mask >> i) & 1u) ? p[i] : 1.0);
    out.mass[mask] = m;
  }
  return out;
}

inline double process_tv(const ConfigLaw& a, const ConfigLaw& b) {
  if (a.n != b.n || a.mass.size() != b.mass.size()) throw std::invalid_argument("process_tv: index sets differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.mass.size(); ++i) s += std::abs(a.mass[i] - b.mass[i]);
  s += a.tail + b.tail;
  return std::clamp(0.5 * s, 0.0, 1.0);
}

// Law of the number of ones.
inline Pmf count_projection(const ConfigLaw& a) {
  Pmf p;
  p.mass.assign(static_cast<std::size_t>(a.n) + 1, 0.0);
  for (std::size_t mask = 0; mask < a.mass.size(); ++mask) p.mass[__builtin_popcountll(mask)] += a.mass[mask];
  p.tail = a.tail;
  return p;
}

// Joint law of (X_i)_{i in coords} as a JointPmf.
inline JointPmf coordinate_projection(const ConfigLaw& a, const std::vector<int>& coords) {
  JointPmf j;
  j.dim = coords.size();
  for (std::size_t mask = 0; mask < a.mass.size(); ++mask) {
    std::vector<int> x;
    for (int c : coords) x.push_back(static_cast<int>((mask >> c) & 1u));
    j.mass[x] += a.mass[mask];
  }
  j.tail = a.tail;
  return j;
}

// Immigration-death generator:
//   sum_i p_i [h(xi + delta_i) - h(xi)] + sum_i x_i [h(xi - delta_i) - h(xi)]
inline double config_generator_apply(const std::function<double(const Configuration&)>& h,
                                     const std::vector<double>& p, const Configuration& xi) {
  if (p.size() != xi.size()) throw std::invalid_argument("config_generator_apply: size mismatch");
  const double h0 = h(xi);
  Configuration y = xi;
  double s = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    ++y[i];
    s += p[i] * (h(y) - h0);
    y[i] -= 2;
    if (xi[i] > 0) s += xi[i] * (h(y) - h0);
    ++y[i];
  }
  return s;
}

}  // namespace stein_poisson
