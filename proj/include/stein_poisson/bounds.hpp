#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "exact_laws.hpp"
#include "pmf.hpp"
#include "stein_core.hpp"

namespace stein_poisson {

enum class BoundKind {
  independent_trials,
  matching,
  generalized_matching,
  birthday_pairs,
  birthday_triples,
  coupon_collector,
  coupling,
  negative_association,
  dependency_graph,
  dependency_graph_general,
  monochromatic_tuples,
  fixed_point_succession,
  fixed_point_process,
};

inline const char* to_string(BoundKind k) {
  switch (k) {
    case BoundKind::independent_trials: return "independent-trials";
    case BoundKind::matching: return "matching";
    case BoundKind::generalized_matching: return "generalized-matching";
    case BoundKind::birthday_pairs: return "birthday-pairs";
    case BoundKind::birthday_triples: return "birthday-triples";
    case BoundKind::coupon_collector: return "coupon-collector";
    case BoundKind::coupling: return "coupling";
    case BoundKind::negative_association: return "negative-association";
    case BoundKind::dependency_graph: return "dependency-graph";
    case BoundKind::dependency_graph_general: return "dependency-graph-general";
    case BoundKind::monochromatic_tuples: return "monochromatic-tuples";
    case BoundKind::fixed_point_succession: return "fixed-point-succession";
    case BoundKind::fixed_point_process: return "fixed-point-process";
  }
  return "?";
}

struct BoundReport {
  BoundKind kind;
  double lambda = 0.0;
  double value = 0.0;      // min(raw, 1)
  double raw_value = 0.0;
  Convention convention = Convention::tv;
  bool surrogate = false;
  bool degenerate = false;  // lambda = 0: W vanishes identically
  double companion = std::numeric_limits<double>::quiet_NaN();  // alternative constant: a sharper known value, or a corrected one
  std::vector<std::pair<std::string, double>> inputs;
};

namespace detail {

inline BoundReport make_report(BoundKind kind, double lambda, double raw, Convention conv, bool surrogate = false) {
  if (!(raw >= 0.0)) raw = std::max(0.0, raw);
  BoundReport r;
  r.kind = kind;
  r.lambda = lambda;
  r.raw_value = raw;
  r.value = std::min(raw, 1.0);
  r.convention = conv;
  r.surrogate = surrogate;
  return r;
}

inline double sum_squares(const std::vector<double>& p) {
  double s = 0.0;
  for (double x : p) s += x * x;
  return s;
}

}  // namespace detail

// ((1 - e^{-lambda}) / 2 lambda) sum p_i^2
inline BoundReport bound_poisson_binomial(const std::vector<double>& p) {
  for (double x : p)
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("bound_poisson_binomial: p_i outside [0,1]");
  const double lambda = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(lambda > 0.0)) throw std::invalid_argument("bound_poisson_binomial: lambda = 0");
  BoundReport r = detail::make_report(BoundKind::independent_trials, lambda,
                                      -std::expm1(-lambda) / (2.0 * lambda) * detail::sum_squares(p), Convention::tv);
  // Indicator test functions only give the constant without the halving.
  r.companion = -std::expm1(-lambda) / lambda * detail::sum_squares(p);
  r.inputs = {{"n", static_cast<double>(p.size())}, {"sum_p2", detail::sum_squares(p)}};
  return r;
}

// 2/n, with the sharper 2^n/n! alongside
inline BoundReport bound_matching(int n) {
  if (n < 2) throw std::invalid_argument("bound_matching: n must be at least 2");
  BoundReport r = detail::make_report(BoundKind::matching, 1.0, 2.0 / n, Convention::set_distance);
  r.companion = std::exp(n * std::log(2.0) - std::lgamma(n + 1.0));
  r.inputs = {{"n", static_cast<double>(n)}};
  return r;
}

// 1.4 [lambda^{3/2}/(n-1) + 3 mu / (2 n^2 lambda^{1/2})], lambda = sum l_i^2 / n, mu = sum l_i^3
inline BoundReport bound_generalized_matching(const std::vector<int>& l) {
  double n = 0, s2 = 0, s3 = 0;
  for (int x : l) {
    if (x < 1) throw std::invalid_argument("bound_generalized_matching: l_i must be positive");
    n += x;
    s2 += static_cast<double>(x) * x;
    s3 += static_cast<double>(x) * x * x;
  }
  if (n < 2) throw std::invalid_argument("bound_generalized_matching: n must be at least 2");
  const double lambda = s2 / n, mu = s3;
  const double raw = 1.4 * (std::pow(lambda, 1.5) / (n - 1.0) + 3.0 * mu / (2.0 * n * n * std::sqrt(lambda)));
  BoundReport r = detail::make_report(BoundKind::generalized_matching, lambda, raw, Convention::set_distance);
  r.inputs = {{"n", n}, {"mu", mu}};
  return r;
}

// min{1, sqrt2/theta} [(19 theta^3 + 6 theta)/(12 sqrt n) + theta^2/(2n)], theta = k/sqrt n
inline BoundReport bound_birthday_pairs(int n, int k) {
  if (n < 1 || k < 0) throw std::invalid_argument("bound_birthday_pairs: need n >= 1, k >= 0");
  const double nd = n, theta = k / std::sqrt(nd);
  const double lambda = theta * theta / 2.0;
  if (k == 0) {
    BoundReport r = detail::make_report(BoundKind::birthday_pairs, 0.0, 0.0, Convention::tv);
    r.degenerate = true;
    r.inputs = {{"n", nd}, {"k", 0.0}, {"theta", 0.0}};
    return r;
  }
  const double pref = std::min(1.0, std::sqrt(2.0) / theta);
  const double raw = pref * ((19.0 * theta * theta * theta + 6.0 * theta) / (12.0 * std::sqrt(nd)) +
                             theta * theta / (2.0 * nd));
  BoundReport r = detail::make_report(BoundKind::birthday_pairs, lambda, raw, Convention::tv);
  r.inputs = {{"n", nd}, {"k", static_cast<double>(k)}, {"theta", theta}};
  return r;
}

// Explicit stand-in for the O(k^4/n^3) rate.  C covers every exact TV in the
// calibration sweep along k = theta n^{2/3}; see the acceptance suite.
inline constexpr double kTriplesSurrogateC = 0.25;

inline BoundReport bound_birthday_triples(int n, int k, double C = kTriplesSurrogateC) {
  if (n < 1) throw std::invalid_argument("bound_birthday_triples: n must be positive");
  if (k < 3) throw std::invalid_argument("bound_birthday_triples: k must be at least 3");
  const double nd = n, kd = k;
  const double lambda = choose(k, 3) / (nd * nd);
  BoundReport r = detail::make_report(BoundKind::birthday_triples, lambda, C * std::pow(kd, 4) / (nd * nd * nd),
                                      Convention::tv, true);
  r.inputs = {{"n", nd}, {"k", kd}, {"C", C}};
  return r;
}

// The displayed inequality chain for the empty-box count, evaluated with
// lambda = e^{-theta}:
//   min(1, 1.4 lambda^{-1/2}) (C + D + B)
//   B = n (1 - 2/n)^{k-1}
//   C = e^{-theta} (|theta| n + (e^{-theta} + 1) log n) / k
//   D = (n log n / k) [n |theta| e^{-theta} / ((n-1) log n) + e^{-theta}/(n-1)
//                      + e^{-theta}(log n + theta) / (2(n-1)) + sqrt(Var bound)/log n]
inline BoundReport bound_coupon_collector(int n, int k) {
  if (n < 3 || k < 1) throw std::invalid_argument("bound_coupon_collector: need n >= 3, k >= 1");
  const double nd = n, kd = k, ln = std::log(nd);
  const double theta = coupon_theta(n, k), at = std::abs(theta);
  const double et = std::exp(-theta);
  const double lambda = et;
  const CouponDiagnostics d = coupon_collector_diagnostics(n, k);
  const double B = nd * std::exp((kd - 1.0) * std::log1p(-2.0 / nd));
  const double C = et * (at * nd + (et + 1.0) * ln) / kd;
  const double D = (nd * ln / kd) * (nd * at * et / ((nd - 1.0) * ln) + et / (nd - 1.0) +
                                     et * std::abs(ln + theta) / (2.0 * (nd - 1.0)) +
                                     std::sqrt(d.varN1_upper) / ln);
  const double pref = std::min(1.0, 1.4 / std::sqrt(lambda));
  BoundReport r = detail::make_report(BoundKind::coupon_collector, lambda, pref * (C + D + B),
                                      Convention::set_distance, true);
  r.inputs = {{"n", nd}, {"k", kd}, {"theta", theta}, {"B", B}, {"C", C}, {"D", D}};
  return r;
}

// (1 - e^{-lambda}) E|W + 1 - W*| for the four worked couplings.
enum class CouplingProblem { poisson_binomial, matching, coupon, birthday };

struct CouplingInput {
  CouplingProblem problem;
  std::vector<double> p;  // poisson_binomial
  int n = 0;
  int k = 0;
};

inline const char* to_string(CouplingProblem p) {
  switch (p) {
    case CouplingProblem::poisson_binomial: return "poisson-binomial";
    case CouplingProblem::matching: return "matching";
    case CouplingProblem::coupon: return "coupon";
    case CouplingProblem::birthday: return "birthday";
  }
  return "?";
}

inline BoundReport bound_coupling(const CouplingInput& in) {
  double lambda = 0.0, e_term = 0.0;
  std::vector<std::pair<std::string, double>> inputs;
  switch (in.problem) {
    case CouplingProblem::poisson_binomial:
      for (double x : in.p)
        if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("bound_coupling: p_i outside [0,1]");
      lambda = std::accumulate(in.p.begin(), in.p.end(), 0.0);
      if (!(lambda > 0.0)) throw std::invalid_argument("bound_coupling: lambda = 0");
      e_term = detail::sum_squares(in.p) / lambda;
      inputs = {{"n", static_cast<double>(in.p.size())}};
      break;
    case CouplingProblem::matching:
      if (in.n < 2) throw std::invalid_argument("bound_coupling: matching needs n >= 2");
      lambda = 1.0;
      e_term = 2.0 / in.n;
      inputs = {{"n", static_cast<double>(in.n)}};
      break;
    case CouplingProblem::coupon: {
      if (in.n < 2 || in.k < 0) throw std::invalid_argument("bound_coupling: coupon needs n >= 2, k >= 0");
      const double nd = in.n, q = std::exp(in.k * std::log1p(-1.0 / nd));
      lambda = nd * q;
      e_term = q * (1.0 + in.k / nd);
      inputs = {{"n", nd}, {"k", static_cast<double>(in.k)}};
      break;
    }
    case CouplingProblem::birthday:
      if (in.n < 1 || in.k < 0) throw std::invalid_argument("bound_coupling: birthday needs n >= 1, k >= 0");
      lambda = choose(in.k, 2) / in.n;
      e_term = (1.0 + 2.0 * in.k) / in.n;
      inputs = {{"n", static_cast<double>(in.n)}, {"k", static_cast<double>(in.k)}};
      break;
  }
  BoundReport r = detail::make_report(BoundKind::coupling, lambda, -std::expm1(-lambda) * e_term,
                                      Convention::set_distance);
  r.degenerate = lambda == 0.0;
  inputs.emplace_back("E_term", e_term);
  r.inputs = std::move(inputs);
  return r;
}

// (1 - e^{-lambda})(1 - sigma^2/lambda)
inline BoundReport bound_negative_association(double lambda, double sigma2) {
  if (!(lambda > 0.0)) throw std::invalid_argument("bound_negative_association: lambda must be positive");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("bound_negative_association: sigma^2 must be positive");
  if (sigma2 > lambda * (1.0 + 1e-12))
    throw std::invalid_argument("bound_negative_association: sigma^2 > lambda, so the indicators are not negatively "
                                "associated (the bound would be negative)");
  BoundReport r = detail::make_report(BoundKind::negative_association, lambda,
                                      -std::expm1(-lambda) * std::max(0.0, 1.0 - sigma2 / lambda), Convention::tv);
  r.inputs = {{"sigma2", sigma2}};
  return r;
}

// ===========================================================================
// Dependency graphs

struct DependencyGraph {
  struct Neighbor {
    std::size_t j;
    double p_joint;  // P(X_i = 1, X_j = 1); ignored for j = i
  };
  std::vector<double> p;
  std::vector<std::vector<Neighbor>> neighborhoods;  // N_i, each containing i

  std::size_t size() const { return p.size(); }

  // Adds i to its own neighborhood if missing.
  static DependencyGraph isolated(std::vector<double> p) {
    DependencyGraph g;
    g.neighborhoods.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) g.neighborhoods[i].push_back({i, p[i]});
    g.p = std::move(p);
    return g;
  }

  void add_edge(std::size_t i, std::size_t j, double p_joint) {
    if (i == j) throw std::invalid_argument("dependency graph: self loop");
    neighborhoods.at(i).push_back({j, p_joint});
    neighborhoods.at(j).push_back({i, p_joint});
  }
};

inline void validate(const DependencyGraph& g) {
  const std::size_t n = g.size();
  if (g.neighborhoods.size() != n) throw std::invalid_argument("dependency graph: neighborhood table size");
  std::vector<std::map<std::size_t, double>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(g.p[i] >= 0.0 && g.p[i] <= 1.0)) throw std::invalid_argument("dependency graph: p_i outside [0,1]");
    for (const auto& nb : g.neighborhoods[i]) {
      if (nb.j >= n) throw std::invalid_argument("dependency graph: neighbor out of range");
      if (!adj[i].emplace(nb.j, nb.p_joint).second) throw std::invalid_argument("dependency graph: repeated neighbor");
    }
    if (!adj[i].count(i)) throw std::invalid_argument("dependency graph: i must belong to N_i");
  }
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [j, pij] : adj[i]) {
      if (j == i) continue;
      const auto it = adj[j].find(i);
      if (it == adj[j].end()) throw std::invalid_argument("dependency graph: adjacency is not symmetric");
      if (std::abs(it->second - pij) > 1e-15 * std::max(1.0, pij))
        throw std::invalid_argument("dependency graph: p_ij differs from p_ji");
      if (pij < 0.0 || pij > std::min(g.p[i], g.p[j]) * (1.0 + 1e-12))
        throw std::invalid_argument("dependency graph: p_ij exceeds min(p_i, p_j)");
    }
}

// min(1, 1/lambda) [sum_i sum_{j in N_i \ i} p_ij + sum_i sum_{j in N_i} p_i p_j]
inline BoundReport bound_dependency_graph(const DependencyGraph& g) {
  validate(g);
  const double lambda = std::accumulate(g.p.begin(), g.p.end(), 0.0);
  if (!(lambda > 0.0)) throw std::invalid_argument("bound_dependency_graph: lambda = 0");
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (const auto& nb : g.neighborhoods[i]) {
      if (nb.j != i) b1 += nb.p_joint;
      b2 += g.p[i] * g.p[nb.j];
    }
  BoundReport r = detail::make_report(BoundKind::dependency_graph, lambda, std::min(1.0, 1.0 / lambda) * (b1 + b2),
                                      Convention::set_distance);
  r.inputs = {{"b1", b1}, {"b2", b2}};
  return r;
}

// min(1,1/lambda) sum_i [p_i^2 + p_i E Z_i + E(X_i Z_i)] + min(1,1/lambda) sum_i eta_i
inline BoundReport bound_dependency_graph_general(const DependencyGraph& g, const std::vector<double>& etas,
                                                  const std::vector<double>& z_means,
                                                  const std::vector<double>& xz_means) {
  const std::size_t n = g.size();
  if (etas.size() != n || z_means.size() != n || xz_means.size() != n)
    throw std::invalid_argument("bound_dependency_graph_general: input tables must match the vertex count");
  for (std::size_t i = 0; i < n; ++i) {
    if (etas[i] < 0.0 || z_means[i] < 0.0 || xz_means[i] < 0.0 || g.p[i] < 0.0)
      throw std::invalid_argument("bound_dependency_graph_general: negative input");
  }
  const double lambda = std::accumulate(g.p.begin(), g.p.end(), 0.0);
  if (!(lambda > 0.0)) throw std::invalid_argument("bound_dependency_graph_general: lambda = 0");
  double main = 0.0, eta = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    main += g.p[i] * g.p[i] + g.p[i] * z_means[i] + xz_means[i];
    eta += etas[i];
  }
  const double f = std::min(1.0, 1.0 / lambda);
  BoundReport r = detail::make_report(BoundKind::dependency_graph_general, lambda, f * main + f * eta,
                                      Convention::set_distance);
  r.inputs = {{"main", main}, {"eta", eta}};
  return r;
}

// E Z_i and E(X_i Z_i) for the strong set N_i \ {i}, which turns the general
// bound into the plain dependency-graph bound when every eta_i = 0.
inline std::pair<std::vector<double>, std::vector<double>> dependency_graph_inputs(const DependencyGraph& g) {
  validate(g);
  std::vector<double> z(g.size(), 0.0), xz(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (const auto& nb : g.neighborhoods[i]) {
      if (nb.j == i) continue;
      z[i] += g.p[nb.j];
      xz[i] += nb.p_joint;
    }
  return {z, xz};
}

// Vertices are the k-subsets of [n]; two subsets sharing l >= 1 points are
// both monochromatic with probability c^{1-(2k-l)}.
inline DependencyGraph coloring_dependency_graph(int n, int k, int c) {
  if (k < 2 || k > n || c < 1) throw std::invalid_argument("coloring_dependency_graph: need 2 <= k <= n, c >= 1");
  std::vector<unsigned> subsets;
  for (unsigned mask = 0; mask < (1u << n); ++mask)
    if (__builtin_popcount(mask) == k) subsets.push_back(mask);
  const double cd = c;
  const double pa = std::pow(cd, 1.0 - k);
  DependencyGraph g = DependencyGraph::isolated(std::vector<double>(subsets.size(), pa));
  for (std::size_t a = 0; a < subsets.size(); ++a)
    for (std::size_t b = a + 1; b < subsets.size(); ++b) {
      const int shared = __builtin_popcount(subsets[a] & subsets[b]);
      if (shared > 0) g.add_edge(a, b, std::pow(cd, 1.0 - (2.0 * k - shared)));
    }
  return g;
}

// min(1,1/lambda) [C(n,k) sum_{l=1}^{k-1} C(k,l) C(n-k,k-l) c^{1-(2k-l)}
//                  + C(n,k) c^{2-2k} sum_{l=1}^{k} C(k,l) C(n-k,k-l)]
inline BoundReport bound_monochromatic(int n, int k, int c) {
  if (k < 2 || k > n) throw std::invalid_argument("bound_monochromatic: need 2 <= k <= n");
  if (c < 1) throw std::invalid_argument("bound_monochromatic: c must be positive");
  const double cd = c, cnk = choose(n, k);
  const double lambda = cnk * std::pow(cd, 1.0 - k);
  double s1 = 0.0, s2 = 0.0;
  for (int l = 1; l <= k - 1; ++l) s1 += choose(k, l) * choose(n - k, k - l) * std::pow(cd, 1.0 - (2.0 * k - l));
  for (int l = 1; l <= k; ++l) s2 += choose(k, l) * choose(n - k, k - l);
  const double total = cnk * s1 + cnk * std::pow(cd, 2.0 - 2.0 * k) * s2;
  BoundReport r = detail::make_report(BoundKind::monochromatic_tuples, lambda, std::min(1.0, 1.0 / lambda) * total,
                                      Convention::set_distance);
  r.inputs = {{"n", static_cast<double>(n)}, {"k", static_cast<double>(k)}, {"c", cd}};
  return r;
}

// ===========================================================================
// Multivariate and process bounds

// 13/n for (fixed points, cyclic successions)
inline BoundReport bound_multivariate(int n) {
  if (n < 3) throw std::invalid_argument("bound_multivariate: n must be at least 3");
  BoundReport r = detail::make_report(BoundKind::fixed_point_succession, 1.0, 13.0 / n, Convention::set_distance);
  r.inputs = {{"n", static_cast<double>(n)}};
  return r;
}

// sum_k alpha_k [E|lambda_k - c_k P(A_k)| + E|W_k - c_k P(B_k)|], alpha_k = min(1, 1.4 lambda_k^{-1/2})
inline double multivariate_error_bound(const std::vector<double>& lambdas, const std::vector<double>& up_terms,
                                       const std::vector<double>& down_terms) {
  if (lambdas.size() != up_terms.size() || lambdas.size() != down_terms.size())
    throw std::invalid_argument("multivariate_error_bound: table sizes differ");
  double s = 0.0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0)) throw std::invalid_argument("multivariate_error_bound: lambda_k must be positive");
    s += std::min(1.0, 1.4 / std::sqrt(lambdas[i])) * (up_terms[i] + down_terms[i]);
  }
  return s;
}

// 4/n for the fixed-point indicator process
inline BoundReport bound_process(int n) {
  if (n < 1) throw std::invalid_argument("bound_process: n must be positive");
  BoundReport r = detail::make_report(BoundKind::fixed_point_process, 1.0, 4.0 / n, Convention::set_distance);
  r.inputs = {{"n", static_cast<double>(n)}};
  return r;
}

// Both conventions measure sup_A |P(A) - Q(A)|, so a value stated in one
// reads the same in the other.  The halved reading (value / 2) is what a
// report would show if a set-distance value were mistaken for an l1 norm;
// it is reported, never asserted.
inline double convert(double value, Convention, Convention) { return value; }
inline double halved_reading(const BoundReport& r) { return r.value / 2.0; }

}  // namespace stein_poisson
