#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "pmf.hpp"

namespace stein_poisson {

// f(0..support_max+1); the final slot exists so that f(j+1) is defined on the support.
struct FnTable {
  std::vector<double> values;

  FnTable() = default;
  explicit FnTable(std::vector<double> v) : values(std::move(v)) {}

  std::size_t support_max() const { return values.size() < 2 ? 0 : values.size() - 2; }
  double operator()(std::size_t j) const { return values.at(j); }
  // Beyond the table f is taken to be constant at its last value.
  double extended(std::size_t j) const { return j < values.size() ? values[j] : values.back(); }
  double sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
};

struct SteinParams {
  double lambda = 1.0;
  double truncation_eps = 1e-12;
};

inline void validate(const SteinParams& p) {
  if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) throw std::invalid_argument("lambda must be positive");
  if (!(p.truncation_eps > 0.0 && p.truncation_eps <= 1e-3)) throw std::invalid_argument("truncation_eps must lie in (0, 1e-3]");
}

namespace detail {

// Poisson probabilities p_0..p_K with K far enough out that p_K underflows
// relative to 1e-300.  Built outward from the mode, so relative error stays O(K eps).
inline std::vector<double> poisson_terms(double lambda) {
  const auto mode = static_cast<std::size_t>(std::floor(lambda));
  const std::size_t hi = mode + static_cast<std::size_t>(40.0 * std::sqrt(lambda + 1.0)) + 60;
  std::vector<double> p(hi + 1, 0.0);
  const double md = static_cast<double>(mode);
  p[mode] = std::exp(-lambda + (mode == 0 ? 0.0 : md * std::log(lambda)) - std::lgamma(md + 1.0));
  for (std::size_t k = mode; k > 0; --k) p[k - 1] = p[k] * static_cast<double>(k) / lambda;
  for (std::size_t k = mode; k < hi; ++k) p[k + 1] = p[k] * lambda / static_cast<double>(k + 1);
  while (p.size() > mode + 1 && p.back() < 1e-300) p.pop_back();
  return p;
}

}  // namespace detail

inline Pmf poisson_pmf(const SteinParams& params) {
  validate(params);
  const std::vector<double> p = detail::poisson_terms(params.lambda);
  // suffix[k] = sum_{j >= k} p_j, summed from the far end.
  std::vector<double> suffix(p.size() + 1, 0.0);
  for (std::size_t k = p.size(); k > 0; --k) suffix[k - 1] = suffix[k] + p[k - 1];
  std::size_t n = 0;
  while (n + 1 < p.size() && suffix[n + 1] > params.truncation_eps) ++n;
  Pmf out;
  out.mass.assign(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(n + 1));
  out.tail = suffix[n + 1];
  return out;
}

inline Pmf poisson_pmf(double lambda, double eps = 1e-12) { return poisson_pmf(SteinParams{lambda, eps}); }

// E_o f with f extended constantly past its table; the tail is summed, not dropped.
inline double poisson_expectation(const FnTable& f, const SteinParams& params) {
  validate(params);
  if (f.values.empty()) throw std::invalid_argument("empty function table");
  const std::vector<double> p = detail::poisson_terms(params.lambda);
  const double last = f.values.back();
  double s = 0.0;
  const std::size_t m = std::min(p.size(), f.values.size());
  for (std::size_t k = 0; k < m; ++k) s += p[k] * (f.values[k] - last);
  return last + s;
}

// T_o f(j) = lambda f(j+1) - j f(j), j = 0..support_max
inline FnTable stein_apply(const FnTable& f, const SteinParams& params) {
  validate(params);
  if (f.values.size() < 2) throw std::invalid_argument("stein_apply: table needs a final slot at support_max+1");
  const std::size_t s = f.support_max();
  std::vector<double> out(s + 1);
  for (std::size_t j = 0; j <= s; ++j)
    out[j] = params.lambda * f.values[j + 1] - static_cast<double>(j) * f.values[j];
  return FnTable(std::move(out));
}

// U_o f on 0..support_max+1, U_o f(0) = 0.
// The recurrence lambda U(j+1) - j U(j) = f(j) - E_o f is run forward while
// j/lambda <= 1 and backward from a far horizon otherwise; each direction is
// contracting where it is used.
inline FnTable stein_inverse(const FnTable& f, const SteinParams& params) {
  validate(params);
  if (f.values.empty()) throw std::invalid_argument("stein_inverse: empty table");
  const double lambda = params.lambda;
  const double ef = poisson_expectation(f, params);
  const std::size_t len = f.values.size();
  const std::size_t horizon = std::max(len, static_cast<std::size_t>(std::ceil(2.0 * lambda))) + 64;
  const std::size_t m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(lambda)));

  std::vector<double> u(horizon + 1, 0.0);
  for (std::size_t j = 1; j <= m; ++j)
    u[j] = (static_cast<double>(j - 1) * u[j - 1] + (f.extended(j - 1) - ef)) / lambda;
  for (std::size_t j = horizon - 1; j > m; --j)
    u[j] = (lambda * u[j + 1] - (f.extended(j) - ef)) / static_cast<double>(j);

  u.resize(len);
  return FnTable(std::move(u));
}

struct Lemma1Constants {
  double sup_bound;
  double diff_bound;
};

inline Lemma1Constants lemma1_constants(const SteinParams& params) {
  if (!(params.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  const double l = params.lambda;
  return {std::min(1.0, 1.4 / std::sqrt(l)), -std::expm1(-l) / l};
}

// Error form min(1, 1.4 lambda^{-1/2}) (E|lambda - c P(up)| + E|W - c P(down)|).
inline double univariate_error_bound(double lambda, double up_term, double down_term) {
  return lemma1_constants(SteinParams{lambda, 1e-12}).sup_bound * (up_term + down_term);
}

// ---------------------------------------------------------------------------
// Stein identity by exhaustive summation over an exchangeable pair.

template <class M>
concept EnumerablePairModel = requires(const M& m, const typename M::State& s) {
  { m.enumerable() } -> std::convertible_to<bool>;
  { m.statistic(s) } -> std::convertible_to<int>;
  m.for_each_state([](const typename M::State&, double) {});
  m.for_each_successor(s, [](const typename M::State&, double) {});
};

struct IdentitySides {
  double lhs;
  double rhs;
};

template <EnumerablePairModel M>
IdentitySides stein_identity_oracle(const M& model, double c, const FnTable& g) {
  if (!model.enumerable()) throw std::invalid_argument("stein_identity_oracle: model is not enumerable");
  if (!(c > 0.0)) throw std::invalid_argument("stein_identity_oracle: c must be positive");
  if (g.values.empty()) throw std::invalid_argument("stein_identity_oracle: empty g");

  struct Row {
    double prob;
    int w;
    double up;
    double down;
  };
  std::vector<Row> rows;
  int wmax = 0;
  model.for_each_state([&](const typename M::State& s, double prob) {
    const int w = model.statistic(s);
    double up = 0.0, down = 0.0;
    model.for_each_successor(s, [&](const typename M::State& t, double q) {
      const int d = model.statistic(t) - w;
      if (d == 1) up += q;
      else if (d == -1) down += q;
    });
    rows.push_back({prob, w, up, down});
    wmax = std::max(wmax, w);
  });

  double lambda = 0.0;
  for (const Row& r : rows) lambda += r.prob * r.w;
  const SteinParams params{lambda, 1e-12};

  std::vector<double> gv(std::max(static_cast<std::size_t>(wmax) + 2, g.values.size()));
  for (std::size_t j = 0; j < gv.size(); ++j) gv[j] = g.extended(j);
  const FnTable gt(std::move(gv));
  const double eg = poisson_expectation(gt, params);
  const FnTable u = stein_inverse(gt, params);

  double lhs = 0.0, rhs = 0.0;
  for (const Row& r : rows) {
    const auto w = static_cast<std::size_t>(r.w);
    lhs += r.prob * (gt(w) - eg);
    const double operator_part = lambda * u(w + 1) - r.w * u(w);
    const double pair_part = c * (u(w + 1) * r.up - u(w) * r.down);
    rhs += r.prob * (operator_part - pair_part);
  }
  return {lhs, rhs};
}

}  // namespace stein_poisson
