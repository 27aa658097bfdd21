#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <gmpxx.h>

namespace stein_poisson {

inline mpz_class factorial(unsigned long n) {
  mpz_class r;
  mpz_fac_ui(r.get_mpz_t(), n);
  return r;
}

inline mpz_class binomial(unsigned long n, unsigned long k) {
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

// D_0..D_n, D_m = (m-1)(D_{m-1} + D_{m-2})
inline std::vector<mpz_class> derangements(std::size_t n) {
  std::vector<mpz_class> d(n + 1);
  d[0] = 1;
  if (n >= 1) d[1] = 0;
  for (std::size_t m = 2; m <= n; ++m) d[m] = static_cast<unsigned long>(m - 1) * (d[m - 1] + d[m - 2]);
  return d;
}

// Truncating conversion; relative error below 2^-52.
inline double to_double(const mpq_class& q) { return q.get_d(); }

inline std::vector<double> to_double(const std::vector<mpq_class>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = to_double(v[i]);
  return out;
}

// log C(n, k) in double
inline double log_choose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline double choose(double n, double k) {
  if (k < 0 || k > n) return 0.0;
  if (n < 60) {
    double r = 1.0;
    for (int i = 1; i <= static_cast<int>(k); ++i) r = r * (n - k + i) / i;
    return std::round(r);
  }
  return std::exp(log_choose(n, k));
}

}  // namespace stein_poisson
