#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace stein_poisson {

// Law on {0, 1, 2, ...}: mass[j] = P(j) for j < mass.size(), tail = mass beyond.
struct Pmf {
  std::vector<double> mass;
  double tail = 0.0;

  std::size_t support_max() const { return mass.empty() ? 0 : mass.size() - 1; }

  double at(std::size_t j) const { return j < mass.size() ? mass[j] : 0.0; }

  double total() const {
    double s = 0.0;
    for (double m : mass) s += m;
    return s + tail;
  }

  double mean() const {
    double s = 0.0;
    for (std::size_t j = 0; j < mass.size(); ++j) s += static_cast<double>(j) * mass[j];
    return s;
  }

  double variance() const {
    const double mu = mean();
    double s = 0.0;
    for (std::size_t j = 0; j < mass.size(); ++j) {
      const double d = static_cast<double>(j) - mu;
      s += d * d * mass[j];
    }
    return s;
  }
};

inline void validate(const Pmf& p, double tol = 1e-9) {
  if (p.mass.empty()) throw std::invalid_argument("pmf: empty mass table");
  for (double m : p.mass) {
    if (!std::isfinite(m) || m < 0.0) throw std::invalid_argument("pmf: negative or non-finite mass");
  }
  if (!std::isfinite(p.tail) || p.tail < 0.0) throw std::invalid_argument("pmf: bad tail");
  if (std::abs(p.total() - 1.0) > tol) throw std::invalid_argument("pmf: total mass is not 1");
}

inline Pmf point_mass(std::size_t j) {
  Pmf p;
  p.mass.assign(j + 1, 0.0);
  p.mass[j] = 1.0;
  return p;
}

// Upper bound on sup_A |p(A) - q(A)|; exact when both tails vanish.
inline double tv_distance(const Pmf& p, const Pmf& q) {
  const std::size_t len = std::max(p.mass.size(), q.mass.size());
  double s = 0.0;
  for (std::size_t j = 0; j < len; ++j) s += std::abs(p.at(j) - q.at(j));
  s += p.tail + q.tail;
  return std::clamp(0.5 * s, 0.0, 1.0);
}

// The two bookkeeping conventions a bound can be stated in.  Both measure
// sup_A |P(A) - Q(A)|, which is also half the l1 distance.
enum class Convention { tv, set_distance };

inline const char* to_string(Convention c) { return c == Convention::tv ? "tv" : "set"; }

inline Convention parse_convention(const std::string& s) {
  if (s == "tv") return Convention::tv;
  if (s == "set" || s == "set_distance") return Convention::set_distance;
  throw std::invalid_argument("unknown convention '" + s + "' (expected tv|set)");
}

}  // namespace stein_poisson
