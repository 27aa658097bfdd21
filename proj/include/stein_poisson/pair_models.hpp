#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "exact_laws.hpp"
#include "pmf.hpp"
#include "random.hpp"

namespace stein_poisson {

enum class Family { poisson_binomial, matching, birthday_pairs, birthday_triples, coupon };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::poisson_binomial: return "poisson-binomial";
    case Family::matching: return "matching";
    case Family::birthday_pairs: return "birthday-pairs";
    case Family::birthday_triples: return "birthday-triples";
    case Family::coupon: return "coupon";
  }
  return "?";
}

struct StepProbs {
  double up = 0.0;
  double down = 0.0;
};

// Observables of a state that the one-step conditional formulas read.
struct StateStats {
  int w = 0;
  double weighted_ones = 0.0;                 // independent trials: sum p_i omega_i
  int two_cycles = 0;                         // permutations: a_2
  std::vector<std::vector<int>> symbol_flow;  // permutations: W_ij, diagonal W_i
  std::vector<int> level_counts;              // balls: M_m, m = 0..k
};

// An exchangeable pair (omega, omega') for one of the problem families.
// States are integer vectors: bits for independent trials, the permutation
// array for matching, the box of each ball for the balls-in-boxes families.
class PairModel {
 public:
  using State = std::vector<int>;

  static PairModel poisson_binomial(std::vector<double> p) {
    if (p.empty()) throw std::invalid_argument("poisson_binomial model: empty p");
    for (double x : p)
      if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("poisson_binomial model: p_i outside [0,1]");
    PairModel m(Family::poisson_binomial);
    m.p_ = std::move(p);
    m.n_ = static_cast<int>(m.p_.size());
    return m;
  }

  static PairModel matching(const MatchingSpec& spec) {
    validate(spec);
    PairModel m(Family::matching);
    m.n_ = spec.n;
    m.lengths_ = spec.lengths();
    m.symbols_ = symbol_word(m.lengths_);
    m.plain_ = spec.plain();
    return m;
  }

  static PairModel matching(int n) { return matching(MatchingSpec{n, {}}); }

  static PairModel birthday_pairs(int n, int k) { return balls(Family::birthday_pairs, n, k); }
  static PairModel birthday_triples(int n, int k) { return balls(Family::birthday_triples, n, k); }
  static PairModel coupon(int n, int k) { return balls(Family::coupon, n, k); }

  Family family() const { return family_; }
  int n() const { return n_; }
  int k() const { return k_; }
  const std::vector<double>& p() const { return p_; }
  const std::vector<int>& lengths() const { return lengths_; }
  bool plain_matching() const { return plain_; }

  // The scaling constant of the pair for each family.
  double c() const {
    switch (family_) {
      case Family::poisson_binomial: return n_;
      case Family::matching: return (n_ - 1) / 2.0;
      case Family::birthday_pairs: return k_ / 2.0;
      case Family::birthday_triples: return k_ / 3.0;
      case Family::coupon: return n_;
    }
    return 0.0;
  }

  double lambda() const {
    switch (family_) {
      case Family::poisson_binomial: return std::accumulate(p_.begin(), p_.end(), 0.0);
      case Family::matching: {
        double s = 0.0;
        for (int l : lengths_) s += static_cast<double>(l) * l;
        return s / n_;
      }
      case Family::birthday_pairs:
        return occupancy_moments(OccupancySpec{n_, k_, OccupancyStatistic::pairs}).EW;
      case Family::birthday_triples: return choose(k_, 3) / (static_cast<double>(n_) * n_);
      case Family::coupon: return n_ * std::exp(k_ * std::log1p(-1.0 / n_));
    }
    return 0.0;
  }

  double state_count() const {
    switch (family_) {
      case Family::poisson_binomial: return std::ldexp(1.0, n_);
      case Family::matching: return std::tgamma(n_ + 1.0);
      default: return std::pow(static_cast<double>(n_), k_);
    }
  }

  bool enumerable() const { return state_count() <= kEnumerationCap; }

  static constexpr double kEnumerationCap = 4e6;

  int statistic(const State& s) const {
    switch (family_) {
      case Family::poisson_binomial: return std::accumulate(s.begin(), s.end(), 0);
      case Family::matching: {
        int w = 0;
        for (int m = 0; m < n_; ++m) w += symbols_[s[m]] == symbols_[m];
        return w;
      }
      default: {
        const std::vector<int> counts = box_counts(s);
        long long w = 0;
        for (int c : counts) w += ball_stat(c);
        return static_cast<int>(w);
      }
    }
  }

  StateStats stats(const State& s) const {
    StateStats st;
    switch (family_) {
      case Family::poisson_binomial:
        for (int i = 0; i < n_; ++i) {
          st.w += s[i];
          st.weighted_ones += p_[i] * s[i];
        }
        break;
      case Family::matching: {
        const std::size_t kk = lengths_.size();
        st.symbol_flow.assign(kk, std::vector<int>(kk, 0));
        for (int m = 0; m < n_; ++m) {
          ++st.symbol_flow[symbols_[m]][symbols_[s[m]]];
          if (m < s[m] && s[s[m]] == m) ++st.two_cycles;
        }
        for (std::size_t i = 0; i < kk; ++i) st.w += st.symbol_flow[i][i];
        break;
      }
      default: {
        st.level_counts.assign(static_cast<std::size_t>(k_) + 1, 0);
        for (int c : box_counts(s)) {
          ++st.level_counts[c];
          st.w += static_cast<int>(ball_stat(c));
        }
        break;
      }
    }
    return st;
  }

  void check_stats(const StateStats& st) const {
    auto bad = [](const char* what) { throw std::invalid_argument(std::string("inconsistent stats: ") + what); };
    switch (family_) {
      case Family::poisson_binomial:
        if (st.w < 0 || st.w > n_) bad("W outside [0, n]");
        if (st.weighted_ones < -1e-12 || st.weighted_ones > st.w + 1e-12) bad("sum p_i omega_i outside [0, W]");
        break;
      case Family::matching: {
        const std::size_t kk = lengths_.size();
        if (st.symbol_flow.size() != kk) bad("symbol table has the wrong size");
        int w = 0;
        for (std::size_t i = 0; i < kk; ++i) {
          if (st.symbol_flow[i].size() != kk) bad("symbol table has the wrong size");
          int row = 0, col = 0;
          for (std::size_t j = 0; j < kk; ++j) {
            if (st.symbol_flow[i][j] < 0) bad("negative W_ij");
            row += st.symbol_flow[i][j];
            col += st.symbol_flow[j][i];
          }
          if (row != lengths_[i] || col != lengths_[i]) bad("W_ij margins differ from multiplicities");
          w += st.symbol_flow[i][i];
        }
        if (w != st.w) bad("W differs from the diagonal sum");
        if (st.two_cycles < 0 || 2 * st.two_cycles > n_ - (plain_ ? st.w : 0)) bad("a_2 out of range");
        break;
      }
      default: {
        if (st.level_counts.size() != static_cast<std::size_t>(k_) + 1) bad("level table has the wrong size");
        long long boxes = 0, balls = 0, w = 0;
        for (int m = 0; m <= k_; ++m) {
          if (st.level_counts[m] < 0) bad("negative M_m");
          boxes += st.level_counts[m];
          balls += static_cast<long long>(m) * st.level_counts[m];
          w += st.level_counts[m] * ball_stat(m);
        }
        if (boxes != n_) bad("M counts do not sum to n");
        if (balls != k_) bad("M counts do not hold k balls");
        if (w != st.w) bad("W differs from the level counts");
      }
    }
  }

  // The displayed closed forms for Q(W' = W +- 1 | omega).
  StepProbs step_probs(const StateStats& st) const {
    check_stats(st);
    const double n = n_, k = k_;
    switch (family_) {
      case Family::poisson_binomial:
        return {(lambda() - st.weighted_ones) / n, (st.w - st.weighted_ones) / n};
      case Family::matching: {
        const double w = st.w;
        if (n_ < 2) return {0.0, 0.0};
        if (plain_)
          return {2.0 * (n - w - 2.0 * st.two_cycles) / (n * (n - 1.0)), 2.0 * w * (n - w) / (n * (n - 1.0))};
        return {multiset_up(st), multiset_down(st)};
      }
      case Family::birthday_pairs: {
        if (k_ == 0) return {};
        const double m1 = st.level_counts[1], m2 = k_ >= 2 ? st.level_counts[2] : 0;
        return {m1 * (k - 2.0 * m2 - 1.0) / (k * n), 2.0 * m2 * (n - m1 - 1.0) / (k * n)};
      }
      case Family::birthday_triples: {
        if (k_ == 0) return {};
        const auto lv = [&](int m) { return m <= k_ ? static_cast<double>(st.level_counts[m]) : 0.0; };
        const double m0 = lv(0), m1 = lv(1), m2 = lv(2), m3 = lv(3);
        return {(m1 * m2 + 2.0 * m2 * m2 - 2.0 * m2) / (k * n), (3.0 * m3 * m0 + 3.0 * m3 * m1) / (k * n)};
      }
      case Family::coupon: {
        if (k_ == 0) return {};
        const double w = st.w, n1 = st.level_counts[1];
        return {n1 * (n - w - 1.0) / (k * n), (k - n1) * w / (k * n)};
      }
    }
    return {};
  }

  // Down-probability for multiset matching exactly as printed in the source,
  // sum_i W_i (n - W - l_i + W_i) / C(n,2).  Enumeration shows it is wrong
  // whenever some l_i >= 2; kept so the discrepancy stays testable.
  double multiset_down_as_printed(const StateStats& st) const {
    check_stats(st);
    const double n = n_, pairs = n * (n - 1.0) / 2.0;
    double s = 0.0;
    for (std::size_t i = 0; i < lengths_.size(); ++i) {
      const double wi = st.symbol_flow[i][i];
      s += wi * (n - st.w - lengths_[i] + wi);
    }
    return s / pairs;
  }

  template <class F>
  void for_each_state(F&& f) const {
    switch (family_) {
      case Family::poisson_binomial: {
        State s(n_, 0);
        const std::uint64_t total = std::uint64_t{1} << n_;
        for (std::uint64_t mask = 0; mask < total; ++mask) {
          double prob = 1.0;
          for (int i = 0; i < n_; ++i) {
            s[i] = static_cast<int>((mask >> i) & 1u);
            prob *= s[i] ? p_[i] : 1.0 - p_[i];
          }
          f(static_cast<const State&>(s), prob);
        }
        break;
      }
      case Family::matching: {
        State s(n_);
        std::iota(s.begin(), s.end(), 0);
        const double prob = 1.0 / std::tgamma(n_ + 1.0);
        do f(static_cast<const State&>(s), prob);
        while (std::next_permutation(s.begin(), s.end()));
        break;
      }
      default: {
        State s(k_, 0);
        const double prob = std::pow(static_cast<double>(n_), -k_);
        while (true) {
          f(static_cast<const State&>(s), prob);
          int i = 0;
          while (i < k_ && ++s[i] == n_) s[i++] = 0;
          if (i == k_) break;
        }
      }
    }
  }

  // Kernel K(omega, .) as (successor, probability) pairs; successors may repeat.
  template <class F>
  void for_each_successor(const State& s, F&& f) const {
    switch (family_) {
      case Family::poisson_binomial: {
        State t = s;
        for (int i = 0; i < n_; ++i) {
          t[i] = 1;
          f(static_cast<const State&>(t), p_[i] / n_);
          t[i] = 0;
          f(static_cast<const State&>(t), (1.0 - p_[i]) / n_);
          t[i] = s[i];
        }
        break;
      }
      case Family::matching: {
        if (n_ < 2) {
          f(s, 1.0);
          break;
        }
        const double q = 2.0 / (static_cast<double>(n_) * (n_ - 1));
        State t = s;
        for (int a = 0; a < n_; ++a)
          for (int b = a + 1; b < n_; ++b) {
            std::swap(t[a], t[b]);
            f(static_cast<const State&>(t), q);
            std::swap(t[a], t[b]);
          }
        break;
      }
      default: {
        if (k_ == 0) {
          f(s, 1.0);
          break;
        }
        const double q = 1.0 / (static_cast<double>(k_) * n_);
        State t = s;
        for (int i = 0; i < k_; ++i) {
          for (int b = 0; b < n_; ++b) {
            t[i] = b;
            f(static_cast<const State&>(t), q);
          }
          t[i] = s[i];
        }
      }
    }
  }

  State sample_state(Rng& rng) const {
    switch (family_) {
      case Family::poisson_binomial: {
        State s(n_);
        for (int i = 0; i < n_; ++i) s[i] = rng.bernoulli(p_[i]) ? 1 : 0;
        return s;
      }
      case Family::matching: {
        State s(n_);
        std::iota(s.begin(), s.end(), 0);
        for (int i = n_ - 1; i > 0; --i) std::swap(s[i], s[rng.index(static_cast<std::uint64_t>(i) + 1)]);
        return s;
      }
      default: {
        State s(k_);
        for (int i = 0; i < k_; ++i) s[i] = static_cast<int>(rng.index(n_));
        return s;
      }
    }
  }

  State sample_pair(const State& s, Rng& rng) const {
    State t = s;
    switch (family_) {
      case Family::poisson_binomial: {
        const auto i = rng.index(n_);
        t[i] = rng.bernoulli(p_[i]) ? 1 : 0;
        break;
      }
      case Family::matching: {
        if (n_ < 2) break;
        const auto a = rng.index(n_);
        auto b = rng.index(n_ - 1);
        if (b >= a) ++b;
        std::swap(t[a], t[b]);
        break;
      }
      default: {
        if (k_ == 0) break;
        t[rng.index(k_)] = static_cast<int>(rng.index(n_));
      }
    }
    return t;
  }

  // Dense rank of a state, for tabulating the pair measure.
  std::uint64_t state_index(const State& s) const {
    std::uint64_t r = 0;
    switch (family_) {
      case Family::poisson_binomial:
        for (int i = n_ - 1; i >= 0; --i) r = 2 * r + static_cast<std::uint64_t>(s[i]);
        return r;
      case Family::matching:
        for (int i = 0; i < n_; ++i) {
          std::uint64_t smaller = 0;
          for (int j = i + 1; j < n_; ++j) smaller += s[j] < s[i];
          r = r * static_cast<std::uint64_t>(n_ - i) + smaller;
        }
        return r;
      default:
        for (int i = k_ - 1; i >= 0; --i) r = r * static_cast<std::uint64_t>(n_) + static_cast<std::uint64_t>(s[i]);
        return r;
    }
  }

  std::string describe() const {
    std::string s = to_string(family_);
    switch (family_) {
      case Family::poisson_binomial: s += " n=" + std::to_string(n_); break;
      case Family::matching: {
        s += " l=";
        for (std::size_t i = 0; i < lengths_.size(); ++i) s += (i ? "," : "") + std::to_string(lengths_[i]);
        break;
      }
      default: s += " n=" + std::to_string(n_) + " k=" + std::to_string(k_);
    }
    return s;
  }

 private:
  explicit PairModel(Family f) : family_(f) {}

  static PairModel balls(Family f, int n, int k) {
    if (n < 1) throw std::invalid_argument("balls-in-boxes model: n must be positive");
    if (k < 0) throw std::invalid_argument("balls-in-boxes model: k must be nonnegative");
    PairModel m(f);
    m.n_ = n;
    m.k_ = k;
    return m;
  }

  long long ball_stat(int c) const {
    switch (family_) {
      case Family::birthday_pairs: return c >= 2;
      case Family::birthday_triples: return static_cast<long long>(c) * (c - 1) * (c - 2) / 6;
      case Family::coupon: return c == 0;
      default: return 0;
    }
  }

  std::vector<int> box_counts(const State& s) const {
    std::vector<int> counts(n_, 0);
    for (int b : s) ++counts[b];
    return counts;
  }

  double multiset_up(const StateStats& st) const {
    const double n = n_, pairs = n * (n - 1.0) / 2.0;
    double s = 0.0;
    for (std::size_t i = 0; i < lengths_.size(); ++i)
      for (std::size_t j = 0; j < lengths_.size(); ++j) {
        if (i == j) continue;
        s += st.symbol_flow[j][i] * static_cast<double>(lengths_[i] - st.symbol_flow[i][i] - st.symbol_flow[i][j]);
      }
    return s / pairs;
  }

  // A matched position with symbol i loses its match when swapped with a
  // position whose own symbol and image symbol both differ from i.
  double multiset_down(const StateStats& st) const {
    const double n = n_, pairs = n * (n - 1.0) / 2.0;
    double s = 0.0;
    for (std::size_t i = 0; i < lengths_.size(); ++i) {
      const double wi = st.symbol_flow[i][i];
      s += wi * (n - st.w - 2.0 * lengths_[i] + 2.0 * wi);
    }
    return s / pairs;
  }

  Family family_;
  int n_ = 0;
  int k_ = 0;
  std::vector<double> p_;
  std::vector<int> lengths_;
  std::vector<int> symbols_;
  bool plain_ = true;
};

// ===========================================================================
// Exact checks on enumerable instances

struct ExactPairCheck {
  std::size_t states = 0;
  double max_asymmetry = 0.0;     // max |Q(a,b) - Q(b,a)|
  double max_margin_error = 0.0;  // max over b of |sum_a Q(a,b) - P(b)|
  double max_up_error = 0.0;      // per-state |enumerated up - formula|
  double max_down_error = 0.0;
  double mean_up = 0.0;           // E of the formula coordinates
  double mean_down = 0.0;
};

inline ExactPairCheck exact_pair_check(const PairModel& model, bool with_symmetry = true) {
  if (!model.enumerable()) throw CapError("exact_pair_check: state space too large", model.state_count(),
                                          PairModel::kEnumerationCap);
  struct PairHash {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const {
      return static_cast<std::size_t>(splitmix64(k.first * 0x100000001B3ull ^ k.second));
    }
  };
  ExactPairCheck out;
  std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, double, PairHash> q;
  std::unordered_map<std::uint64_t, double> prob, colsum;
  model.for_each_state([&](const PairModel::State& s, double ps) {
    ++out.states;
    const int w = model.statistic(s);
    const std::uint64_t a = model.state_index(s);
    prob[a] += ps;
    double up = 0.0, down = 0.0;
    model.for_each_successor(s, [&](const PairModel::State& t, double kq) {
      const int d = model.statistic(t) - w;
      if (d == 1) up += kq;
      else if (d == -1) down += kq;
      if (with_symmetry) {
        const std::uint64_t b = model.state_index(t);
        q[{a, b}] += ps * kq;
        colsum[b] += ps * kq;
      }
    });
    const StepProbs f = model.step_probs(model.stats(s));
    out.max_up_error = std::max(out.max_up_error, std::abs(up - f.up));
    out.max_down_error = std::max(out.max_down_error, std::abs(down - f.down));
    out.mean_up += ps * f.up;
    out.mean_down += ps * f.down;
  });
  if (with_symmetry) {
    for (const auto& [key, v] : q) {
      const auto it = q.find({key.second, key.first});
      const double back = it == q.end() ? 0.0 : it->second;
      out.max_asymmetry = std::max(out.max_asymmetry, std::abs(v - back));
    }
    for (const auto& [b, pb] : prob) {
      const auto it = colsum.find(b);
      out.max_margin_error = std::max(out.max_margin_error, std::abs((it == colsum.end() ? 0.0 : it->second) - pb));
    }
  }
  return out;
}

// ===========================================================================
// Monte Carlo checks

using StepFormula = std::function<StepProbs(const StateStats&)>;

struct PairVerification {
  std::size_t trials = 0;
  double z_up = 0.0;       // aggregated: sum(1{up} - up(omega)) / sd
  double z_down = 0.0;
  double z_balance = 0.0;  // E[up(omega) - down(omega)] against 0
  bool per_state = false;
  double z_chi_up = 0.0;   // per-state chi-square, Wilson-Hilferty scaled
  double z_chi_down = 0.0;
  double max_state_z = 0.0;  // largest single-state deviation, informational
  double max_deviation = 0.0;
  bool pass = false;
};

namespace detail {

inline double standardized(double dev, double var) {
  if (var > 0.0) return dev / std::sqrt(var);
  return std::abs(dev) < 1e-9 ? 0.0 : INFINITY;
}

// chi-square with df degrees of freedom mapped to an approximate N(0,1) score
inline double wilson_hilferty(double chi2, double df) {
  if (df <= 0.0) return 0.0;
  const double v = 2.0 / (9.0 * df);
  return (std::cbrt(chi2 / df) - (1.0 - v)) / std::sqrt(v);
}

}  // namespace detail

inline PairVerification verify_step_probs(const PairModel& model, std::size_t trials, Rng& rng,
                                          const StepFormula& formula = {}) {
  if (trials < 10000) throw std::invalid_argument("verify_step_probs: need at least 1e4 trials");
  const StepFormula eval = formula ? formula : [&](const StateStats& st) { return model.step_probs(st); };

  struct Cell {
    double visits = 0, ups = 0, downs = 0, pu = 0, pd = 0;
  };
  PairVerification out;
  out.trials = trials;
  out.per_state = model.enumerable() && model.state_count() * 50.0 <= static_cast<double>(trials);
  std::unordered_map<std::uint64_t, Cell> cells;

  double dev_up = 0, var_up = 0, dev_down = 0, var_down = 0, bal = 0, bal2 = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const PairModel::State s = model.sample_state(rng);
    const StateStats st = model.stats(s);
    const StepProbs f = eval(st);
    const PairModel::State s2 = model.sample_pair(s, rng);
    const int d = model.statistic(s2) - st.w;
    const double up = d == 1, down = d == -1;
    dev_up += up - f.up;
    var_up += f.up * (1.0 - f.up);
    dev_down += down - f.down;
    var_down += f.down * (1.0 - f.down);
    bal += f.up - f.down;
    bal2 += (f.up - f.down) * (f.up - f.down);
    if (out.per_state) {
      Cell& c = cells[model.state_index(s)];
      c.visits += 1;
      c.ups += up;
      c.downs += down;
      c.pu = f.up;
      c.pd = f.down;
    }
  }
  const double nt = static_cast<double>(trials);
  out.z_up = detail::standardized(dev_up, var_up);
  out.z_down = detail::standardized(dev_down, var_down);
  const double bal_mean = bal / nt;
  const double bal_var = std::max(0.0, bal2 / nt - bal_mean * bal_mean);
  out.z_balance = detail::standardized(bal_mean, bal_var / nt);

  if (out.per_state) {
    double chi_u = 0, chi_d = 0, df_u = 0, df_d = 0;
    bool impossible = false;
    for (const auto& [idx, c] : cells) {
      const double vu = c.visits * c.pu * (1.0 - c.pu), vd = c.visits * c.pd * (1.0 - c.pd);
      const double eu = c.ups - c.visits * c.pu, ed = c.downs - c.visits * c.pd;
      if (vu > 0) {
        chi_u += eu * eu / vu;
        df_u += 1;
      } else if (std::abs(eu) > 1e-9) {
        impossible = true;
      }
      if (vd > 0) {
        chi_d += ed * ed / vd;
        df_d += 1;
      } else if (std::abs(ed) > 1e-9) {
        impossible = true;
      }
      out.max_state_z = std::max({out.max_state_z, std::abs(detail::standardized(eu, vu)),
                                  std::abs(detail::standardized(ed, vd))});
    }
    out.z_chi_up = impossible ? INFINITY : detail::wilson_hilferty(chi_u, df_u);
    out.z_chi_down = impossible ? INFINITY : detail::wilson_hilferty(chi_d, df_d);
  }
  out.max_deviation = std::max({std::abs(out.z_up), std::abs(out.z_down), std::abs(out.z_balance),
                                out.z_chi_up, out.z_chi_down});
  out.pass = out.max_deviation <= 4.0;
  return out;
}

struct McTv {
  double estimate;
  double std_error;
};

inline constexpr int kBootstrapResamples = 200;

// Plug-in TV between the empirical law of W and `target`; biased upward at
// finite sample sizes.  Standard error from a multinomial bootstrap.
inline McTv mc_tv_estimate(const PairModel& model, const Pmf& target, std::size_t samples, Rng& rng) {
  if (samples < 10000) throw std::invalid_argument("mc_tv_estimate: need at least 1e4 samples");
  std::vector<std::uint64_t> counts;
  for (std::size_t t = 0; t < samples; ++t) {
    const auto w = static_cast<std::size_t>(model.statistic(model.sample_state(rng)));
    if (w >= counts.size()) counts.resize(w + 1, 0);
    ++counts[w];
  }
  const double ns = static_cast<double>(samples);
  auto empirical = [&](const std::vector<std::uint64_t>& c) {
    Pmf p;
    p.mass.resize(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) p.mass[j] = static_cast<double>(c[j]) / ns;
    return p;
  };
  const double est = tv_distance(empirical(counts), target);

  double s = 0, s2 = 0;
  std::vector<std::uint64_t> boot(counts.size());
  for (int b = 0; b < kBootstrapResamples; ++b) {
    std::uint64_t left = samples;
    double rest = 1.0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
      const double pj = static_cast<double>(counts[j]) / ns;
      if (left == 0 || rest <= 0.0) {
        boot[j] = 0;
        continue;
      }
      const double q = std::min(1.0, pj / rest);
      std::binomial_distribution<std::uint64_t> bin(left, q);
      boot[j] = bin(rng.engine());
      left -= boot[j];
      rest -= pj;
    }
    const double v = tv_distance(empirical(boot), target);
    s += v;
    s2 += v * v;
  }
  const double m = s / kBootstrapResamples;
  const double var = std::max(0.0, (s2 - kBootstrapResamples * m * m) / (kBootstrapResamples - 1));
  return {est, std::sqrt(var)};
}

}  // namespace stein_poisson
