#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "bounds.hpp"
#include "exact_laws.hpp"
#include "multivariate.hpp"
#include "pair_models.hpp"
#include "pmf.hpp"
#include "random.hpp"
#include "stein_core.hpp"

namespace stein_poisson {

enum class Problem {
  poisson_binomial,
  matching,
  generalized_matching,
  birthday_pairs,
  birthday_triples,
  coupon,
  coupling_poisson_binomial,
  coupling_matching,
  coupling_coupon,
  coupling_birthday,
  negative_association,
  monochromatic,
  multivariate,
  process_matching,
};

struct ProblemName {
  Problem problem;
  const char* name;
};

inline constexpr ProblemName kProblemNames[] = {
    {Problem::poisson_binomial, "poisson-binomial"},
    {Problem::matching, "matching"},
    {Problem::generalized_matching, "generalized-matching"},
    {Problem::birthday_pairs, "birthday-pairs"},
    {Problem::birthday_triples, "birthday-triples"},
    {Problem::coupon, "coupon"},
    {Problem::coupling_poisson_binomial, "coupling-poisson-binomial"},
    {Problem::coupling_matching, "coupling-matching"},
    {Problem::coupling_coupon, "coupling-coupon"},
    {Problem::coupling_birthday, "coupling-birthday"},
    {Problem::negative_association, "negative-association"},
    {Problem::monochromatic, "monochromatic"},
    {Problem::multivariate, "multivariate"},
    {Problem::process_matching, "process-matching"},
};

inline const char* to_string(Problem p) {
  for (const auto& e : kProblemNames)
    if (e.problem == p) return e.name;
  return "?";
}

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline Problem parse_problem(const std::string& s) {
  for (const auto& e : kProblemNames)
    if (s == e.name) return e.problem;
  std::string all;
  for (const auto& e : kProblemNames) all += std::string(all.empty() ? "" : ", ") + e.name;
  throw UsageError("unknown problem '" + s + "' (one of: " + all + ")");
}

// Usage errors: bad or missing parameters.  Mapped to exit code 2.
struct Params {
  std::optional<int> n, k, c;
  std::optional<double> theta;
  std::vector<int> l;
  std::vector<double> p;

  std::string describe() const {
    std::ostringstream os;
    const char* sep = "";
    auto item = [&](const char* key, const std::string& v) {
      os << sep << key << '=' << v;
      sep = ";";
    };
    auto num = [](double x) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.10g", x);
      return std::string(buf);
    };
    if (n) item("n", std::to_string(*n));
    if (k) item("k", std::to_string(*k));
    if (c) item("c", std::to_string(*c));
    if (theta) item("theta", num(*theta));
    if (!l.empty()) {
      std::string s;
      for (std::size_t i = 0; i < l.size(); ++i) s += (i ? " " : "") + std::to_string(l[i]);
      item("l", s);
    }
    if (!p.empty()) {
      std::string s;
      for (std::size_t i = 0; i < p.size(); ++i) s += (i ? " " : "") + num(p[i]);
      item("p", s);
    }
    return os.str();
  }
};

namespace detail {

inline int need(const std::optional<int>& v, const char* flag, Problem p) {
  if (!v) throw UsageError(std::string(to_string(p)) + " needs --" + flag);
  return *v;
}

inline void need_p(const Params& q, Problem p) {
  if (q.p.empty()) throw UsageError(std::string(to_string(p)) + " needs --p");
}

}  // namespace detail

// Fills k from theta where the problem has a natural theta scale and checks
// what each problem requires.
inline Params resolve(Problem prob, Params q) {
  using detail::need;
  auto k_from_theta = [&](auto f) {
    if (!q.k && q.theta) q.k = f(need(q.n, "n", prob), *q.theta);
  };
  switch (prob) {
    case Problem::poisson_binomial:
    case Problem::coupling_poisson_binomial: detail::need_p(q, prob); break;
    case Problem::matching:
    case Problem::coupling_matching:
    case Problem::multivariate:
    case Problem::process_matching: need(q.n, "n", prob); break;
    case Problem::generalized_matching:
      if (q.l.empty()) throw UsageError("generalized-matching needs --l");
      break;
    case Problem::birthday_pairs:
    case Problem::coupling_birthday:
      k_from_theta([](int n, double t) { return static_cast<int>(std::llround(t * std::sqrt(n))); });
      need(q.n, "n", prob);
      need(q.k, "k", prob);
      break;
    case Problem::birthday_triples:
      k_from_theta([](int n, double t) { return static_cast<int>(std::llround(t * std::cbrt(double(n) * n))); });
      need(q.n, "n", prob);
      need(q.k, "k", prob);
      break;
    case Problem::coupon:
    case Problem::coupling_coupon:
    case Problem::negative_association:
      k_from_theta([](int n, double t) { return coupon_balls_for_theta(n, t); });
      need(q.n, "n", prob);
      need(q.k, "k", prob);
      break;
    case Problem::monochromatic:
      need(q.n, "n", prob);
      need(q.k, "k", prob);
      need(q.c, "c", prob);
      break;
  }
  return q;
}

// ===========================================================================
// Size caps, checked before any enumeration starts

struct SizeEstimate {
  double estimate;
  double cap;
  const char* what;
};

inline SizeEstimate exact_size(Problem prob, const Params& q) {
  switch (prob) {
    case Problem::poisson_binomial:
    case Problem::coupling_poisson_binomial:
      return {static_cast<double>(q.p.size()) * q.p.size(), 1e10, "convolution steps"};
    case Problem::matching:
    case Problem::coupling_matching: return {static_cast<double>(*q.n), kPlainMatchingCap, "letters"};
    case Problem::generalized_matching: {
      double n = 0;
      for (int x : q.l) n += x;
      return {std::tgamma(n + 1.0), std::tgamma(kMultisetMatchingCap + 1.0), "permutations"};
    }
    case Problem::birthday_pairs:
      return {double(*q.n) * (*q.k + 1.0) * (std::min(*q.n, *q.k / 2) + 1.0), kDpStateCap, "DP states"};
    case Problem::coupling_birthday:
      return {double(*q.n) * (*q.k + 1.0) * (choose(*q.k, 2) + 1.0), kDpStateCap, "DP states"};
    case Problem::birthday_triples:
      return {double(*q.n) * (*q.k + 1.0) * (choose(*q.k, 3) + 1.0), kDpStateCap, "DP states"};
    case Problem::coupon:
    case Problem::coupling_coupon:
    case Problem::negative_association: return {static_cast<double>(*q.n), 1e6, "boxes"};
    case Problem::monochromatic:
      return {double(*q.c) * (*q.n + 1.0) * (choose(*q.n, *q.k) + 1.0), kDpStateCap, "DP states"};
    case Problem::multivariate:
      return {std::tgamma(*q.n + 1.0), std::tgamma(kJointEnumerationCap + 1.0), "permutations"};
    case Problem::process_matching: return {std::ldexp(1.0, *q.n), std::ldexp(1.0, kConfigCap), "configurations"};
  }
  return {0, 0, ""};
}

inline void check_exact_caps(Problem prob, const Params& q) {
  const SizeEstimate s = exact_size(prob, q);
  if (s.estimate > s.cap)
    throw CapError(std::string("exact ") + to_string(prob) + ": too many " + s.what + "; use mc-tv instead", s.estimate,
                   s.cap);
}

// ===========================================================================
// Certification records

struct CertRecord {
  std::string problem;
  std::string params;
  double lambda = 0.0;
  std::optional<double> exact_tv;
  std::optional<double> mc_tv;
  std::optional<double> mc_stderr;
  double bound = 0.0;
  double bound_raw = 0.0;
  Convention convention = Convention::tv;
  bool surrogate = false;
  bool pass = false;
  double seconds = 0.0;
};

inline BoundReport evaluate_bound(Problem prob, const Params& q0) {
  const Params q = resolve(prob, q0);
  try {
    switch (prob) {
      case Problem::poisson_binomial: return bound_poisson_binomial(q.p);
      case Problem::matching: return bound_matching(*q.n);
      case Problem::generalized_matching: return bound_generalized_matching(q.l);
      case Problem::birthday_pairs: return bound_birthday_pairs(*q.n, *q.k);
      case Problem::birthday_triples: return bound_birthday_triples(*q.n, *q.k);
      case Problem::coupon: return bound_coupon_collector(*q.n, *q.k);
      case Problem::coupling_poisson_binomial:
        return bound_coupling({CouplingProblem::poisson_binomial, q.p, 0, 0});
      case Problem::coupling_matching: return bound_coupling({CouplingProblem::matching, {}, *q.n, 0});
      case Problem::coupling_coupon: return bound_coupling({CouplingProblem::coupon, {}, *q.n, *q.k});
      case Problem::coupling_birthday: return bound_coupling({CouplingProblem::birthday, {}, *q.n, *q.k});
      case Problem::negative_association: {
        if (*q.n < 2) throw std::invalid_argument("negative-association needs n >= 2");
        const MeanVariance mv = empty_boxes_mean_variance(*q.n, *q.k);
        return bound_negative_association(mv.mean, mv.variance);
      }
      case Problem::monochromatic: return bound_monochromatic(*q.n, *q.k, *q.c);
      case Problem::multivariate: return bound_multivariate(*q.n);
      case Problem::process_matching: return bound_process(*q.n);
    }
  } catch (const UsageError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  throw UsageError("unhandled problem");
}

namespace detail {

struct ExactOutcome {
  double lambda;
  double tv;
};

inline ExactOutcome exact_tv_of(Problem prob, const Params& q, const BoundReport& b) {
  auto vs_poisson = [](const Pmf& law, double lambda) {
    if (lambda <= 0.0) return ExactOutcome{0.0, tv_distance(law, point_mass(0))};
    return ExactOutcome{lambda, tv_distance(law, poisson_pmf(lambda))};
  };
  switch (prob) {
    case Problem::poisson_binomial:
    case Problem::coupling_poisson_binomial: return vs_poisson(poisson_binomial_pmf(q.p), b.lambda);
    case Problem::matching:
    case Problem::coupling_matching: return vs_poisson(matching_pmf(MatchingSpec{*q.n, {}}), 1.0);
    case Problem::generalized_matching: return vs_poisson(matching_pmf(multiset_spec(q.l)), b.lambda);
    case Problem::birthday_pairs:
      return vs_poisson(occupancy_pmf({*q.n, *q.k, OccupancyStatistic::pairs}), b.lambda);
    case Problem::birthday_triples:
      return vs_poisson(occupancy_pmf({*q.n, *q.k, OccupancyStatistic::triples}), b.lambda);
    case Problem::coupon:
    case Problem::coupling_coupon:
    case Problem::negative_association:
      return vs_poisson(occupancy_pmf({*q.n, *q.k, OccupancyStatistic::empty}), b.lambda);
    case Problem::coupling_birthday:
      return vs_poisson(occupancy_pmf({*q.n, *q.k, OccupancyStatistic::pair_count}), b.lambda);
    case Problem::monochromatic:
      return vs_poisson(coloring_pmf({*q.n, *q.k, *q.c}), b.lambda);
    case Problem::multivariate:
      return {1.0, joint_tv(joint_fixed_point_succession_pmf(*q.n), product_poisson_joint({1.0, 1.0}))};
    case Problem::process_matching:
      return {1.0, process_tv(matching_config_law(*q.n),
                              product_poisson_config_law(std::vector<double>(*q.n, 1.0 / *q.n)))};
  }
  return {0, 0};
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline CertRecord base_record(Problem prob, const Params& q, const BoundReport& b) {
  CertRecord r;
  r.problem = to_string(prob);
  r.params = q.describe();
  r.lambda = b.lambda;
  r.bound = b.value;
  r.bound_raw = b.raw_value;
  r.convention = b.convention;
  r.surrogate = b.surrogate;
  return r;
}

}  // namespace detail

inline constexpr double kExactSlack = 1e-12;

inline CertRecord certify_exact(Problem prob, const Params& q0) {
  const auto t0 = std::chrono::steady_clock::now();
  const Params q = resolve(prob, q0);
  const BoundReport b = evaluate_bound(prob, q);
  check_exact_caps(prob, q);
  CertRecord r = detail::base_record(prob, q, b);
  const detail::ExactOutcome e = detail::exact_tv_of(prob, q, b);
  r.exact_tv = e.tv;
  r.pass = r.bound >= e.tv - kExactSlack;
  r.seconds = detail::seconds_since(t0);
  return r;
}

// The pair model whose statistic is the problem's W, where one exists.
inline PairModel model_for(Problem prob, const Params& q) {
  switch (prob) {
    case Problem::poisson_binomial:
    case Problem::coupling_poisson_binomial: return PairModel::poisson_binomial(q.p);
    case Problem::matching:
    case Problem::coupling_matching: return PairModel::matching(*q.n);
    case Problem::generalized_matching: return PairModel::matching(multiset_spec(q.l));
    case Problem::birthday_pairs: return PairModel::birthday_pairs(*q.n, *q.k);
    case Problem::birthday_triples: return PairModel::birthday_triples(*q.n, *q.k);
    case Problem::coupon:
    case Problem::coupling_coupon:
    case Problem::negative_association: return PairModel::coupon(*q.n, *q.k);
    default: throw UsageError(std::string("no sampler for ") + to_string(prob));
  }
}

inline CertRecord certify_mc(Problem prob, const Params& q0, std::size_t samples, Rng& rng) {
  const auto t0 = std::chrono::steady_clock::now();
  const Params q = resolve(prob, q0);
  const BoundReport b = evaluate_bound(prob, q);
  if (samples < 10000) throw UsageError("mc-tv needs --trials >= 10000");
  const PairModel model = model_for(prob, q);
  CertRecord r = detail::base_record(prob, q, b);
  const Pmf target = b.lambda > 0.0 ? poisson_pmf(b.lambda) : point_mass(0);
  const McTv mc = mc_tv_estimate(model, target, samples, rng);
  r.mc_tv = mc.estimate;
  r.mc_stderr = mc.std_error;
  r.pass = r.bound >= mc.estimate - 3.0 * mc.std_error;
  r.seconds = detail::seconds_since(t0);
  return r;
}

// ===========================================================================
// Report output

enum class Format { csv, json };

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw UsageError("unknown format '" + s + "' (expected csv|json)");
}

inline constexpr const char* kCsvVersionLine = "# stein-poisson certification csv v1";
inline constexpr const char* kCsvHeader =
    "problem,params,lambda,exact_tv,mc_tv,mc_stderr,bound,convention,surrogate,verdict,seconds,bound_raw,bound_halved";

namespace detail {

inline std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::string opt_num(const std::optional<double>& x) { return x ? num(*x) : std::string(); }

inline nlohmann::json opt_json(const std::optional<double>& x) { return x ? nlohmann::json(*x) : nlohmann::json(); }

}  // namespace detail

inline std::string csv_row(const CertRecord& r, Convention shown) {
  std::ostringstream os;
  os << r.problem << ",\"" << r.params << "\"," << detail::num(r.lambda) << ',' << detail::opt_num(r.exact_tv) << ','
     << detail::opt_num(r.mc_tv) << ',' << detail::opt_num(r.mc_stderr) << ','
     << detail::num(convert(r.bound, r.convention, shown)) << ',' << to_string(shown) << ','
     << (r.surrogate ? "true" : "false") << ',' << (r.pass ? "pass" : "fail") << ',' << detail::num(r.seconds) << ','
     << detail::num(r.bound_raw) << ',' << detail::num(r.bound / 2.0);
  return os.str();
}

inline nlohmann::ordered_json json_record(const CertRecord& r, Convention shown) {
  nlohmann::ordered_json j;
  j["problem"] = r.problem;
  j["params"] = r.params;
  j["lambda"] = r.lambda;
  j["exact_tv"] = detail::opt_json(r.exact_tv);
  j["mc_tv"] = detail::opt_json(r.mc_tv);
  j["mc_stderr"] = detail::opt_json(r.mc_stderr);
  j["bound"] = convert(r.bound, r.convention, shown);
  j["convention"] = to_string(shown);
  j["surrogate"] = r.surrogate;
  j["verdict"] = r.pass ? "pass" : "fail";
  j["seconds"] = r.seconds;
  j["bound_raw"] = r.bound_raw;
  j["bound_halved"] = r.bound / 2.0;
  return j;
}

// Streams records; JSON output is an array written incrementally so a
// partial run still leaves every finished record on disk.
class RecordWriter {
 public:
  RecordWriter(std::ostream& os, Format f, std::optional<Convention> shown)
      : os_(os), format_(f), shown_(shown) {
    if (format_ == Format::csv) os_ << kCsvVersionLine << '\n' << kCsvHeader << '\n';
    else os_ << "[";
    os_.flush();
  }
  ~RecordWriter() { finish(); }

  void write(const CertRecord& r) {
    const Convention c = shown_.value_or(r.convention);
    if (format_ == Format::csv) {
      os_ << csv_row(r, c) << '\n';
    } else {
      os_ << (count_ ? ",\n  " : "\n  ") << json_record(r, c).dump();
    }
    ++count_;
    os_.flush();
  }

  void finish() {
    if (finished_) return;
    finished_ = true;
    if (format_ == Format::json) os_ << (count_ ? "\n]\n" : "]\n");
    os_.flush();
  }

 private:
  std::ostream& os_;
  Format format_;
  std::optional<Convention> shown_;
  std::size_t count_ = 0;
  bool finished_ = false;
};

// ===========================================================================
// Sweeps

struct SweepSpec {
  Problem problem = Problem::matching;
  std::vector<Params> grid;
  std::uint64_t seed = 0;
  Format format = Format::csv;
  std::size_t trials = 0;  // 0: exact path
  std::optional<Convention> convention;
};

inline unsigned worker_count() {
  if (const char* env = std::getenv("STEIN_POISSON_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct SweepOutcome {
  std::size_t records = 0;
  std::size_t failures = 0;
  bool interrupted = false;
};

// Runs the grid on worker threads; grid point i always uses sub-stream i of
// the master seed, and records are emitted in grid order.  Setting `stop`
// makes workers finish their current point and the writer flush what is done.
inline SweepOutcome run_sweep(const SweepSpec& spec, std::ostream& out, unsigned threads,
                              const std::atomic<bool>* stop = nullptr) {
  if (spec.grid.empty()) throw UsageError("empty sweep grid");
  for (const Params& q : spec.grid) {
    const Params r = resolve(spec.problem, q);
    if (spec.trials == 0) check_exact_caps(spec.problem, r);
    else model_for(spec.problem, r);
  }

  const std::size_t n = spec.grid.size();
  std::vector<std::optional<CertRecord>> done(n);
  std::vector<std::string> errors(n);
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};
  auto stopped = [&] { return stop && stop->load(); };

  auto work = [&] {
    while (!stopped()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      CertRecord rec;
      std::string err;
      try {
        if (spec.trials == 0) {
          rec = certify_exact(spec.problem, spec.grid[i]);
        } else {
          Rng rng = substream(spec.seed, i);
          rec = certify_mc(spec.problem, spec.grid[i], spec.trials, rng);
        }
      } catch (const std::exception& e) {
        err = e.what();
      }
      {
        std::lock_guard<std::mutex> lock(mu);
        if (err.empty()) done[i] = rec;
        else errors[i] = err;
      }
      cv.notify_all();
    }
    cv.notify_all();
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);

  SweepOutcome outcome;
  RecordWriter writer(out, spec.format, spec.convention);
  std::string first_error;
  for (std::size_t i = 0; i < n; ++i) {
    std::unique_lock<std::mutex> lock(mu);
    // Polled so that a stop request raised from a signal handler is noticed.
    while (!done[i] && errors[i].empty() && !(stopped() && i >= next.load()))
      cv.wait_for(lock, std::chrono::milliseconds(50));
    if (!done[i] && errors[i].empty()) {
      outcome.interrupted = true;
      break;
    }
    if (!errors[i].empty()) {
      first_error = errors[i];
      outcome.interrupted = true;
      break;
    }
    const CertRecord rec = *done[i];
    lock.unlock();
    writer.write(rec);
    ++outcome.records;
    if (!rec.pass) ++outcome.failures;
  }
  writer.finish();
  for (auto& t : pool) t.join();
  if (!first_error.empty()) throw std::runtime_error("sweep stopped: " + first_error);
  return outcome;
}

}  // namespace stein_poisson
