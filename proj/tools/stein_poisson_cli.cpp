// stein-poisson: evaluate Poisson approximation bounds and certify them
// against exact or simulated total variation distances.

#include <atomic>
#include <csignal>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stein_poisson/stein_poisson.hpp"

using namespace stein_poisson;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_interrupt(int) { g_stop.store(true); }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

int to_int(const std::string& s) {
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(s, &pos);
  } catch (const std::exception&) {
    throw UsageError("not an integer: '" + s + "'");
  }
  if (pos != s.size()) throw UsageError("not an integer: '" + s + "'");
  return v;
}

double to_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + s + "'");
  }
  if (pos != s.size()) throw UsageError("not a number: '" + s + "'");
  return v;
}

// "4..12", "4,5,6", or a mix such as "4..6,10"
std::vector<int> int_list(const std::string& s) {
  std::vector<int> out;
  for (const std::string& part : split(s, ',')) {
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      out.push_back(to_int(part));
      continue;
    }
    const int a = to_int(part.substr(0, dots)), b = to_int(part.substr(dots + 2));
    for (int x = a; x <= b; ++x) out.push_back(x);
  }
  return out;
}

std::vector<double> double_list(const std::string& s) {
  std::vector<double> out;
  for (const std::string& part : split(s, ',')) out.push_back(to_double(part));
  return out;
}

// p recipes: comma list, uniform:X or uniform:X/n (p_i = X/n), harmonic (p_i = 1/i)
std::vector<double> p_vector(const std::string& recipe, std::optional<int> n) {
  if (recipe.rfind("uniform:", 0) == 0) {
    std::string x = recipe.substr(8);
    if (x.size() > 2 && x.compare(x.size() - 2, 2, "/n") == 0) x.resize(x.size() - 2);
    if (!n) throw UsageError("p recipe 'uniform' needs --n");
    return std::vector<double>(static_cast<std::size_t>(*n), to_double(x) / *n);
  }
  if (recipe == "harmonic") {
    if (!n) throw UsageError("p recipe 'harmonic' needs --n");
    std::vector<double> p;
    for (int i = 1; i <= *n; ++i) p.push_back(1.0 / i);
    return p;
  }
  return double_list(recipe);
}

// random:COUNT[:MAXLEN] draws COUNT vectors of length 1..MAXLEN (default 12)
// with uniform entries, from a sub-stream reserved for grid construction.
std::vector<std::vector<double>> random_p_vectors(const std::string& recipe, std::uint64_t seed) {
  const auto parts = split(recipe, ':');
  if (parts.size() < 2 || parts.size() > 3) throw UsageError("p recipe random:COUNT[:MAXLEN]");
  const int count = to_int(parts[1]);
  const int maxlen = parts.size() == 3 ? to_int(parts[2]) : 12;
  if (count < 0 || maxlen < 1) throw UsageError("p recipe random:COUNT[:MAXLEN] needs COUNT >= 0, MAXLEN >= 1");
  Rng rng = substream(seed, 0xFFFFFFFFull);
  std::vector<std::vector<double>> out;
  for (int i = 0; i < count; ++i) {
    std::vector<double> p(1 + rng.index(static_cast<std::uint64_t>(maxlen)));
    for (double& x : p) x = rng.uniform();
    out.push_back(std::move(p));
  }
  return out;
}

struct Flags {
  std::string problem;
  std::string n, k, c, theta, l, p;
  std::size_t trials = 0;
  std::uint64_t seed = 1;
  std::string format = "csv";
  std::string out;
  std::string convention;
  bool exact = false;
};

void add_common(CLI::App* cmd, Flags& f, bool lists) {
  cmd->add_option("problem", f.problem, "problem id")->required();
  const char* suffix = lists ? " (list: a,b,c or a..b)" : "";
  cmd->add_option("--n", f.n, std::string("n") + suffix);
  cmd->add_option("--k", f.k, std::string("k") + suffix);
  cmd->add_option("--c", f.c, std::string("number of colors") + suffix);
  cmd->add_option("--theta", f.theta, std::string("theta; sets k when --k is absent") + suffix);
  cmd->add_option("--l", f.l, lists ? "multiplicities, vectors separated by ';'" : "multiplicities, comma list");
  cmd->add_option("--p", f.p,
                  lists ? "p recipe: comma list, uniform:X/n, harmonic, random:COUNT[:MAXLEN]"
                        : "p recipe: comma list, uniform:X/n, harmonic");
  cmd->add_option("--format", f.format, "csv|json");
  cmd->add_option("--out", f.out, "output file");
  cmd->add_option("--convention", f.convention, "tv|set");
}

Params single_params(const Flags& f) {
  Params q;
  if (!f.n.empty()) q.n = to_int(f.n);
  if (!f.k.empty()) q.k = to_int(f.k);
  if (!f.c.empty()) q.c = to_int(f.c);
  if (!f.theta.empty()) q.theta = to_double(f.theta);
  if (!f.l.empty()) {
    for (const auto& x : split(f.l, ',')) q.l.push_back(to_int(x));
  }
  if (!f.p.empty()) q.p = p_vector(f.p, q.n);
  return q;
}

std::vector<Params> grid_params(const Flags& f) {
  auto ints = [](const std::string& s) {
    std::vector<std::optional<int>> v;
    if (s.empty()) v.emplace_back();
    else
      for (int x : int_list(s)) v.emplace_back(x);
    return v;
  };
  std::vector<std::optional<double>> thetas;
  if (f.theta.empty()) thetas.emplace_back();
  else
    for (double x : double_list(f.theta)) thetas.emplace_back(x);
  std::vector<std::vector<int>> ls;
  if (f.l.empty()) ls.emplace_back();
  else
    for (const auto& v : split(f.l, ';')) {
      std::vector<int> l;
      for (const auto& x : split(v, ',')) l.push_back(to_int(x));
      ls.push_back(l);
    }

  std::vector<Params> grid;
  for (const auto& n : ints(f.n))
    for (const auto& k : ints(f.k))
      for (const auto& c : ints(f.c))
        for (const auto& t : thetas)
          for (const auto& l : ls) {
            Params q;
            q.n = n;
            q.k = k;
            q.c = c;
            q.theta = t;
            q.l = l;
            if (f.p.empty()) {
              grid.push_back(q);
            } else if (f.p.rfind("random:", 0) == 0) {
              for (auto& p : random_p_vectors(f.p, f.seed)) {
                q.p = p;
                grid.push_back(q);
              }
            } else {
              for (const auto& recipe : split(f.p, ';')) {
                q.p = p_vector(recipe, n);
                grid.push_back(q);
              }
            }
          }
  return grid;
}

std::optional<Convention> shown_convention(const Flags& f) {
  if (f.convention.empty()) return std::nullopt;
  try {
    return parse_convention(f.convention);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// Output goes to --out when given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw UsageError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

int cmd_bound(const Flags& f) {
  const Problem prob = parse_problem(f.problem);
  const BoundReport b = evaluate_bound(prob, single_params(f));
  const Convention shown = shown_convention(f).value_or(b.convention);
  const Format fmt = parse_format(f.format);
  Sink sink(f.out);
  std::ostream& os = sink.stream();
  if (fmt == Format::json) {
    nlohmann::ordered_json j;
    j["bound"] = to_string(b.kind);
    j["lambda"] = b.lambda;
    j["value"] = convert(b.value, b.convention, shown);
    j["raw_value"] = b.raw_value;
    j["convention"] = to_string(shown);
    j["surrogate"] = b.surrogate;
    j["degenerate"] = b.degenerate;
    j["halved_reading"] = halved_reading(b);
    j["companion"] = std::isnan(b.companion) ? nlohmann::json() : nlohmann::json(b.companion);
    for (const auto& [key, v] : b.inputs) j["inputs"][key] = v;
    os << j.dump(2) << '\n';
    return 0;
  }
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::string(buf);
  };
  os << "bound: " << to_string(b.kind) << '\n'
     << "lambda: " << num(b.lambda) << '\n'
     << "value: " << num(convert(b.value, b.convention, shown)) << '\n'
     << "raw_value: " << num(b.raw_value) << '\n'
     << "convention: " << to_string(shown) << '\n'
     << "surrogate: " << (b.surrogate ? "true" : "false") << '\n'
     << "halved_reading: " << num(halved_reading(b)) << '\n';
  if (b.degenerate) os << "degenerate: true\n";
  if (!std::isnan(b.companion)) os << "companion: " << num(b.companion) << '\n';
  for (const auto& [key, v] : b.inputs) os << "input." << key << ": " << num(v) << '\n';
  return 0;
}

int emit_single(const Flags& f, const CertRecord& r) {
  Sink sink(f.out);
  RecordWriter w(sink.stream(), parse_format(f.format), shown_convention(f));
  w.write(r);
  w.finish();
  return r.pass ? 0 : 1;
}

int cmd_exact_tv(const Flags& f) {
  const Problem prob = parse_problem(f.problem);
  parse_format(f.format);
  return emit_single(f, certify_exact(prob, single_params(f)));
}

int cmd_mc_tv(const Flags& f) {
  const Problem prob = parse_problem(f.problem);
  parse_format(f.format);
  if (f.trials == 0) throw UsageError("mc-tv needs --trials");
  Rng rng = substream(f.seed, 0);
  return emit_single(f, certify_mc(prob, single_params(f), f.trials, rng));
}

int cmd_sweep(const Flags& f) {
  SweepSpec spec;
  spec.problem = parse_problem(f.problem);
  spec.seed = f.seed;
  spec.format = parse_format(f.format);
  spec.trials = f.trials;
  spec.convention = shown_convention(f);
  spec.grid = grid_params(f);
  if (spec.grid.empty()) throw UsageError("empty sweep grid");
  Sink sink(f.out);
  std::signal(SIGINT, on_interrupt);
  std::signal(SIGTERM, on_interrupt);
  const SweepOutcome o = run_sweep(spec, sink.stream(), worker_count(), &g_stop);
  std::cerr << "sweep: " << o.records << " records, " << o.failures << " failures"
            << (o.interrupted ? " (interrupted)" : "") << '\n';
  if (o.interrupted) return 130;
  return o.failures ? 1 : 0;
}

int cmd_verify_pair(const Flags& f) {
  const Problem prob = parse_problem(f.problem);
  const Params q = resolve(prob, single_params(f));
  const PairModel model = model_for(prob, q);
  if (!f.exact && f.trials == 0 && !model.enumerable())
    throw UsageError("verify-pair needs --exact on an enumerable instance or --trials >= 10000");
  if (f.trials != 0 && f.trials < 10000) throw UsageError("verify-pair needs --trials >= 10000");
  Sink sink(f.out);
  std::ostream& os = sink.stream();
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return std::string(buf);
  };
  bool ok = true;
  os << "model: " << model.describe() << "\nc: " << num(model.c()) << '\n';
  if (f.exact || f.trials == 0) {
    const ExactPairCheck e = exact_pair_check(model);
    const bool sym = e.max_asymmetry <= 1e-12 && e.max_margin_error <= 1e-12;
    const bool cond = e.max_up_error <= 1e-12 && e.max_down_error <= 1e-12;
    const bool bal = std::abs(e.mean_up - e.mean_down) <= 1e-12;
    os << "exact.states: " << e.states << '\n'
       << "exact.q_symmetric: " << (sym ? "yes" : "no") << " (max asymmetry " << num(e.max_asymmetry)
       << ", max margin error " << num(e.max_margin_error) << ")\n"
       << "exact.up_max_deviation: " << num(e.max_up_error) << '\n'
       << "exact.down_max_deviation: " << num(e.max_down_error) << '\n'
       << "exact.conditionals: " << (cond ? "exact" : "mismatch") << '\n'
       << "exact.mean_up: " << num(e.mean_up) << "\nexact.mean_down: " << num(e.mean_down) << '\n';
    ok = ok && sym && cond && bal;
  }
  if (f.trials != 0) {
    Rng rng = substream(f.seed, 0);
    const PairVerification v = verify_step_probs(model, f.trials, rng);
    os << "mc.trials: " << v.trials << '\n'
       << "mc.z_up: " << num(v.z_up) << "\nmc.z_down: " << num(v.z_down) << "\nmc.z_balance: " << num(v.z_balance)
       << '\n';
    if (v.per_state)
      os << "mc.per_state_z_up: " << num(v.z_chi_up) << "\nmc.per_state_z_down: " << num(v.z_chi_down)
         << "\nmc.max_single_state_z: " << num(v.max_state_z) << '\n';
    os << "mc.max_deviation: " << num(v.max_deviation) << "\nmc.verdict: " << (v.pass ? "pass" : "fail") << '\n';
    ok = ok && v.pass;
  }
  os << "verdict: " << (ok ? "pass" : "fail") << '\n';
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Poisson approximation bounds and their certification"};
  app.require_subcommand(1);
  Flags f;

  auto* bound = app.add_subcommand("bound", "evaluate a closed-form bound");
  add_common(bound, f, false);
  auto* exact = app.add_subcommand("exact-tv", "exact TV against the Poisson target, with verdict");
  add_common(exact, f, false);
  auto* mc = app.add_subcommand("mc-tv", "Monte Carlo TV against the Poisson target, with verdict");
  add_common(mc, f, false);
  mc->add_option("--trials", f.trials, "number of samples");
  mc->add_option("--seed", f.seed, "64-bit master seed");
  auto* sweep = app.add_subcommand("sweep", "certify a parameter grid");
  add_common(sweep, f, true);
  sweep->add_option("--trials", f.trials, "Monte Carlo samples per point (default: exact)");
  sweep->add_option("--seed", f.seed, "64-bit master seed");
  auto* verify = app.add_subcommand("verify-pair", "check an exchangeable pair and its conditional formulas");
  add_common(verify, f, false);
  verify->add_option("--trials", f.trials, "Monte Carlo trials");
  verify->add_option("--seed", f.seed, "64-bit master seed");
  verify->add_flag("--exact", f.exact, "enumerate the pair measure");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*bound) return cmd_bound(f);
    if (*exact) return cmd_exact_tv(f);
    if (*mc) return cmd_mc_tv(f);
    if (*sweep) return cmd_sweep(f);
    if (*verify) return cmd_verify_pair(f);
  } catch (const CapError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
