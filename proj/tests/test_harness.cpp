#include <gtest/gtest.h>

#include <sstream>

#include "stein_poisson/stein_poisson.hpp"

using namespace stein_poisson;

namespace {

// Drops the seconds column (11th) from CSV rows and the "seconds" field from JSON.
std::string without_timing(const std::string& text) {
  std::istringstream is(text);
  std::string line, out;
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] != '#' && line.find("\"seconds\"") == std::string::npos) {
      std::vector<std::string> fields;
      std::string cur;
      bool quoted = false;
      for (char ch : line) {
        if (ch == '"') quoted = !quoted;
        if (ch == ',' && !quoted) {
          fields.push_back(cur);
          cur.clear();
        } else {
          cur += ch;
        }
      }
      fields.push_back(cur);
      if (fields.size() == 13) fields[10].clear();
      line.clear();
      for (std::size_t i = 0; i < fields.size(); ++i) line += (i ? "," : "") + fields[i];
    } else if (line.find("\"seconds\"") != std::string::npos) {
      const auto a = line.find("\"seconds\":");
      const auto b = line.find(',', a);
      line.erase(a, b - a);
    }
    out += line + '\n';
  }
  return out;
}

SweepSpec matching_sweep(std::size_t trials) {
  SweepSpec s;
  s.problem = Problem::matching;
  for (int n = 2; n <= 30; ++n) {
    Params q;
    q.n = n;
    s.grid.push_back(q);
  }
  s.seed = 42;
  s.trials = trials;
  return s;
}

}  // namespace

TEST(Problems, NamesRoundTrip) {
  for (const auto& pn : kProblemNames) EXPECT_EQ(parse_problem(pn.name), pn.problem);
  EXPECT_THROW(parse_problem("bogus"), UsageError);
}

TEST(Params, DescribeAndResolve) {
  Params q;
  q.n = 100;
  q.theta = 1.0;
  EXPECT_EQ(resolve(Problem::birthday_pairs, q).k, 10);
  EXPECT_EQ(resolve(Problem::coupon, q).k, coupon_balls_for_theta(100, 1.0));
  EXPECT_EQ(resolve(Problem::birthday_triples, q).k, 22);
  q.k = 7;
  EXPECT_EQ(resolve(Problem::birthday_pairs, q).k, 7);
  EXPECT_EQ(q.describe(), "n=100;k=7;theta=1");
  EXPECT_THROW(resolve(Problem::monochromatic, q), UsageError);
  EXPECT_THROW(resolve(Problem::poisson_binomial, Params{}), UsageError);
  EXPECT_THROW(resolve(Problem::generalized_matching, Params{}), UsageError);
}

TEST(EvaluateBound, WrapsDomainErrors) {
  Params q;
  q.n = 1;
  EXPECT_THROW(evaluate_bound(Problem::matching, q), UsageError);
  q.n = 8;
  EXPECT_DOUBLE_EQ(evaluate_bound(Problem::matching, q).value, 0.25);
}

TEST(Certify, ExactVerdicts) {
  Params q;
  q.n = 10;
  const CertRecord r = certify_exact(Problem::matching, q);
  EXPECT_TRUE(r.pass);
  ASSERT_TRUE(r.exact_tv);
  EXPECT_NEAR(*r.exact_tv, tv_distance(matching_pmf(MatchingSpec{10, {}}), poisson_pmf(1.0)), 1e-15);
  EXPECT_EQ(r.params, "n=10");

  Params pb;
  pb.p = {1.0};
  EXPECT_FALSE(certify_exact(Problem::poisson_binomial, pb).pass);
  EXPECT_TRUE(certify_exact(Problem::coupling_poisson_binomial, pb).pass);
}

TEST(Certify, CapsRaiseBeforeWork) {
  Params q;
  q.n = 100000;
  EXPECT_THROW(certify_exact(Problem::matching, q), CapError);
  Params l;
  l.l = {4, 4, 4};
  EXPECT_THROW(certify_exact(Problem::generalized_matching, l), CapError);
  Params b;
  b.n = 2000;
  b.k = 900;
  EXPECT_THROW(certify_exact(Problem::birthday_triples, b), CapError);
  try {
    certify_exact(Problem::matching, q);
  } catch (const CapError& e) {
    EXPECT_NE(std::string(e.what()).find("mc-tv"), std::string::npos);
  }
}

TEST(Certify, MonteCarlo) {
  Params q;
  q.n = 100;
  Rng rng(3);
  const CertRecord r = certify_mc(Problem::matching, q, 100000, rng);
  EXPECT_TRUE(r.pass);
  ASSERT_TRUE(r.mc_tv && r.mc_stderr);
  EXPECT_FALSE(r.exact_tv);
  Rng rng2(3);
  EXPECT_THROW(certify_mc(Problem::matching, q, 100, rng2), UsageError);
  EXPECT_THROW(certify_mc(Problem::monochromatic, Params{6, 2, 3, {}, {}, {}}, 100000, rng2), UsageError);
}

TEST(Output, CsvAndJsonShapes) {
  Params q;
  q.n = 8;
  const CertRecord r = certify_exact(Problem::matching, q);
  const std::string row = csv_row(r, r.convention);
  EXPECT_EQ(row.rfind("matching,\"n=8\",1,", 0), 0u) << row;
  EXPECT_NE(row.find(",0.25,set,false,pass,"), std::string::npos) << row;
  const auto j = json_record(r, r.convention);
  EXPECT_EQ(j["problem"], "matching");
  EXPECT_EQ(j["verdict"], "pass");
  EXPECT_TRUE(j["mc_tv"].is_null());
  EXPECT_EQ(j["convention"], "set");

  std::ostringstream os;
  {
    RecordWriter w(os, Format::json, std::nullopt);
    w.write(r);
    w.write(r);
  }
  const auto arr = nlohmann::json::parse(os.str());
  ASSERT_TRUE(arr.is_array());
  EXPECT_EQ(arr.size(), 2u);

  std::ostringstream empty;
  { RecordWriter w(empty, Format::json, std::nullopt); }
  EXPECT_TRUE(nlohmann::json::parse(empty.str()).empty());

  std::ostringstream csv;
  { RecordWriter w(csv, Format::csv, Convention::tv); w.write(r); }
  std::istringstream lines(csv.str());
  std::string a, b, c;
  std::getline(lines, a);
  std::getline(lines, b);
  std::getline(lines, c);
  EXPECT_EQ(a, kCsvVersionLine);
  EXPECT_EQ(b, kCsvHeader);
  EXPECT_NE(c.find(",tv,"), std::string::npos);
  EXPECT_THROW(parse_format("xml"), UsageError);
}

TEST(Sweep, DeterministicAcrossRunsAndThreadCounts) {
  for (std::size_t trials : {std::size_t{0}, std::size_t{20000}}) {
    SweepSpec s = matching_sweep(trials);
    std::ostringstream a, b, c;
    run_sweep(s, a, 1);
    run_sweep(s, b, 4);
    run_sweep(s, c, 4);
    EXPECT_EQ(without_timing(a.str()), without_timing(b.str()));
    EXPECT_EQ(without_timing(b.str()), without_timing(c.str()));
  }
  SweepSpec s = matching_sweep(20000);
  s.format = Format::json;
  std::ostringstream a, b;
  run_sweep(s, a, 2);
  run_sweep(s, b, 3);
  EXPECT_EQ(without_timing(a.str()), without_timing(b.str()));
}

TEST(Sweep, SeedChangesMonteCarloOutput) {
  SweepSpec s = matching_sweep(20000);
  std::ostringstream a, b;
  run_sweep(s, a, 2);
  s.seed = 43;
  run_sweep(s, b, 2);
  EXPECT_NE(without_timing(a.str()), without_timing(b.str()));
}

TEST(Sweep, OutcomeCounts) {
  SweepSpec s;
  s.problem = Problem::poisson_binomial;
  for (double p : {0.1, 0.5, 1.0}) {
    Params q;
    q.p = {p};
    s.grid.push_back(q);
  }
  std::ostringstream os;
  const SweepOutcome o = run_sweep(s, os, 2);
  EXPECT_EQ(o.records, 3u);
  EXPECT_EQ(o.failures, 3u);
  EXPECT_FALSE(o.interrupted);
}

TEST(Sweep, ValidatesWholeGridFirst) {
  SweepSpec s = matching_sweep(0);
  Params big;
  big.n = 100000;
  s.grid.push_back(big);
  std::ostringstream os;
  EXPECT_THROW(run_sweep(s, os, 2), CapError);
  EXPECT_TRUE(os.str().empty());
  SweepSpec e;
  EXPECT_THROW(run_sweep(e, os, 1), UsageError);
}

TEST(Sweep, StopFlagFlushesCompletedRecords) {
  SweepSpec s = matching_sweep(0);
  std::atomic<bool> stop{true};
  std::ostringstream os;
  const SweepOutcome o = run_sweep(s, os, 2, &stop);
  EXPECT_TRUE(o.interrupted);
  EXPECT_LT(o.records, s.grid.size());
  EXPECT_EQ(os.str().rfind(kCsvVersionLine, 0), 0u);
}
