#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "stein_poisson/stein_poisson.hpp"
#include "support/brute_force.hpp"

using namespace stein_poisson;

namespace {

void expect_same_law(const Pmf& a, const Pmf& b, double tol, const std::string& what = "") {
  const std::size_t n = std::max(a.mass.size(), b.mass.size());
  for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(a.at(j), b.at(j), tol) << what << " at " << j;
  EXPECT_NEAR(a.tail, b.tail, tol) << what;
}

long long level_count(const std::vector<int>& counts, int l) {
  return std::count(counts.begin(), counts.end(), l);
}

}  // namespace

TEST(PoissonBinomial, Examples) {
  expect_same_law(poisson_binomial_pmf({0.5, 0.5}), Pmf{{0.25, 0.5, 0.25}, 0.0}, 1e-15);
  expect_same_law(poisson_binomial_pmf({1.0, 1.0, 1.0}), point_mass(3), 0.0);
  EXPECT_NEAR(poisson_binomial_pmf({1.0, 0.5, 1.0 / 3, 0.25}).mean(), 25.0 / 12.0, 1e-15);
  EXPECT_THROW(poisson_binomial_pmf({0.5, 1.5}), std::invalid_argument);
  EXPECT_THROW(poisson_binomial_pmf({-0.1}), std::invalid_argument);
}

TEST(PoissonBinomial, AgreesWithEnumeration) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> p(1 + t % 12);
    for (double& x : p) x = u(gen);
    const Pmf a = poisson_binomial_pmf(p);
    expect_same_law(a, brute::poisson_binomial(p), 1e-12);
    EXPECT_NEAR(a.total(), 1.0, 1e-12);
    EXPECT_EQ(a.tail, 0.0);
  }
}

TEST(Matching, PlainExamples) {
  expect_same_law(matching_pmf(MatchingSpec{1, {}}), point_mass(1), 0.0);
  expect_same_law(matching_pmf(MatchingSpec{4, {}}), Pmf{{9 / 24.0, 8 / 24.0, 6 / 24.0, 0.0, 1 / 24.0}, 0.0}, 1e-15);
}

TEST(Matching, PlainAgreesWithEnumeration) {
  for (int n = 1; n <= 8; ++n) expect_same_law(matching_pmf(MatchingSpec{n, {}}), brute::fixed_points(n), 1e-12);
}

TEST(Matching, RencontresExactSumsToOne) {
  for (int n : {1, 5, 30, 120}) {
    const auto law = rencontres_law_exact(n);
    mpq_class s = 0;
    for (const auto& x : law) s += x;
    EXPECT_EQ(s, 1);
  }
}

// P_n(W = m) = P_{n-m}(W = 0) / m!
TEST(Matching, RencontresRecursionInRationals) {
  for (int n = 1; n <= 25; ++n) {
    const auto law = rencontres_law_exact(n);
    for (int m = 0; m <= n; ++m) {
      const auto base = rencontres_law_exact(n - m);
      EXPECT_EQ(law[m], base[0] / mpq_class(factorial(static_cast<unsigned long>(m)))) << n << " " << m;
    }
  }
}

TEST(Matching, LargePlainCase) {
  const Pmf p = matching_pmf(MatchingSpec{500, {}});
  EXPECT_NEAR(p.total(), 1.0, 1e-12);
  EXPECT_NEAR(p.mass[0], std::exp(-1.0), 1e-12);
  EXPECT_THROW(matching_pmf(MatchingSpec{501, {}}), CapError);
}

TEST(Matching, MultisetAgreesWithEnumeration) {
  for (const std::vector<int>& l : std::vector<std::vector<int>>{{2, 2}, {3, 1}, {2, 2, 2}, {3, 3}, {1, 2, 4}, {2, 1, 1, 3}}) {
    const Pmf a = matching_pmf(multiset_spec(l));
    expect_same_law(a, brute::rearrangement_matches(symbol_word(l)), 1e-12);
    double lambda = 0, n = 0;
    for (int x : l) {
      lambda += x * x;
      n += x;
    }
    EXPECT_NEAR(a.mean(), lambda / n, 1e-12);
    EXPECT_NEAR(a.mean(), matching_moments(multiset_spec(l)).lambda, 1e-12);
  }
  EXPECT_NEAR(matching_pmf(multiset_spec({2, 2})).mean(), 2.0, 1e-15);
}

TEST(Matching, MultisetCap) {
  EXPECT_THROW(matching_pmf(multiset_spec({4, 4, 3})), CapError);
  EXPECT_NO_THROW(matching_pmf(multiset_spec({5, 5})));
}

TEST(Matching, SpecValidation) {
  EXPECT_THROW(matching_pmf(MatchingSpec{4, {2, 1}}), std::invalid_argument);
  EXPECT_THROW(matching_pmf(MatchingSpec{0, {}}), std::invalid_argument);
  EXPECT_THROW(multiset_spec({2, 0}), std::invalid_argument);
}

TEST(MatchingMoments, Plain) {
  for (int n : {2, 3, 10, 100}) {
    const auto m = matching_moments(MatchingSpec{n, {}});
    EXPECT_NEAR(m.lambda, 1.0, 1e-12);
    EXPECT_NEAR(m.EW2, 2.0, 1e-12);
    EXPECT_NEAR(m.E2a2, 1.0, 1e-12);
  }
}

TEST(MatchingMoments, CardDeck) {
  EXPECT_NEAR(matching_moments(multiset_spec(std::vector<int>(13, 4))).lambda, 4.0, 1e-12);
}

TEST(MatchingMoments, AgreeWithEnumeration) {
  for (const std::vector<int>& l : std::vector<std::vector<int>>{{2, 2}, {3, 1, 2}, {2, 2, 2}}) {
    const std::vector<int> word = symbol_word(l);
    const int n = static_cast<int>(word.size());
    const std::size_t k = l.size();
    std::vector<int> pos(n);
    std::iota(pos.begin(), pos.end(), 0);
    std::vector<double> EWi(k, 0), EWi2(k, 0);
    std::vector<std::vector<double>> EWijWji(k, std::vector<double>(k, 0));
    double EW2 = 0, cross = 0, total = 0;
    do {
      std::vector<std::vector<int>> flow(k, std::vector<int>(k, 0));
      for (int x = 0; x < n; ++x) ++flow[word[x]][word[pos[x]]];
      int w = 0, diag2 = 0;
      for (std::size_t i = 0; i < k; ++i) {
        w += flow[i][i];
        diag2 += flow[i][i] * flow[i][i];
        EWi[i] += flow[i][i];
        EWi2[i] += flow[i][i] * flow[i][i];
        for (std::size_t j = 0; j < k; ++j)
          if (j != i) EWijWji[i][j] += flow[i][j] * flow[j][i];
      }
      EW2 += w * w;
      cross += w * w - diag2;
      total += 1;
    } while (std::next_permutation(pos.begin(), pos.end()));
    const auto m = matching_moments(multiset_spec(l));
    for (std::size_t i = 0; i < k; ++i) {
      EXPECT_NEAR(m.EWi[i], EWi[i] / total, 1e-12);
      EXPECT_NEAR(m.EWi2[i], EWi2[i] / total, 1e-12);
      for (std::size_t j = 0; j < k; ++j)
        if (j != i) EXPECT_NEAR(m.EWijWji[i][j], EWijWji[i][j] / total, 1e-12);
    }
    EXPECT_NEAR(m.EW2, EW2 / total, 1e-12);
    EXPECT_NEAR(m.cross_term, cross / total, 1e-12);
  }
}

TEST(Occupancy, Examples) {
  expect_same_law(occupancy_pmf({2, 2, OccupancyStatistic::empty}), Pmf{{0.5, 0.5, 0.0}, 0.0}, 1e-15);
  EXPECT_NEAR(occupancy_pmf({2, 2, OccupancyStatistic::pairs}).at(1), 0.5, 1e-15);
  for (int n : {1, 3, 50})
    for (int k : {0, 1, 2}) expect_same_law(occupancy_pmf({n, k, OccupancyStatistic::triples}), point_mass(0), 1e-15);
}

TEST(Occupancy, AgreesWithEnumeration) {
  struct Case {
    int n, k;
  };
  for (const Case c : {Case{2, 2}, Case{3, 3}, Case{4, 6}, Case{5, 7}, Case{6, 5}, Case{3, 10}, Case{10, 5}}) {
    const std::string tag = std::to_string(c.n) + "," + std::to_string(c.k);
    expect_same_law(occupancy_pmf({c.n, c.k, OccupancyStatistic::empty}),
                    brute::placements(c.n, c.k, [](const auto& b) { return level_count(b, 0); }), 1e-12, tag);
    expect_same_law(occupancy_pmf({c.n, c.k, OccupancyStatistic::pairs}),
                    brute::placements(c.n, c.k,
                                      [](const auto& b) { return (long long)std::count_if(b.begin(), b.end(), [](int x) { return x >= 2; }); }),
                    1e-12, tag);
    expect_same_law(occupancy_pmf({c.n, c.k, OccupancyStatistic::triples}), brute::placements(c.n, c.k, [](const auto& b) {
                      long long s = 0;
                      for (int x : b) s += brute::choose_ll(x, 3);
                      return s;
                    }), 1e-12, tag);
    expect_same_law(occupancy_pmf({c.n, c.k, OccupancyStatistic::pair_count}), brute::placements(c.n, c.k, [](const auto& b) {
                      long long s = 0;
                      for (int x : b) s += brute::choose_ll(x, 2);
                      return s;
                    }), 1e-12, tag);
    for (int level = 0; level <= 3; ++level)
      expect_same_law(occupancy_pmf({c.n, c.k, OccupancyStatistic::exact_level, level}),
                      brute::placements(c.n, c.k, [&](const auto& b) { return level_count(b, level); }), 1e-12, tag);
  }
}

TEST(Occupancy, EmptyClosedFormMatchesDp) {
  for (int n : {5, 20, 60})
    for (int k : {0, 3, 40, 150})
      expect_same_law(occupancy_pmf({n, k, OccupancyStatistic::empty}), occupancy_pmf_dp({n, k, OccupancyStatistic::empty}),
                      1e-12);
}

TEST(Occupancy, EmptyFloatPathMatchesRationalPath) {
  for (int n : {100, 300})
    for (double theta : {-1.0, 0.0, 1.0}) {
      const int k = coupon_balls_for_theta(n, theta);
      const Pmf a = empty_boxes_law_float(n, k);
      const auto exact = to_double(empty_boxes_law_exact(n, k));
      const Pmf b{exact, 0.0};
      expect_same_law(Pmf{a.mass, 0.0}, b, 1e-13);
      EXPECT_LE(a.tail, 1e-13);
    }
}

TEST(Occupancy, EmptyLargeCaseIsNormalized) {
  const Pmf p = occupancy_pmf({10000, coupon_balls_for_theta(10000, 0.5), OccupancyStatistic::empty});
  EXPECT_NEAR(p.total(), 1.0, 1e-12);
  EXPECT_NEAR(p.mean(), 10000.0 * std::exp(coupon_balls_for_theta(10000, 0.5) * std::log1p(-1e-4)), 1e-9);
}

TEST(Occupancy, MeansAndCaps) {
  for (int n : {3, 17, 90})
    for (int k : {1, 10, 200}) {
      const double e = n * std::pow(1.0 - 1.0 / n, k);
      EXPECT_NEAR(occupancy_pmf({n, k, OccupancyStatistic::empty}).mean(), e, 1e-12 * std::max(1.0, e));
    }
  EXPECT_THROW(occupancy_pmf({2000, 800, OccupancyStatistic::triples}), CapError);
  EXPECT_THROW(occupancy_pmf({0, 3, OccupancyStatistic::pairs}), std::invalid_argument);
}

TEST(OccupancyMoments, Examples) {
  const auto m = occupancy_moments({2, 2, OccupancyStatistic::empty});
  EXPECT_NEAR(m.EMl[1], 1.0, 1e-15);
  for (int n : {5, 40})
    for (int k : {3, 12})
      EXPECT_NEAR(occupancy_moments({n, k, OccupancyStatistic::triples}).EW, choose(k, 3) / (double(n) * n), 1e-15);
  EXPECT_NEAR(occupancy_moments({7, 9, OccupancyStatistic::empty}).EW, 7 * std::pow(6.0 / 7.0, 9), 1e-12);
}

TEST(OccupancyMoments, AgreeWithEnumeration) {
  struct Case {
    int n, k;
  };
  for (const Case c : {Case{3, 3}, Case{4, 5}, Case{5, 4}}) {
    const auto m = occupancy_moments({c.n, c.k, OccupancyStatistic::empty});
    for (int l = 0; l <= c.k; ++l) {
      const Pmf law = brute::placements(c.n, c.k, [&](const auto& b) { return level_count(b, l); });
      EXPECT_NEAR(m.EMl[l], law.mean(), 1e-12) << c.n << "," << c.k << " l=" << l;
      EXPECT_NEAR(m.EMl2[l], law.variance() + law.mean() * law.mean(), 1e-12) << c.n << "," << c.k << " l=" << l;
    }
  }
}

TEST(Coloring, Examples) {
  const Pmf p = coloring_pmf({2, 2, 2});
  EXPECT_NEAR(p.at(0), 0.5, 1e-15);
  EXPECT_NEAR(p.at(1), 0.5, 1e-15);
  expect_same_law(coloring_pmf({7, 3, 1}), point_mass(35), 0.0);
}

TEST(Coloring, AgreesWithEnumerationAndMean) {
  struct Case {
    int n, k, c;
  };
  for (const Case c : {Case{4, 2, 3}, Case{6, 2, 3}, Case{6, 3, 2}, Case{5, 2, 5}, Case{8, 3, 3}}) {
    const Pmf a = coloring_pmf({c.n, c.k, c.c});
    expect_same_law(a, brute::monochromatic(c.n, c.k, c.c), 1e-12);
    EXPECT_NEAR(a.mean(), coloring_lambda({c.n, c.k, c.c}), 1e-12 * std::max(1.0, a.mean()));
  }
}

TEST(Coupon, DiagnosticsAgreeWithEnumeration) {
  for (const auto [n, k] : {std::pair{3, 2}, std::pair{4, 5}, std::pair{5, 3}}) {
    const auto d = coupon_collector_diagnostics(n, k);
    std::vector<int> ball(k, 0);
    double total = 0, ew = 0, en1w = 0, p = 0, rho = 0, n1 = 0, n1sq = 0;
    while (true) {
      std::vector<int> counts(n, 0);
      for (int b : ball) ++counts[b];
      const double w = level_count(counts, 0), s = level_count(counts, 1);
      ew += w;
      en1w += w * s;
      p += counts[0] == 1;
      rho += counts[0] == 1 && counts[1] == 1;
      n1 += s;
      n1sq += s * s;
      total += 1;
      int i = 0;
      while (i < k && ++ball[i] == n) ball[i++] = 0;
      if (i == k) break;
    }
    EXPECT_NEAR(d.EW, ew / total, 1e-12);
    EXPECT_NEAR(d.EN1W, en1w / total, 1e-12);
    EXPECT_NEAR(d.p, p / total, 1e-12);
    EXPECT_NEAR(d.rho, rho / total, 1e-12);
    EXPECT_NEAR(d.varN1_exact, n1sq / total - (n1 / total) * (n1 / total), 1e-12);
  }
}

TEST(Coupon, NoBalls) {
  const auto d = coupon_collector_diagnostics(10, 0);
  EXPECT_EQ(d.EW, 10.0);
  EXPECT_EQ(d.varN1_exact, 0.0);
}

TEST(Coupon, VarianceBelowDisplayedBound) {
  for (int n = 50; n <= 500; n += 50)
    for (double theta : {-1.0, 0.0, 1.0}) {
      const auto d = coupon_collector_diagnostics(n, coupon_balls_for_theta(n, theta));
      EXPECT_LE(d.varN1_exact, d.varN1_upper) << n << " " << theta;
    }
}

TEST(Coupon, ThetaRoundTrip) {
  EXPECT_EQ(coupon_balls_for_theta(100, 0.0), 461);
  EXPECT_NEAR(coupon_theta(100, 461), (461 - 100 * std::log(100.0)) / 100, 1e-15);
}
