#include <doctest.h>

#include "attribqa/error.hpp"
#include "attribqa/metrics.hpp"
#include "attribqa/random.hpp"
#include "oracles.hpp"

using namespace attribqa;

TEST_CASE("normalize_answer") {
  CHECK(normalize_answer("The Beatles!") == "beatles");
  CHECK(normalize_answer("jazz") == "jazz");
  CHECK(normalize_answer("  An   Apple ") == "apple");
  CHECK(normalize_answer("theatre") == "theatre");
}

TEST_CASE("exact match") {
  CHECK(exact_match("jazz", {"jazz"}) == 1);
  CHECK(exact_match("the jazz", {"jazz"}) == 1);
  CHECK(exact_match("blues", {"jazz"}) == 0);
  CHECK(exact_match("Benny the Beaver", {"Benny Beaver"}) == 1);
  CHECK_THROWS_AS(exact_match("x", {}), UsageError);
}

TEST_CASE("f1") {
  CHECK(f1_score("benny beaver", {"benny the beaver"}) == doctest::Approx(1.0));
  CHECK(f1_score("a b c", {"a b c"}) == 1.0);
  CHECK(f1_score("x y", {"z w"}) == 0.0);
  CHECK(f1_score("island records", {"records"}) == doctest::Approx(2.0 / 3.0));
  CHECK(f1_score("x x y", {"x y y"}) == doctest::Approx(2.0 / 3.0));
  CHECK(f1_score("", {"the"}) == 1.0);
  CHECK(f1_score("blues", {"jazz", "blues music"}) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("citation scores") {
  auto s = citation_scores({7, 4}, {7, 4});
  CHECK(s.precision == 1.0);
  CHECK(s.recall == 1.0);
  s = citation_scores({7, 4, 2}, {7, 4});
  CHECK(s.precision == doctest::Approx(2.0 / 3.0));
  CHECK(s.recall == 1.0);
  s = citation_scores({}, {1, 2});
  CHECK(s.precision == 0.0);
  CHECK(s.recall == 0.0);
  s = citation_scores({4, 4}, {4, 9});
  CHECK(s.precision == 1.0);
  CHECK(s.recall == 0.5);
  CHECK_THROWS_AS(citation_scores({1}, {}), UsageError);
}

TEST_CASE("aggregate") {
  auto trial = [](double em_mean) {
    std::vector<ScoredPrediction> t;
    const int hits = static_cast<int>(em_mean * 100 + 0.5);
    for (int i = 0; i < 100; ++i) t.push_back(ScoredPrediction{"x" + std::to_string(i), i < hits ? 1 : 0, 0.5});
    return t;
  };
  auto r = aggregate({trial(0.36), trial(0.37), trial(0.38)});
  CHECK(r.mean_em == doctest::Approx(0.37));
  CHECK(r.per_trial.size() == 3);
  CHECK_FALSE(r.mean_citation_precision);
  auto one = aggregate({trial(0.2)});
  CHECK(one.mean_em == doctest::Approx(0.2));
  CHECK_THROWS_AS(aggregate({}), Error);
  CHECK_THROWS_AS(aggregate({trial(0.1), std::vector<ScoredPrediction>(3)}), DataError);
  CHECK(performance_range({0.223, 0.1, 0.15}) == doctest::Approx(0.123));
}

TEST_CASE("correlation basics") {
  CHECK(pearson({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3, 4}, {1, 8, 27, 64}) == doctest::Approx(1.0));
  CHECK(kendall_tau_b({1, 2, 3, 4}, {1, 8, 27, 64}) == doctest::Approx(1.0));
  CHECK(kendall_tau_b({1, 2, 3, 4}, {1, 3, 2, 4}) == doctest::Approx(2.0 / 3.0));
  CHECK(average_ranks({10, 20, 20, 30}) == std::vector<double>{1, 2.5, 2.5, 4});
  CHECK_THROWS_AS(correlation({1, 2}, {1, 2}, CorrelationMethod::pearson), DataError);
  CHECK_THROWS_AS(correlation({1, 1, 1}, {1, 2, 3}, CorrelationMethod::spearman), DataError);
  CHECK_THROWS_AS(correlation({1, 2, 3}, {1, 2}, CorrelationMethod::kendall), DataError);
}

TEST_CASE("kendall and spearman agree with pair enumeration including ties") {
  Rng rng(77);
  int checked = 0;
  while (checked < 300) {
    const std::size_t n = rng.between(3, 30);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.uniform(5));
      y[i] = static_cast<double>(rng.uniform(5));
    }
    double kx = oracle::kendall(x, y);
    if (std::isnan(kx)) continue;
    CHECK(kendall_tau_b(x, y) == doctest::Approx(kx).epsilon(1e-12));
    CHECK(spearman(x, y) == doctest::Approx(oracle::spearman(x, y)).epsilon(1e-12));
    ++checked;
  }
}

TEST_CASE("permutation p-values") {
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(i);
    y.push_back(i * 2 + (i % 3));
  }
  auto strong = correlation(x, y, CorrelationMethod::pearson, {2000, 1});
  CHECK(strong.coefficient > 0.95);
  CHECK(strong.p_value < 0.01);
  CHECK(strong.p_value >= 1.0 / 2001.0);
  auto again = correlation(x, y, CorrelationMethod::pearson, {2000, 1});
  CHECK(again.p_value == strong.p_value);
  std::vector<double> noise{3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7, 9, 3, 2, 3, 8, 4};
  auto weak = correlation(x, noise, CorrelationMethod::kendall, {2000, 1});
  CHECK(weak.p_value > 0.05);
}
