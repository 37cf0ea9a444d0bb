#include "doctest.h"

#include "support/oracles.hpp"
#include "support/published_tables.hpp"

#include "hatelab/significance.hpp"

#include <cmath>
#include <random>

using namespace hatelab;
using testing::CountRows;

namespace {

SystemFolds system(const std::string& id, const std::vector<CountRows>& folds) {
  SystemFolds s{id, {}};
  for (const auto& f : folds) s.folds.push_back(ConfusionMatrix::from_rows(f));
  return s;
}

bool multiple_of_tenth(double p) { return std::abs(p * 10 - std::round(p * 10)) < 1e-12; }

}  // namespace

TEST_SUITE("significance") {
  TEST_CASE("winner") {
    const std::vector<ConfusionMatrix> diag{ConfusionMatrix::from_rows({{5, 0}, {0, 5}})};
    const std::vector<ConfusionMatrix> anti{ConfusionMatrix::from_rows({{0, 5}, {5, 0}})};
    CHECK(winner(diag, anti) == Winner::kA);
    CHECK(winner(anti, diag) == Winner::kB);
    CHECK(winner(diag, diag) == Winner::kA);

    CountRows moved = testing::kD1Matrix;
    moved[0][0] -= 200;
    moved[0][2] += 200;
    CHECK(testing::oracle_weighted_f1(testing::kD1Matrix) > testing::oracle_weighted_f1(moved));
    const std::vector<ConfusionMatrix> a{ConfusionMatrix::from_rows(testing::kD1Matrix)};
    const std::vector<ConfusionMatrix> b{ConfusionMatrix::from_rows(moved)};
    CHECK(winner(a, b) == Winner::kA);
  }

  TEST_CASE("constructed case gives p = 0.2") {
    std::vector<CountRows> a, b;
    testing::p_point_two_construction(a, b);
    REQUIRE(testing::oracle_bootstrap_p(a, b, 3) == doctest::Approx(0.2));
    const auto r = bootstrap_compare(system("a", a), system("b", b), 3);
    CHECK(r.subset_count == 10);
    CHECK(r.disagreements == 2);
    CHECK(r.p_value == doctest::Approx(0.2));
    CHECK(r.full_winner == Winner::kA);
    CHECK(bootstrap_compare(system("b", b), system("a", a), 3).p_value == doctest::Approx(0.2));
  }

  TEST_CASE("dominance, identity and mismatched folds") {
    std::vector<CountRows> good(5, CountRows{{9, 1}, {1, 9}}), bad(5, CountRows{{6, 4}, {4, 6}});
    CHECK(bootstrap_compare(system("g", good), system("b", bad)).p_value == 0.0);
    CHECK(bootstrap_compare(system("g", good), system("g2", good)).p_value == 0.0);
    CHECK_THROWS(bootstrap_compare(system("g", good), system("b", {bad[0], bad[1]})));
    CHECK_THROWS(bootstrap_compare(system("g", good), system("b", bad), 6));
  }

  TEST_CASE("random systems: p on the 1/10 grid and equal to the oracle") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 300; ++trial) {
      std::vector<CountRows> a, b;
      for (int f = 0; f < 5; ++f) {
        CountRows x(3, std::vector<std::int64_t>(3)), y = x;
        for (int g = 0; g < 3; ++g)
          for (int p = 0; p < 3; ++p) {
            x[g][p] = static_cast<std::int64_t>(rng() % (g == p ? 60 : 20));
            y[g][p] = static_cast<std::int64_t>(rng() % (g == p ? 60 : 20));
          }
        x[0][0] += 1;
        y[0][0] += 1;
        a.push_back(x);
        b.push_back(y);
      }
      const auto r = bootstrap_compare(system("a", a), system("b", b));
      CHECK(multiple_of_tenth(r.p_value));
      CHECK(r.p_value == doctest::Approx(testing::oracle_bootstrap_p(a, b, 3)));
      CHECK(bootstrap_compare(system("b", b), system("a", a)).p_value == doctest::Approx(r.p_value));
    }
  }

  TEST_CASE("report json reading and comparison json") {
    const nlohmann::json report{{"system", "x"},
                                {"folds", {{{"confusion", {{1, 0}, {0, 1}}}}, {{"confusion", {{2, 0}, {1, 1}}}}}}};
    const auto s = system_folds_from_report(report);
    CHECK(s.id == "x");
    REQUIRE(s.folds.size() == 2);
    CHECK(s.folds[1].at(1, 0) == 1);
    CHECK_THROWS(system_folds_from_report(nlohmann::json{{"system", "x"}}));

    const auto r = bootstrap_compare(s, s, 1);
    const auto j = comparison_to_json(r, s, s);
    CHECK(j["p_value"] == 0.0);
    CHECK(j["subset_count"] == 2);
    CHECK(j["full_winner"] == "x");
  }
}
