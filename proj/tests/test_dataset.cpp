#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "survadj/dataset.hpp"
#include "survadj/errors.hpp"

using namespace survadj;
using testutil::make_data;

TEST_CASE("validate_dataset accepts a well-formed dataset") {
  auto d = make_data({1.0, 2.0, 3.0}, {1, 0, 1}, {0, 1, 0}, {{"x", {0.1, -0.2, 0.3}}});
  CHECK_NOTHROW(validate_dataset(d));
}

TEST_CASE("validation names the offending row (1-based) per violation") {
  auto d = make_data({1.0, -2.0, 3.0}, {1, 0, 1}, {0, 1, 0});
  try {
    validate_dataset(d);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ErrorCode::NonPositiveTime);
    REQUIRE(e.violations().size() == 1);
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
}

TEST_CASE("each value-level violation is detected") {
  SUBCASE("non-positive time") {
    auto d = make_data({0.0, 2.0}, {1, 1}, {0, 1});
    CHECK_THROWS_AS(validate_dataset(d), ValidationError);
  }
  SUBCASE("non-finite time") {
    auto d = make_data({1.0, 2.0}, {1, 1}, {0, 1});
    d.time[0] = std::nan("");
    CHECK_THROWS_AS(validate_dataset(d), ValidationError);
  }
  SUBCASE("non-binary status") {
    auto d = make_data({1.0, 2.0}, {2, 1}, {0, 1});
    try {
      validate_dataset(d);
      FAIL("expected throw");
    } catch (const ValidationError& e) {
      CHECK(e.code() == ErrorCode::NonBinaryStatus);
    }
  }
  SUBCASE("non-binary group") {
    auto d = make_data({1.0, 2.0}, {1, 1}, {0, 3});
    try {
      validate_dataset(d);
      FAIL("expected throw");
    } catch (const ValidationError& e) {
      CHECK(e.code() == ErrorCode::NonBinaryGroup);
    }
  }
  SUBCASE("non-finite covariate") {
    auto d = make_data({1.0, 2.0}, {1, 1}, {0, 1}, {{"x", {1.0, 2.0}}});
    d.covariates(1, 0) = std::numeric_limits<double>::infinity();
    try {
      validate_dataset(d);
      FAIL("expected throw");
    } catch (const ValidationError& e) {
      CHECK(e.code() == ErrorCode::NonFiniteCovariate);
      CHECK(std::string(e.what()).find("x") != std::string::npos);
    }
  }
  SUBCASE("single-group data") {
    auto d = make_data({1.0, 2.0}, {1, 1}, {1, 1});
    try {
      validate_dataset(d);
      FAIL("expected throw");
    } catch (const ValidationError& e) {
      CHECK(e.code() == ErrorCode::EmptyGroup);
    }
  }
}

TEST_CASE("multiple violations are reported together, first determines the code") {
  auto d = make_data({-1.0, 2.0, 3.0, 4.0}, {1, 2, 1, 1}, {0, 1, 0, 1}, {{"x", {0., 1., 2., 3.}}});
  d.covariates(3, 0) = std::nan("");
  try {
    validate_dataset(d);
    FAIL("expected throw");
  } catch (const ValidationError& e) {
    CHECK(e.violations().size() == 3);
    CHECK(e.code() == ErrorCode::NonPositiveTime);
  }
}

TEST_CASE("violation report is capped") {
  SurvivalDataset d;
  const Eigen::Index n = 60;
  d.time = Eigen::VectorXd::Constant(n, -1.0);  // every row violates
  d.status = Eigen::VectorXi::Ones(n);
  d.group = Eigen::VectorXi::Zero(n);
  for (Eigen::Index i = 0; i < n / 2; ++i) d.group[i] = 1;
  d.covariates.resize(n, 0);
  try {
    validate_dataset(d);
    FAIL("expected throw");
  } catch (const ValidationError& e) {
    CHECK(e.violations().size() <= 20);
  }
}

TEST_CASE("dimension mismatches are rejected outright") {
  SurvivalDataset d;
  d.time = testutil::vec({1.0, 2.0, 3.0});
  d.status = testutil::ivec({1, 1});
  d.group = testutil::ivec({0, 1, 0});
  d.covariates.resize(3, 0);
  CHECK_THROWS_AS(validate_dataset(d), SurvError);
}

TEST_CASE("covariate name bookkeeping must match the matrix") {
  auto d = make_data({1.0, 2.0}, {1, 1}, {0, 1}, {{"x", {1.0, 2.0}}});
  d.covariate_names.push_back("ghost");
  CHECK_THROWS_AS(validate_dataset(d), SurvError);
}

TEST_CASE("covariate_index resolves names and rejects unknowns") {
  auto d = make_data({1.0, 2.0}, {1, 1}, {0, 1}, {{"age", {50.0, 60.0}}, {"sex", {0.0, 1.0}}});
  CHECK(covariate_index(d, "age") == 0);
  CHECK(covariate_index(d, "sex") == 1);
  try {
    covariate_index(d, "bmi");
    FAIL("expected throw");
  } catch (const SurvError& e) {
    CHECK(e.code() == ErrorCode::MissingCovariateSet);
    CHECK(std::string(e.what()).find("bmi") != std::string::npos);
  }
  auto idx = covariate_indices(d, {"sex", "age"});
  REQUIRE(idx.size() == 2);
  CHECK(idx[0] == 1);
  CHECK(idx[1] == 0);
}

TEST_CASE("group_rows and select_rows extract consistent subsets") {
  auto d = make_data({1.0, 2.0, 3.0, 4.0}, {1, 0, 1, 0}, {0, 1, 1, 0}, {{"x", {10., 20., 30., 40.}}});
  auto rows = group_rows(d, 1);
  REQUIRE(rows.size() == 2);
  auto sub = select_rows(d, rows);
  CHECK(sub.n() == 2);
  CHECK(sub.time[0] == 2.0);
  CHECK(sub.time[1] == 3.0);
  CHECK(sub.covariates(0, 0) == 20.0);
  CHECK(sub.covariates(1, 0) == 30.0);
  CHECK(sub.covariate_names == d.covariate_names);
  CHECK((sub.group.array() == 1).all());
}

TEST_CASE("canonical_order is invariant to row permutations") {
  Rng rng(23);
  auto d = testutil::random_data(rng, 40, 3);
  auto base = select_rows(d, canonical_order(d));
  // A permuted copy canonicalizes to the same row order.
  std::vector<Eigen::Index> perm(40);
  for (Eigen::Index i = 0; i < 40; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (Eigen::Index i = 39; i > 0; --i)
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(static_cast<Eigen::Index>(rng.uniform() * (i + 1)))]);
  auto shuffled = select_rows(d, perm);
  auto again = select_rows(shuffled, canonical_order(shuffled));
  CHECK(again.time == base.time);
  CHECK(again.status == base.status);
  CHECK(again.group == base.group);
  CHECK(again.covariates == base.covariates);
}

TEST_CASE("canonical_order sorts by time with deterministic tie-breaks") {
  auto d = make_data({2.0, 1.0, 2.0, 2.0}, {1, 1, 0, 1}, {1, 0, 0, 0}, {{"x", {5., 1., 2., 3.}}});
  auto ord = canonical_order(d);
  auto s = select_rows(d, ord);
  CHECK(s.time[0] == 1.0);
  // Among the three time-2 rows: status 0 before 1, then group, then covariate.
  CHECK(s.status[1] == 0);
  CHECK(s.group[2] == 0);
  CHECK(s.covariates(2, 0) == 3.0);
  CHECK(s.group[3] == 1);
}
