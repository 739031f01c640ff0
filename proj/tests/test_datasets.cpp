#include "doctest.h"
#include "nmlab/datasets.hpp"
#include "nmlab/errors.hpp"
#include "support.hpp"

#include <algorithm>
#include <numeric>

using namespace nmlab;
using namespace testing;

TEST_CASE("builtin datasets") {
  const Dataset s = builtin(BuiltinDataset::Sigmoid10);
  CHECK(s.task == Task::Classification);
  CHECK(s.size() == 10);
  CHECK(s.dim() == 2);
  CHECK(s.y.sum() == 5.0);
  CHECK(s.x(3, 0) == -4.2);

  const Dataset d1 = builtin(BuiltinDataset::D1);
  CHECK(d1.task == Task::Regression);
  CHECK(d1.size() == 5);
  CHECK(d1.dim() == 1);
  CHECK(d1.x(4, 0) == -1.0);
  CHECK(d1.y(4) == 3.0);
  CHECK(builtin(BuiltinDataset::D2).size() == 6);
  CHECK(builtin(BuiltinDataset::D3).y(5) == -6.0);
  CHECK(builtin(BuiltinDataset::Xor).size() == 4);
  CHECK(builtin(BuiltinDataset::FXor).size() == 4);

  for (auto b : {BuiltinDataset::Sigmoid10, BuiltinDataset::D1, BuiltinDataset::D2, BuiltinDataset::D3,
                 BuiltinDataset::Xor, BuiltinDataset::FXor}) {
    CHECK(builtin_from_name(builtin_name(b)) == b);
    CHECK_NOTHROW(validate(builtin(b)));
  }
  CHECK_FALSE(builtin_from_name("nope").has_value());
}

TEST_CASE("xor labels") {
  for (auto b : {BuiltinDataset::Xor, BuiltinDataset::FXor}) {
    const Dataset d = builtin(b);
    CHECK(d.y.sum() == 2.0);
  }
}

TEST_CASE("json round trip is exact") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const Dataset d = (t % 2) ? random_classification(rng, 7) : random_regression(rng, 9, 3);
    CHECK(parse_dataset_json(dataset_to_json(d)) == d);
  }
  const Dataset s = builtin(BuiltinDataset::Sigmoid10);
  CHECK(parse_dataset_json(dataset_to_json(s)) == s);
}

TEST_CASE("validation errors") {
  CHECK_THROWS_AS(parse_dataset_json(R"({"task":"classification","d":1,"points":[{"x":[0],"y":2}]})"),
                  ParseError);
  CHECK_THROWS_AS(parse_dataset_json(R"({"task":"regression","d":2,"points":[{"x":[0,1],"y":1},{"x":[0],"y":1}]})"),
                  ParseError);
  CHECK_THROWS_AS(parse_dataset_json(R"({"task":"regression","d":1,"points":[]})"), ParseError);
  CHECK_THROWS(parse_dataset_json("not json"));
  CHECK_THROWS(parse_dataset_json(R"({"task":"other","d":1,"points":[{"x":[0],"y":1}]})"));
  Eigen::MatrixXd x(1, 1);
  x(0, 0) = std::nan("");
  CHECK_THROWS_AS(make_dataset(Task::Regression, x, Eigen::VectorXd::Zero(1)), InvalidInput);
}

TEST_CASE("decency") {
  SUBCASE("D1 is decent with the first point as witness") {
    const Decency dec = is_decent(builtin(BuiltinDataset::D1));
    CHECK(dec.decent);
    REQUIRE(dec.witness.has_value());
    CHECK(*dec.witness == 0);
    CHECK(dec.group_mean == 2.0);
    CHECK(dec.global_mean == doctest::Approx(0.6).epsilon(1e-15));
  }
  SUBCASE("equal labels are not decent") {
    Eigen::MatrixXd x(3, 1);
    x << 1, 2, 3;
    CHECK_FALSE(is_decent(make_dataset(Task::Regression, x, Eigen::VectorXd::Constant(3, 4.0))).decent);
  }
  SUBCASE("a single repeated input is not decent") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(4, 2, 0.7);
    Eigen::VectorXd y(4);
    y << 1, -2, 5, 0;
    const Decency dec = is_decent(make_dataset(Task::Regression, x, y));
    CHECK_FALSE(dec.decent);
    CHECK_FALSE(dec.witness.has_value());
  }
  SUBCASE("groups with the global mean do not witness") {
    Eigen::MatrixXd x(4, 1);
    x << 1, 1, 2, 2;
    Eigen::VectorXd y(4);
    y << 0, 2, 3, -1;  // both group means equal 1
    CHECK_FALSE(is_decent(make_dataset(Task::Regression, x, y)).decent);
    y << 0, 2, 3, 0;
    const Decency dec = is_decent(make_dataset(Task::Regression, x, y));
    CHECK(dec.decent);
    CHECK(*dec.witness == 0);
  }
  SUBCASE("input groups") {
    Eigen::MatrixXd x(5, 1);
    x << 1, 2, 1, 3, 1;
    const auto g = input_group(make_dataset(Task::Regression, x, Eigen::VectorXd::Zero(5)), 2);
    CHECK(g == std::vector<Eigen::Index>{0, 2, 4});
  }
}

TEST_CASE("label mean") {
  CHECK(mean_label(builtin(BuiltinDataset::D1)) == doctest::Approx(0.6).epsilon(1e-15));

  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    const Dataset d = random_regression(rng, 31, 1);
    std::vector<Eigen::Index> perm(31);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Dataset q = d;
    for (Eigen::Index i = 0; i < 31; ++i) {
      q.x.row(i) = d.x.row(perm[static_cast<std::size_t>(i)]);
      q.y[i] = d.y[perm[static_cast<std::size_t>(i)]];
    }
    CHECK(std::abs(mean_label(q) - mean_label(d)) <= 1e-15 * (1 + std::abs(mean_label(d))));

    // the mean minimizes the squared error among constants
    const double m = mean_label(d);
    const auto sse = [&](double c) { return (d.y.array() - c).square().sum(); };
    CHECK(sse(m) <= sse(m + 1e-3));
    CHECK(sse(m) <= sse(m - 1e-3));
  }
  CHECK(compensated_sum((Eigen::VectorXd(4) << 1e16, 1.0, -1e16, 1.0).finished()) == 2.0);
}
