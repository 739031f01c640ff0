#include "doctest.h"
#include "nmlab/blindspot.hpp"
#include "nmlab/forge.hpp"
#include "support.hpp"

#include <bit>

using namespace nmlab;
using namespace testing;

namespace {

DeepReluParams saturated_d1_model() {
  const Dataset d = builtin(BuiltinDataset::D1);
  return saturate_layer(random_deep_relu(1, {3, 1}, 7), d, 1);
}

bool bitwise_equal(const MatrixXd& a, const MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Index i = 0; i < a.size(); ++i)
    if (std::bit_cast<std::uint64_t>(a.data()[i]) != std::bit_cast<std::uint64_t>(b.data()[i])) return false;
  return true;
}

}  // namespace

TEST_CASE("saturation detection") {
  const Dataset d = builtin(BuiltinDataset::D1);
  const DeepReluParams raw = random_deep_relu(1, {3, 3, 1}, 5);
  CHECK(raw.layers.size() == 3);
  CHECK(raw.flat_size() == 6 + 12 + 4);
  CHECK(raw.flatten().cwiseAbs().maxCoeff() <= 1.0);

  const DeepReluParams s1 = saturate_layer(raw, d, 1);
  CHECK(detect_saturation(s1, d) == std::vector<int>{1});
  const MatrixXd z1 = pre_activations(s1, d)[0];
  CHECK((z1.array() < 0).all());
  const DeepReluParams s2 = saturate_layer(raw, d, 2);
  const auto found = detect_saturation(s2, d);
  CHECK(std::find(found.begin(), found.end(), 2) != found.end());
  CHECK_THROWS_AS(saturate_layer(raw, d, 3), InvalidInput);
  CHECK_THROWS_AS(saturate_layer(raw, d, 0), InvalidInput);
}

TEST_CASE("output gradient") {
  std::mt19937_64 rng(3);
  const DeepReluParams p = random_deep_relu(2, {4, 3, 1}, 12);
  for (int t = 0; t < 20; ++t) {
    const VectorXd x = uniform_vector(rng, 2, -2, 2);
    const VectorXd fd = central_difference([&](const VectorXd& f) { return forward(p.with_flat(f), x); },
                                           p.flatten(), 1e-7);
    CHECK(rel_error(output_gradient(p, x), fd) < 1e-6);
  }
}

TEST_CASE("saturated model trains only its output bias") {
  const Dataset d = builtin(BuiltinDataset::D1);
  const DeepReluParams p = saturated_d1_model();
  const TrainingProbe probe = saturated_training_probe(p, d, 2000);
  CHECK(probe.saturated_layers == std::vector<int>{1});
  CHECK(probe.frozen_bitwise);
  CHECK(probe.constant_output);
  CHECK(probe.label_mean == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(probe.mean_gap < 1e-6);
  CHECK(probe.final_loss == doctest::Approx(21.2).epsilon(1e-9));
  CHECK(bitwise_equal(probe.trained.layers[0].w, p.layers[0].w));
  CHECK(bitwise_equal(probe.trained.layers[0].b, p.layers[0].b));

  CHECK_THROWS_AS(saturated_training_probe(random_deep_relu(1, {3, 1}, 7), builtin(BuiltinDataset::D2), 10),
                  InvalidInput);
}

TEST_CASE("adam also leaves the blind layer untouched") {
  const Dataset d = builtin(BuiltinDataset::D1);
  const DeepReluParams p = saturated_d1_model();
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::Adam;
  cfg.learning_rate = 1e-2;
  const TrainingProbe probe = saturated_training_probe(p, d, 500, cfg);
  CHECK(probe.frozen_bitwise);
  CHECK(probe.constant_output);
}

TEST_CASE("constant inputs converge to the label mean") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(5, 1, 0.7);
  Eigen::VectorXd y(5);
  y << 2, 1, 0, -3, 3;
  const Dataset d = make_dataset(Task::Regression, x, y);
  const TrainingProbe probe = constant_input_probe(random_deep_relu(1, {3, 3, 1}, 11), d, 5000);
  CHECK(probe.mean_gap < 1e-6);
  CHECK(probe.label_mean == doctest::Approx(0.6).epsilon(1e-15));
  CHECK_THROWS_AS(constant_input_probe(random_deep_relu(1, {3, 1}, 1), builtin(BuiltinDataset::D1), 5),
                  InvalidInput);
}

TEST_CASE("separating vectors") {
  const Dataset d1 = builtin(BuiltinDataset::D1);
  const SeparatingVector s = find_separating_vector(d1, 0);
  CHECK(s.margin > 2.0);
  CHECK(s.gamma == doctest::Approx(s.v[0] * 5.0));
  for (Index i = 1; i < d1.size(); ++i) CHECK(std::abs(s.v.dot(d1.x.row(i).transpose()) - s.gamma) > 2.0);

  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    const Dataset d = random_regression(rng, 12, 3);
    const SeparatingVector v = find_separating_vector(d, 4, static_cast<std::uint64_t>(t));
    CHECK(v.margin > 2.0);
    for (Index i = 0; i < d.size(); ++i)
      if (i != 4) CHECK(std::abs(v.v.dot(d.x.row(i).transpose() - d.x.row(4).transpose())) > 2.0);
  }

  const Dataset same = make_dataset(Task::Regression, Eigen::MatrixXd::Ones(3, 2), Eigen::VectorXd::Zero(3));
  CHECK(std::isinf(find_separating_vector(same, 1).margin));
}

TEST_CASE("construction on D1") {
  const Dataset d = builtin(BuiltinDataset::D1);
  const DeepReluParams better = construct_better(d, {3});
  // 2 on the witness x = 5, the mean 0.25 of the other labels elsewhere
  CHECK(forward(better, Eigen::VectorXd::Constant(1, 5.0)) == doctest::Approx(2.0).epsilon(1e-12));
  for (double x : {4.0, 3.0, 1.0, -1.0})
    CHECK(forward(better, Eigen::VectorXd::Constant(1, x)) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(deep_relu_loss(better, d) == doctest::Approx(18.75).epsilon(1e-12));
  CHECK(deep_relu_loss(better, d) < 21.2);

  SUBCASE("deeper stacks give the same outputs") {
    const DeepReluParams deep = construct_better(d, {4, 3, 5});
    CHECK(deep.layers.size() == 4);
    for (Index i = 0; i < d.size(); ++i) {
      const VectorXd x = d.x.row(i).transpose();
      CHECK(forward(deep, x) == doctest::Approx(forward(better, x)).epsilon(1e-12));
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(construct_better(d, {2}), ArchitectureError);
    Eigen::MatrixXd x(3, 1);
    x << 1, 2, 3;
    CHECK_THROWS_AS(construct_better(make_dataset(Task::Regression, x, Eigen::VectorXd::Ones(3)), {3}), NotDecent);
  }
}

TEST_CASE("construction beats the constant on random decent datasets") {
  std::mt19937_64 rng(19);
  for (int t = 0; t < 30; ++t) {
    const Index dim = 1 + static_cast<Index>(rng() % 3);
    const Dataset d = random_regression(rng, 8, dim);
    const DeepReluParams p = construct_better(d, {3, 4}, static_cast<std::uint64_t>(t));
    const double mean_loss = (d.y.array() - mean_label(d)).square().sum();
    CHECK(deep_relu_loss(p, d) < mean_loss);
  }
}

TEST_CASE("blind spot report") {
  const Dataset d = builtin(BuiltinDataset::D1);
  const TrainingProbe probe = saturated_training_probe(saturated_d1_model(), d, 2000);
  const BlindSpotReport r = analyze_blind_spot(probe.trained, d);
  CHECK(r.saturated_layers == std::vector<int>{1});
  CHECK(r.is_decent);
  CHECK(r.witness_r == Index{0});
  CHECK(r.loss_at_theta == doctest::Approx(21.2).epsilon(1e-9));
  REQUIRE(r.loss_at_constructed.has_value());
  CHECK(*r.loss_at_constructed == doctest::Approx(18.75).epsilon(1e-12));
  CHECK(r.mu == doctest::Approx(0.25));
  CHECK(r.nu == 2.0);

  SUBCASE("the trained blind spot is probe stable") {
    const EscapeProbe e = escape_probe(probe.trained, d, LossKind::Mse, 1000, 1e-4, 3);
    CHECK(e.descending_directions == 0);
  }
}
