#include "doctest.h"
#include "nmlab/constants.hpp"
#include "nmlab/forge.hpp"
#include "support.hpp"

using namespace nmlab;
using namespace testing;
namespace k = nmlab::constants;

namespace {

const Sigmoid221Params& hat_w() {
  static const Sigmoid221Params p = k::sigmoid221_from_printed(k::kHatW);
  return p;
}

}  // namespace

TEST_CASE("gradient norm objective") {
  const Dataset d = builtin(BuiltinDataset::Sigmoid10);
  CHECK(grad_norm_objective(hat_w(), d, LossKind::Nll) < 1e-10);
  // frozen: 2.55e-10 (squared gradient norm at the lower-loss point)
  CHECK(grad_norm_objective(k::sigmoid221_from_printed(k::kW0), d, LossKind::Nll) ==
        doctest::Approx(2.55e-10).epsilon(0.01));
  const VectorXd g = gradient(hat_w(), d, LossKind::Nll);
  CHECK(grad_norm_objective(hat_w(), d, LossKind::Nll) == doctest::Approx(g.squaredNorm()).epsilon(1e-14));
}

TEST_CASE("data gradient against a one-sided difference") {
  std::mt19937_64 rng(31);
  const Dataset d = perturb_inputs(builtin(BuiltinDataset::Sigmoid10), 0.5, 4);
  const MatrixXd g = objective_data_gradient(hat_w(), d, LossKind::Nll, 1e-6);
  CHECK(g.rows() == 10);
  CHECK(g.cols() == 2);
  const double f0 = grad_norm_objective(hat_w(), d, LossKind::Nll);
  for (int t = 0; t < 5; ++t) {
    const Index i = static_cast<Index>(rng() % 10), j = static_cast<Index>(rng() % 2);
    Dataset q = d;
    q.x(i, j) += 1e-7;
    const double fwd = (grad_norm_objective(hat_w(), q, LossKind::Nll) - f0) / 1e-7;
    CHECK(std::abs(fwd - g(i, j)) <= 1e-3 * std::max(1e-6, std::abs(g(i, j))) + 1e-9);
  }
}

TEST_CASE("forge on an already critical dataset does nothing") {
  const Dataset d = builtin(BuiltinDataset::Sigmoid10);
  ForgeConfig cfg;
  cfg.target_gradnorm = 1e-5;
  const ForgeResult r = forge(hat_w(), d, LossKind::Nll, cfg);
  CHECK(r.iterations == 0);
  CHECK(r.converged);
  CHECK(r.dataset == d);
  CHECK(r.certificate.classification == CriticalKind::LocalMinimum);
}

TEST_CASE("forge from a perturbed start") {
  const Dataset d0 = perturb_inputs(builtin(BuiltinDataset::Sigmoid10), 0.05, 0);
  CHECK_FALSE(d0 == builtin(BuiltinDataset::Sigmoid10));
  CHECK((d0.x - builtin(BuiltinDataset::Sigmoid10).x).cwiseAbs().maxCoeff() <= 0.05);

  const ForgeResult r = forge(hat_w(), d0, LossKind::Nll);
  CHECK(r.converged);
  CHECK(r.final_gradnorm < 1e-8);
  CHECK(r.dataset.y == d0.y);
  CHECK(r.dataset.size() == d0.size());
  for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
    CHECK(r.objective_trace[i] <= r.objective_trace[i - 1]);
  CHECK(gradient(hat_w(), r.dataset, LossKind::Nll).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(r.certificate.classification != CriticalKind::NotCritical);
}

TEST_CASE("forge on a relu network with a dead output layer") {
  // v = 0: the gradient splits into the output part (which the data can zero)
  // and a hidden part that vanishes identically.
  ReluRegParams p = k::relu_reg({1.0, -1.0}, {0.5, 0.25}, {0.0, 0.0}, 0.0);
  Eigen::MatrixXd x(4, 1);
  x << 0.3, -0.7, 1.1, 2.0;
  Eigen::VectorXd y(4);
  y << 0.1, -0.2, 0.05, 0.4;
  const Dataset d = make_dataset(Task::Regression, x, y);
  const VectorXd g = gradient(p, d, LossKind::Mse);
  CHECK(g.segment(0, 4).cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.segment(4, 3).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("escape probe") {
  const Dataset d1 = builtin(BuiltinDataset::D1);
  SUBCASE("zero radius never descends") {
    const EscapeProbe p = escape_probe(k::prop1_lower(), d1, LossKind::Mse, 100, 0.0, 1);
    CHECK(p.descending_directions == 0);
  }
  SUBCASE("a non-critical point descends along half the directions") {
    const EscapeProbe p = escape_probe(k::relu_reg({1.0}, {-2.5}, {1.0}, 0.5), d1, LossKind::Mse, 2000, 1e-4, 2);
    CHECK(p.descending_fraction() > 0.4);
    CHECK(p.descending_fraction() < 0.6);
    CHECK(p.coordinate_probes == 8);
  }
  SUBCASE("deterministic in the seed") {
    const auto a = escape_probe(hat_w(), builtin(BuiltinDataset::Sigmoid10), LossKind::Nll, 50, 1e-2, 9);
    const auto b = escape_probe(hat_w(), builtin(BuiltinDataset::Sigmoid10), LossKind::Nll, 50, 1e-2, 9);
    CHECK(a.min_delta == b.min_delta);
  }
}
