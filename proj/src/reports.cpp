#include "nmlab/reports.hpp"

#include "nmlab/weights_io.hpp"

namespace nmlab {

using Eigen::Index;
using json = nlohmann::json;

namespace {

json array(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

json to_json(const Dataset& d) { return json::parse(dataset_to_json(d)); }

json to_json(const AnyParams& p) { return json::parse(weights_to_json(p)); }

json to_json(const Certificate& c) {
  return {{"grad_inf_norm", c.grad_inf_norm},
          {"eigenvalues", array(c.eigenvalues)},
          {"classification", to_string(c.classification)},
          {"tol_grad", c.tol_grad},
          {"tol_eig", c.tol_eig},
          {"loss_at_point", c.loss_at_point}};
}

json to_json(const ReluProof& proof) {
  json boundary = json::array();
  for (const auto& b : proof.boundary) boundary.push_back({{"point", b.point}, {"unit", b.unit}});
  json cases = json::array();
  for (const auto& c : proof.cases) {
    json active = json::array();
    for (bool a : c.active) active.push_back(a);
    cases.push_back({{"active", std::move(active)},
                     {"constant", c.constant},
                     {"linear", array(c.linear)},
                     {"min_eigenvalue", c.min_eigenvalue},
                     {"psd", c.psd},
                     {"linear_vanishes", c.linear_vanishes},
                     {"certified", c.certified()}});
  }
  return {{"loss", proof.loss},
          {"certified", proof.certified},
          {"boundary", std::move(boundary)},
          {"cases", std::move(cases)}};
}

json to_json(const EscapeProbe& probe) {
  return {{"radius", probe.radius},
          {"base_loss", probe.base_loss},
          {"directions", probe.directions},
          {"descending_directions", probe.descending_directions},
          {"coordinate_probes", probe.coordinate_probes},
          {"descending_coordinates", probe.descending_coordinates},
          {"min_delta", probe.min_delta}};
}

json to_json(const ForgeResult& r) {
  json trace = json::array();
  for (double f : r.objective_trace) trace.push_back(f);
  return {{"dataset", to_json(r.dataset)},
          {"objective_trace", std::move(trace)},
          {"final_gradnorm", r.final_gradnorm},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"stalled", r.stalled},
          {"certificate", to_json(r.certificate)}};
}

json to_json(const TrainingProbe& probe) {
  return {{"saturated_layers", probe.saturated_layers},
          {"steps", probe.steps},
          {"frozen_bitwise", probe.frozen_bitwise},
          {"constant_output", probe.constant_output},
          {"output", probe.output},
          {"label_mean", probe.label_mean},
          {"mean_gap", probe.mean_gap},
          {"final_loss", probe.final_loss}};
}

json to_json(const BlindSpotReport& r) {
  json out = {{"saturated_layers", r.saturated_layers},
              {"is_decent", r.is_decent},
              {"witness_r", r.witness_r ? json(*r.witness_r) : json(nullptr)},
              {"loss_at_theta", r.loss_at_theta},
              {"loss_at_constructed", r.loss_at_constructed ? json(*r.loss_at_constructed) : json(nullptr)},
              {"constructed", r.constructed ? to_json(AnyParams(*r.constructed)) : json(nullptr)}};
  if (r.loss_at_constructed) {
    out["mu"] = r.mu;
    out["nu"] = r.nu;
  }
  return out;
}

json table_sidecar(const ConvergenceTable& t) {
  const TableConfig& c = t.config;
  json datasets = json::array(), activations = json::array(), optimizers = json::array();
  for (auto d : c.datasets) datasets.push_back(builtin_name(d));
  for (auto a : c.activations) activations.push_back(to_string(a));
  for (auto o : c.optimizers) optimizers.push_back(to_string(o));
  return {{"h_min", c.h_min},
          {"h_max", c.h_max},
          {"trials", c.trials},
          {"base_seed", c.base_seed},
          {"datasets", std::move(datasets)},
          {"activations", std::move(activations)},
          {"optimizers", std::move(optimizers)},
          {"init", "uniform(-1, 1) per parameter, SplitMix64(derive_seed(base_seed, cell_index, trial))"},
          {"loss", "mean negative log-likelihood"},
          {"success", "zero training error, checked before every update"},
          {"gd", {{"lr_sigmoid", c.gd_lr_sigmoid}, {"lr_relu", c.gd_lr_relu}, {"max_steps", c.gd_max_steps}}},
          {"adam",
           {{"lr", c.adam_lr},
            {"beta1", c.adam_beta1},
            {"beta2", c.adam_beta2},
            {"eps", c.adam_eps},
            {"max_steps", c.adam_max_steps}}},
          {"sgd", {{"lr", c.sgd_lr}, {"max_epochs", c.sgd_max_epochs}}},
          {"cells", t.cells.size()}};
}

}  // namespace nmlab
