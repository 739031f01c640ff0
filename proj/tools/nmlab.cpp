// nmlab: command-line front end.
//
// Exit codes
//   verify       0 all claims confirmed (possibly with correction), 1 otherwise
//   certify      0 LocalMinimum, 2 Saddle, 3 NotCritical, 4 Degenerate
//   forge        0 converged to LocalMinimum/Degenerate, 2 converged to Saddle,
//                1 not converged (or NotCritical)
//   any command  64 bad input file or schema, 65 point on a ReLU kink,
//                73 output not writable, 70 internal error

#include "nmlab/blindspot.hpp"
#include "nmlab/certify.hpp"
#include "nmlab/constants.hpp"
#include "nmlab/errors.hpp"
#include "nmlab/forge.hpp"
#include "nmlab/optim.hpp"
#include "nmlab/reports.hpp"
#include "nmlab/rng.hpp"
#include "nmlab/verify.hpp"
#include "nmlab/weights_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace nmlab;

namespace {

struct ExitWith {
  int code;
  std::string message;
};

Dataset load_dataset(const std::string& name_or_file) {
  if (auto b = builtin_from_name(name_or_file)) return builtin(*b);
  return load_json(name_or_file);
}

LossKind parse_loss(const std::string& s, const AnyParams& p) {
  if (s.empty()) return natural_loss(p);
  if (s == "nll") return LossKind::Nll;
  if (s == "mse") return LossKind::Mse;
  throw ExitWith{64, "unknown loss \"" + s + "\""};
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text) || !out.flush()) throw ExitWith{73, "cannot write " + path.string()};
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

std::map<std::string, AnyParams> embedded_weights() {
  namespace k = constants;
  return {{"hat_w", k::sigmoid221_from_printed(k::kHatW)},
          {"hat_w_unit_major", k::sigmoid221_unit_major(k::kHatW)},
          {"w0", k::sigmoid221_from_printed(k::kW0)},
          {"remark_point", k::sigmoid221_from_printed(k::kRemarkPoint)},
          {"prop1_minimum", k::prop1_minimum()},
          {"prop1_lower", k::prop1_lower()},
          {"prop2_global", k::prop2_global_corrected()},
          {"prop2_suboptimal", k::prop2_suboptimal_corrected()},
          {"prop2_global_printed", k::prop2_global_printed()},
          {"prop2_suboptimal_printed", k::prop2_suboptimal_printed()},
          {"prop3_better", k::prop3_better()},
          {"prop3_worse", k::prop3_worse()}};
}

int certify_exit(CriticalKind k) {
  switch (k) {
    case CriticalKind::LocalMinimum: return 0;
    case CriticalKind::Saddle: return 2;
    case CriticalKind::NotCritical: return 3;
    case CriticalKind::Degenerate: return 4;
  }
  return 70;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Critical points of small neural network error surfaces"};
  app.require_subcommand(1);

  // verify
  std::string claim = "all";
  auto* verify = app.add_subcommand("verify", "Check an embedded claim against its constants");
  verify->add_option("claim", claim, "thm1|prop1|prop2|prop3|blindspot|lemma1|all");

  // certify
  std::string weights_path, dataset_arg, loss_arg;
  double tol_grad = 1e-5, tol_eig = 1e-8;
  auto* certify = app.add_subcommand("certify", "Gradient and Hessian certificate at a weight file");
  certify->add_option("--weights", weights_path)->required();
  certify->add_option("--dataset", dataset_arg, "builtin name or JSON file")->required();
  certify->add_option("--loss", loss_arg, "nll|mse (default: natural loss of the architecture)");
  certify->add_option("--tol-grad", tol_grad);
  certify->add_option("--tol-eig", tol_eig, "relative eigenvalue band");

  // table1
  TableConfig table;
  table.trials = 100;
  std::string out_dir;
  auto* table1 = app.add_subcommand("table1", "Convergence rates of 2-h-1 networks on XOR and flattened XOR");
  table1->add_option("--trials", table.trials)->check(CLI::PositiveNumber);
  table1->add_option("--seed", table.base_seed);
  table1->add_option("--out", out_dir)->required();
  table1->add_option("--h-min", table.h_min)->check(CLI::PositiveNumber);
  table1->add_option("--h-max", table.h_max)->check(CLI::PositiveNumber);
  table1->add_option("--gd-lr-sigmoid", table.gd_lr_sigmoid);
  table1->add_option("--gd-lr-relu", table.gd_lr_relu);
  table1->add_option("--gd-steps", table.gd_max_steps);
  table1->add_option("--adam-lr", table.adam_lr);
  table1->add_option("--adam-steps", table.adam_max_steps);
  table1->add_option("--threads", table.threads, "0 = all cores (NMLAB_THREADS caps)");

  // forge
  ForgeConfig fcfg;
  double perturb = 0.0, random_box = 0.0;
  std::uint64_t forge_seed = 0;
  std::string forge_out;
  auto* forge_cmd = app.add_subcommand("forge", "Move datapoints until the fixed weights are critical");
  forge_cmd->add_option("--weights", weights_path)->required();
  forge_cmd->add_option("--dataset", dataset_arg, "builtin name or JSON file")->required();
  forge_cmd->add_option("--loss", loss_arg);
  forge_cmd->add_option("--step-size", fcfg.step_size);
  forge_cmd->add_option("--max-iters", fcfg.max_iters);
  forge_cmd->add_option("--target", fcfg.target_gradnorm, "stop when |grad_p L|_2 drops below this");
  forge_cmd->add_option("--fd-step", fcfg.fd_step);
  forge_cmd->add_option("--perturb", perturb, "shift every input coordinate by U(-a, a) first");
  forge_cmd->add_option("--random-start", random_box, "replace inputs by U(-a, a) first");
  forge_cmd->add_option("--seed", forge_seed);
  forge_cmd->add_option("--out-dataset", forge_out, "also write the forged dataset here");

  // sample-grid
  std::vector<double> bounds{-1.0, 2.0, -1.0, 2.0};
  int resolution = 50;
  std::string grid_out;
  auto* grid = app.add_subcommand("sample-grid", "Model output on a regular lattice, as CSV");
  grid->add_option("--weights", weights_path)->required();
  grid->add_option("--bounds", bounds, "x_min x_max y_min y_max")->expected(4)->delimiter(',');
  grid->add_option("--res", resolution)->check(CLI::Range(2, 100000));
  grid->add_option("--out", grid_out)->required();

  // train
  std::string train_ds = "xor", train_act = "sigmoid", train_opt = "gd", train_out;
  Eigen::Index train_h = 2;
  std::uint64_t train_seed = 0;
  auto* train_cmd = app.add_subcommand("train", "One 2-h-1 training run with the table defaults");
  train_cmd->add_option("--dataset", train_ds, "xor|fxor");
  train_cmd->add_option("--activation", train_act, "relu|sigmoid");
  train_cmd->add_option("--optimizer", train_opt, "gd|adam|sgd");
  train_cmd->add_option("--width", train_h, "hidden units")->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", train_seed);
  train_cmd->add_option("--out", train_out, "write trained weights here");

  // dataset
  auto* dataset = app.add_subcommand("dataset", "Builtin datasets and dataset files");
  dataset->require_subcommand(1);
  std::string export_name, export_out, validate_path;
  auto* ds_export = dataset->add_subcommand("export", "Write a builtin dataset as JSON");
  ds_export->add_option("name", export_name)->required();
  ds_export->add_option("--out", export_out, "file (default: stdout)");
  auto* ds_validate = dataset->add_subcommand("validate", "Parse and validate a dataset file");
  ds_validate->add_option("file", validate_path)->required();

  // weights
  auto* weights = app.add_subcommand("weights", "Embedded weight constants");
  weights->require_subcommand(1);
  std::string weights_name, weights_out;
  auto* w_export = weights->add_subcommand("export", "Write an embedded weight point as a weight file");
  w_export->add_option("name", weights_name)->required();
  w_export->add_option("--out", weights_out, "file (default: stdout)");
  auto* w_list = weights->add_subcommand("list", "Names of the embedded weight points");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*verify) {
      std::vector<std::string> claims = claim == "all" ? claim_ids() : std::vector<std::string>{claim};
      json reports = json::array();
      bool failed = false;
      for (const auto& c : claims) {
        const VerificationReport r = verify_claim(c);
        failed = failed || r.status == VerifyStatus::Failed;
        reports.push_back(to_json(r));
      }
      print(claims.size() == 1 ? reports[0] : reports);
      return failed ? 1 : 0;
    }

    if (*certify) {
      const AnyParams p = load_weights(weights_path);
      const Dataset d = load_dataset(dataset_arg);
      const Certificate cert = classify_critical(p, d, parse_loss(loss_arg, p), tol_grad, tol_eig);
      print(to_json(cert));
      return certify_exit(cert.classification);
    }

    if (*table1) {
      std::error_code ec;
      fs::create_directories(out_dir, ec);
      if (!fs::is_directory(out_dir)) throw ExitWith{73, "cannot create output directory " + out_dir};
      const fs::path csv = fs::path(out_dir) / "table1.csv";
      const fs::path side = fs::path(out_dir) / "table1.json";
      {
        std::ofstream probe(csv, std::ios::app);
        if (!probe) throw ExitWith{73, "output directory not writable: " + out_dir};
      }
      const ConvergenceTable t = run_table(table);
      write_file(csv, table_to_csv(t));
      write_file(side, table_sidecar(t).dump(2) + "\n");
      std::cout << table_to_csv(t);
      return 0;
    }

    if (*forge_cmd) {
      const AnyParams p = load_weights(weights_path);
      Dataset d = load_dataset(dataset_arg);
      if (random_box > 0.0) {
        SplitMix64 rng(forge_seed);
        for (Eigen::Index i = 0; i < d.size(); ++i)
          for (Eigen::Index j = 0; j < d.dim(); ++j) d.x(i, j) = rng.uniform(-random_box, random_box);
      }
      if (perturb > 0.0) d = perturb_inputs(d, perturb, forge_seed);
      const ForgeResult r = forge(p, d, parse_loss(loss_arg, p), fcfg);
      print(to_json(r));
      if (!forge_out.empty()) write_file(forge_out, dataset_to_json(r.dataset));
      if (!r.converged) return 1;
      switch (r.certificate.classification) {
        case CriticalKind::LocalMinimum:
        case CriticalKind::Degenerate: return 0;
        case CriticalKind::Saddle: return 2;
        case CriticalKind::NotCritical: return 1;
      }
      return 1;
    }

    if (*grid) {
      const AnyParams p = load_weights(weights_path);
      const Grid g = sample_grid(p, {bounds[0], bounds[1], bounds[2], bounds[3]}, resolution);
      write_file(grid_out, grid_to_csv(g));
      return 0;
    }

    if (*train_cmd) {
      const auto ds = builtin_from_name(train_ds);
      if (!ds || (*ds != BuiltinDataset::Xor && *ds != BuiltinDataset::FXor))
        throw ExitWith{64, "train supports xor and fxor"};
      if (train_act != "relu" && train_act != "sigmoid") throw ExitWith{64, "unknown activation " + train_act};
      const Activation act = train_act == "relu" ? Activation::Relu : Activation::Sigmoid;
      OptimizerKind kind;
      if (train_opt == "gd")
        kind = OptimizerKind::GradientDescent;
      else if (train_opt == "adam")
        kind = OptimizerKind::Adam;
      else if (train_opt == "sgd")
        kind = OptimizerKind::Sgd;
      else
        throw ExitWith{64, "unknown optimizer " + train_opt};
      const TrainOutcome out =
          train(init_params(act, train_h, train_seed), builtin(*ds), TableConfig{}.optimizer_config(kind, act), train_seed);
      const TrialResult& r = out.result;
      print({{"seed", r.seed},
             {"converged", r.converged},
             {"diverged", r.diverged},
             {"final_loss", r.final_loss},
             {"final_accuracy", r.final_accuracy},
             {"steps_used", r.steps_used},
             {"terminal_grad_norm", r.terminal_grad_norm}});
      if (!train_out.empty()) write_file(train_out, weights_to_json(out.params));
      return 0;
    }

    if (*ds_export) {
      const auto b = builtin_from_name(export_name);
      if (!b) throw ExitWith{64, "unknown builtin dataset \"" + export_name + "\""};
      const std::string text = dataset_to_json(builtin(*b));
      if (export_out.empty())
        std::cout << text;
      else
        write_file(export_out, text);
      return 0;
    }

    if (*w_list) {
      for (const auto& [name, _] : embedded_weights()) std::cout << name << "\n";
      return 0;
    }

    if (*w_export) {
      const auto all = embedded_weights();
      const auto it = all.find(weights_name);
      if (it == all.end()) throw ExitWith{64, "unknown embedded weights \"" + weights_name + "\""};
      if (weights_out.empty())
        std::cout << weights_to_json(it->second);
      else
        write_file(weights_out, weights_to_json(it->second));
      return 0;
    }

    if (*ds_validate) {
      const Dataset d = load_json(validate_path);
      std::cout << "ok: " << d.size() << " points, d=" << d.dim() << "\n";
      return 0;
    }
  } catch (const ExitWith& e) {
    std::cerr << "nmlab: " << e.message << "\n";
    return e.code;
  } catch (const ParseError& e) {
    std::cerr << "nmlab: " << e.what() << "\n";
    return 64;
  } catch (const InvalidInput& e) {
    std::cerr << "nmlab: " << e.what() << "\n";
    return 64;
  } catch (const ArchitectureError& e) {
    std::cerr << "nmlab: " << e.what() << "\n";
    return 64;
  } catch (const NonSmoothPoint& e) {
    std::cerr << "nmlab: " << e.what() << "\n";
    return 65;
  } catch (const std::exception& e) {
    std::cerr << "nmlab: " << e.what() << "\n";
    return 70;
  }
  return 0;
}
