#include "nmlab/weights_io.hpp"

#include "nmlab/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace nmlab {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using json = nlohmann::json;

namespace {

void require_keys(const json& obj, const std::set<std::string>& keys, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + " must be an object");
  for (const auto& k : keys)
    if (!obj.contains(k)) throw ParseError(where + ": missing \"" + k + "\"");
  for (const auto& [k, _] : obj.items())
    if (!keys.count(k)) throw ParseError(where + ": unexpected field \"" + k + "\"");
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + " must be a number");
  return v.get<double>();
}

VectorXd vector(const json& v, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + " must be an array");
  VectorXd out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Index>(i)] = number(v[i], where + "[" + std::to_string(i) + "]");
  return out;
}

MatrixXd matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ParseError(where + " must be a nonempty array of rows");
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  MatrixXd out(static_cast<Index>(v.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const VectorXd row = vector(v[i], where + "[" + std::to_string(i) + "]");
    if (static_cast<std::size_t>(row.size()) != cols) throw ParseError(where + ": ragged rows");
    out.row(static_cast<Index>(i)) = row.transpose();
  }
  return out;
}

json to_json(const VectorXd& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json to_json(const MatrixXd& m) {
  json a = json::array();
  for (Index i = 0; i < m.rows(); ++i) a.push_back(to_json(VectorXd(m.row(i).transpose())));
  return a;
}

AnyParams parse_params(const std::string& arch, const json& p) {
  if (arch == "sigmoid221") {
    require_keys(p, {"w00", "w01", "b0", "w10", "w11", "b1", "v0", "v1", "c"}, "params");
    auto f = [&](const char* k) { return number(p.at(k), k); };
    return Sigmoid221Params{f("w00"), f("w01"), f("b0"), f("w10"), f("w11"), f("b1"), f("v0"), f("v1"), f("c")};
  }
  if (arch == "relu_reg") {
    require_keys(p, {"w", "b", "v", "c"}, "params");
    ReluRegParams out{vector(p.at("w"), "w"), vector(p.at("b"), "b"), vector(p.at("v"), "v"), number(p.at("c"), "c")};
    out.check();
    return out;
  }
  if (arch == "two_h1") {
    require_keys(p, {"activation", "w1", "b1", "v", "c"}, "params");
    TwoH1Params out;
    const auto& act = p.at("activation");
    if (act == "relu")
      out.activation = Activation::Relu;
    else if (act == "sigmoid")
      out.activation = Activation::Sigmoid;
    else
      throw ParseError("activation must be \"relu\" or \"sigmoid\"");
    out.w1 = matrix(p.at("w1"), "w1");
    if (out.w1.cols() != 2) throw ParseError("w1 rows must have 2 entries");
    out.b1 = vector(p.at("b1"), "b1");
    out.v = vector(p.at("v"), "v");
    out.c = number(p.at("c"), "c");
    out.check();
    return out;
  }
  if (arch == "deep_relu") {
    require_keys(p, {"layers"}, "params");
    const auto& layers = p.at("layers");
    if (!layers.is_array()) throw ParseError("layers must be an array");
    DeepReluParams out;
    for (std::size_t n = 0; n < layers.size(); ++n) {
      const std::string where = "layers[" + std::to_string(n) + "]";
      require_keys(layers[n], {"w", "b"}, where);
      out.layers.push_back({matrix(layers[n].at("w"), where + ".w"), vector(layers[n].at("b"), where + ".b")});
    }
    out.check();
    return out;
  }
  throw ParseError("unknown arch \"" + arch + "\"");
}

}  // namespace

AnyParams parse_weights_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed weight file: ") + e.what());
  }
  try {
    require_keys(doc, {"arch", "params"}, "weight file");
    if (!doc.at("arch").is_string()) throw ParseError("\"arch\" must be a string");
    return parse_params(doc.at("arch").get<std::string>(), doc.at("params"));
  } catch (const InvalidInput& e) {
    throw ParseError(std::string("weight file: ") + e.what());
  } catch (const json::exception& e) {
    throw ParseError(std::string("weight file does not match schema: ") + e.what());
  }
}

std::string weights_to_json(const AnyParams& any) {
  json params;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Sigmoid221Params>) {
          params = {{"w00", p.w00}, {"w01", p.w01}, {"b0", p.b0}, {"w10", p.w10}, {"w11", p.w11},
                    {"b1", p.b1},   {"v0", p.v0},   {"v1", p.v1}, {"c", p.c}};
        } else if constexpr (std::is_same_v<T, ReluRegParams>) {
          params = {{"w", to_json(p.w)}, {"b", to_json(p.b)}, {"v", to_json(p.v)}, {"c", p.c}};
        } else if constexpr (std::is_same_v<T, TwoH1Params>) {
          params = {{"activation", p.activation == Activation::Relu ? "relu" : "sigmoid"},
                    {"w1", to_json(MatrixXd(p.w1))},
                    {"b1", to_json(p.b1)},
                    {"v", to_json(p.v)},
                    {"c", p.c}};
        } else {
          json layers = json::array();
          for (const auto& l : p.layers) layers.push_back({{"w", to_json(l.w)}, {"b", to_json(l.b)}});
          params = {{"layers", std::move(layers)}};
        }
      },
      any);
  json doc = {{"arch", arch_name(any)}, {"params", std::move(params)}};
  return doc.dump(2) + "\n";
}

AnyParams load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open weight file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_weights_json(buf.str());
}

void save_weights(const AnyParams& p, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write weight file " + path.string());
  out << weights_to_json(p);
}

}  // namespace nmlab
