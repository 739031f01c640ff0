#include "doctest.h"
#include "nmlab/constants.hpp"
#include "nmlab/reports.hpp"
#include "nmlab/verify.hpp"
#include "nmlab/weights_io.hpp"
#include "support.hpp"

using namespace nmlab;
using namespace testing;
namespace k = nmlab::constants;

TEST_CASE("weights round trip for every architecture") {
  std::mt19937_64 rng(2);
  DeepReluParams deep;
  deep.layers.push_back({uniform_vector(rng, 6, -1, 1).reshaped(3, 2), uniform_vector(rng, 3, -1, 1)});
  deep.layers.push_back({uniform_vector(rng, 3, -1, 1).reshaped(1, 3), uniform_vector(rng, 1, -1, 1)});
  const std::vector<AnyParams> all{
      AnyParams(k::sigmoid221_from_printed(k::kW0)),
      AnyParams(k::prop3_better()),
      AnyParams(TwoH1Params::unflatten(Activation::Relu, uniform_vector(rng, 17, -1, 1))),
      AnyParams(TwoH1Params::unflatten(Activation::Sigmoid, uniform_vector(rng, 9, -1, 1))),
      AnyParams(deep),
  };
  for (const auto& p : all) {
    const std::string text = weights_to_json(p);
    const AnyParams back = parse_weights_json(text);
    CHECK(back == p);
    CHECK(weights_to_json(back) == text);
  }
}

TEST_CASE("malformed weights") {
  CHECK_THROWS_AS(parse_weights_json("{"), ParseError);
  CHECK_THROWS_AS(parse_weights_json(R"({"arch":"sigmoid221","params":{"w00":1}})"), ParseError);
  CHECK_THROWS_AS(parse_weights_json(R"({"arch":"mystery","params":{}})"), ParseError);
  CHECK_THROWS_AS(parse_weights_json(R"({"arch":"relu_reg","params":{"w":[1,2],"b":[1],"v":[1,1],"c":0}})"),
                  ParseError);
  CHECK_THROWS_AS(parse_weights_json(R"({"arch":"relu_reg","params":{"w":[1],"b":[1],"v":[1],"c":0,"x":1}})"),
                  ParseError);
  CHECK_THROWS_AS(parse_weights_json(R"({"arch":"two_h1","params":{"activation":"tanh","w1":[[1,2]],"b1":[0],"v":[1],"c":0}})"),
                  ParseError);
  CHECK_THROWS_AS(parse_weights_json(R"({"arch":"deep_relu","params":{"layers":[{"w":[[1],[2]],"b":[0,0]}]}})"),
                  ParseError);
}

TEST_CASE("report keys") {
  const Dataset d = builtin(BuiltinDataset::Sigmoid10);
  const auto cert = classify_critical(k::sigmoid221_from_printed(k::kHatW), d, LossKind::Nll);
  const auto j = to_json(cert);
  for (const char* key : {"grad_inf_norm", "eigenvalues", "classification", "tol_grad", "tol_eig", "loss_at_point"})
    CHECK(j.contains(key));
  CHECK(j["classification"] == "LocalMinimum");
  CHECK(j["eigenvalues"].size() == 9);

  const auto proof = to_json(certify_relu_min_exact(k::prop1_minimum(), builtin(BuiltinDataset::D1)));
  CHECK(proof["certified"] == true);
  CHECK(proof["cases"].size() == 2);
}

TEST_CASE("verification reports") {
  CHECK(claim_ids().size() == 6);
  CHECK_THROWS_AS(verify_claim("nope"), InvalidInput);
  for (const auto& id : claim_ids()) {
    const VerificationReport r = verify_claim(id);
    CHECK(r.claim == id);
    CHECK(r.status != VerifyStatus::Failed);
    const auto j = to_json(r);
    CHECK(j["claim"] == id);
    CHECK(j.contains("status"));
    CHECK(j.contains("details"));
  }
  CHECK(verify_claim("thm1").status == VerifyStatus::ConfirmedWithCorrection);
  CHECK(verify_claim("prop2").status == VerifyStatus::ConfirmedWithCorrection);
  CHECK(verify_claim("prop1").status == VerifyStatus::Confirmed);
}
