#pragma once

#include "nmlab/blindspot.hpp"
#include "nmlab/certify.hpp"
#include "nmlab/forge.hpp"
#include "nmlab/optim.hpp"

#include <json.hpp>

namespace nmlab {

nlohmann::json to_json(const Dataset& d);
nlohmann::json to_json(const AnyParams& p);
nlohmann::json to_json(const Certificate& c);
nlohmann::json to_json(const ReluProof& proof);
nlohmann::json to_json(const EscapeProbe& probe);
nlohmann::json to_json(const ForgeResult& r);
nlohmann::json to_json(const TrainingProbe& probe);
nlohmann::json to_json(const BlindSpotReport& r);

/// Provenance sidecar for a convergence table: every hyperparameter plus the
/// cell layout, enough to regenerate the CSV.
nlohmann::json table_sidecar(const ConvergenceTable& t);

}  // namespace nmlab
