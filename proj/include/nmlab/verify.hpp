#pragma once

#include <json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace nmlab {

enum class VerifyStatus { Confirmed, ConfirmedWithCorrection, Failed };

const char* to_string(VerifyStatus s);

struct VerificationReport {
  std::string claim;
  VerifyStatus status = VerifyStatus::Failed;
  nlohmann::json details;  // losses, spectra, corrections with before/after values
};

/// thm1, prop1, prop2, prop3, blindspot, lemma1.
const std::vector<std::string>& claim_ids();

/// Runs one check against the embedded constants. Throws InvalidInput for an
/// unknown id; every other outcome is encoded in the status.
VerificationReport verify_claim(std::string_view claim);

nlohmann::json to_json(const VerificationReport& r);

}  // namespace nmlab
