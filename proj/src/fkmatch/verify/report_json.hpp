#pragma once

#include <json.hpp>

#include "verify/identities.hpp"

namespace fkmatch::verify {

nlohmann::json to_json(const Side& side);
nlohmann::json to_json(const IdentityReport& report);
nlohmann::json to_json(const SuiteReport& suite);

// Flat CSV rows (id, verdict, lhs, lhs_se, rhs, rhs_se, z, residual).
std::string to_csv(const std::vector<IdentityReport>& reports);

}  // namespace fkmatch::verify
