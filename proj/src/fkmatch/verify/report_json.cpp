#include "verify/report_json.hpp"

#include <sstream>

namespace fkmatch::verify {

nlohmann::json to_json(const Side& side) {
    nlohmann::json j;
    j["value"] = side.value;
    j["method"] = side.method;
    j["exact"] = side.exact;
    if (!side.exact) {
        j["std_error"] = side.std_error;
        j["n_paths"] = side.n_paths;
    }
    return j;
}

nlohmann::json to_json(const IdentityReport& report) {
    nlohmann::json j;
    j["id"] = report.name;
    j["verdict"] = verdict_name(report.verdict);
    j["lhs"] = to_json(report.lhs);
    j["rhs"] = to_json(report.rhs);
    j["z"] = report.z;
    j["residual"] = report.residual;
    j["threshold"] = report.threshold;
    if (report.rerun) j["rerun"] = true;
    if (!report.detail.empty()) j["detail"] = report.detail;
    if (!report.extra.is_null()) j["extra"] = report.extra;
    j["config"] = report.config_echo;
    return j;
}

nlohmann::json to_json(const SuiteReport& suite) {
    nlohmann::json j;
    j["results"] = nlohmann::json::array();
    for (const auto& rep : suite.results) j["results"].push_back(to_json(rep));
    j["ledger"] = nlohmann::json::array();
    for (const auto& rep : suite.ledger) j["ledger"].push_back(to_json(rep));
    j["all_passed"] = suite.all_passed;
    return j;
}

std::string to_csv(const std::vector<IdentityReport>& reports) {
    std::ostringstream out;
    out.precision(17);
    out << "id,verdict,lhs,lhs_se,rhs,rhs_se,z,residual\n";
    for (const auto& r : reports) {
        out << r.name << ',' << verdict_name(r.verdict) << ',' << r.lhs.value << ','
            << r.lhs.std_error << ',' << r.rhs.value << ',' << r.rhs.std_error << ','
            << r.z << ',' << r.residual << '\n';
    }
    return out.str();
}

}  // namespace fkmatch::verify
