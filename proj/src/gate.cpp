#include "cpt/gate.hpp"

#include "cpt/config.hpp"

namespace cpt {

std::string_view to_string(DeploymentBand band) {
    switch (band) {
    case DeploymentBand::standard: return "standard";
    case DeploymentBand::conditional: return "conditional";
    case DeploymentBand::high_risk: return "high_risk";
    case DeploymentBand::requires_mitigation: return "requires_mitigation";
    }
    return "";
}

std::optional<DeploymentBand> parse_band(std::string_view s) {
    for (DeploymentBand b : {DeploymentBand::standard, DeploymentBand::conditional,
                             DeploymentBand::high_risk, DeploymentBand::requires_mitigation}) {
        if (to_string(b) == s) return b;
    }
    return std::nullopt;
}

std::string_view controls_text(DeploymentBand band) {
    switch (band) {
    case DeploymentBand::standard:
        return "Regular monitoring; incident response on deviation";
    case DeploymentBand::conditional:
        return "Enhanced monitoring; mandatory Trust mechanisms; user warnings";
    case DeploymentBand::high_risk:
        return "Continuous CPT; restricted use cases; mandatory human oversight";
    case DeploymentBand::requires_mitigation:
        return "Deploy only after additional architectural controls reduce risk";
    }
    return "";
}

void GateThresholds::validate() const {
    if (!(standard_max > 0.0) || !(standard_max <= conditional_max) ||
        !(conditional_max <= high_risk_max) || !(high_risk_max <= 10.0)) {
        throw ConfigError("gate thresholds must satisfy 0 < standard_max <= conditional_max "
                          "<= high_risk_max <= 10");
    }
}

GateThresholds GateThresholds::from_file(const std::filesystem::path& path) {
    KvFile kv = KvFile::parse_file(path);
    GateThresholds t;
    for (const KvEntry& e : kv.preamble().entries) {
        if (e.key == "standard_max") {
            t.standard_max = parse_decimal(e);
        } else if (e.key == "conditional_max") {
            t.conditional_max = parse_decimal(e);
        } else if (e.key == "high_risk_max") {
            t.high_risk_max = parse_decimal(e);
        } else if (e.key == "backfire_eta") {
            t.backfire_eta = parse_decimal(e);
        } else {
            throw ConfigError("unknown thresholds key \"" + e.key + "\" (line " +
                              std::to_string(e.line) + ")");
        }
    }
    t.validate();
    return t;
}

DeploymentBand band_for(double residual, const GateThresholds& thresholds) {
    thresholds.validate();
    if (!(residual >= 0.0 && residual <= 10.0)) {
        throw RangeError("residual risk must lie in [0, 10]");
    }
    if (residual < thresholds.standard_max) return DeploymentBand::standard;
    if (residual < thresholds.conditional_max) return DeploymentBand::conditional;
    if (residual <= thresholds.high_risk_max) return DeploymentBand::high_risk;
    return DeploymentBand::requires_mitigation;
}

bool backfire_flag(std::span<const double> eta_all, double threshold) {
    for (double e : eta_all) {
        if (e < threshold) return true;
    }
    return false;
}

int exit_status_for(DeploymentBand band, bool backfire_review) {
    int status = 0;
    switch (band) {
    case DeploymentBand::standard: status = 0; break;
    case DeploymentBand::conditional: status = 10; break;
    case DeploymentBand::high_risk: status = 20; break;
    case DeploymentBand::requires_mitigation: status = 30; break;
    }
    if (backfire_review) status += 1;
    return status;
}

GateDecision gate_assessment(std::span<const RiskScore> scores, const GateThresholds& thresholds) {
    if (scores.empty()) throw EmptyInputError("gate requires at least one risk score");

    GateDecision decision;
    for (const RiskScore& s : scores) {
        GateEntry entry;
        entry.vulnerability = s.vulnerability;
        entry.residual = s.residual;
        entry.band = band_for(s.residual, thresholds);
        entry.controls = std::string(controls_text(entry.band));
        decision.overall_band = std::max(decision.overall_band, entry.band);
        decision.backfire_review_required = decision.backfire_review_required || s.backfire;
        decision.per_vulnerability.push_back(std::move(entry));
    }
    decision.exit_status = exit_status_for(decision.overall_band, decision.backfire_review_required);
    return decision;
}

} // namespace cpt
