#include "cpt/risk.hpp"

#include <algorithm>
#include <cmath>

#include "cpt/gate.hpp"

namespace cpt {

double raw_score(const RiskInputs& inputs) {
    if (!std::isfinite(inputs.exploitability) || inputs.exploitability < 0.0 ||
        inputs.exploitability > 1.0) {
        throw RangeError("exploitability must lie in [0, 1]");
    }
    if (!std::isfinite(inputs.impact) || !(inputs.impact > 0.0)) {
        throw RangeError("impact must be strictly positive");
    }
    if (!std::isfinite(inputs.kappa) || !(inputs.kappa > 0.0)) {
        throw RangeError("kappa must be strictly positive");
    }
    return inputs.exploitability * inputs.impact * inputs.kappa;
}

std::map<Vulnerability, double> normalize_set(const std::map<Vulnerability, double>& raws) {
    if (raws.size() < 2) {
        throw EmptyInputError("normalization requires at least 2 raw scores");
    }
    double lo = raws.begin()->second;
    double hi = raws.begin()->second;
    for (const auto& [v, raw] : raws) {
        lo = std::min(lo, raw);
        hi = std::max(hi, raw);
    }

    std::map<Vulnerability, double> out;
    if (hi == lo) {
        for (const auto& [v, raw] : raws) out[v] = 0.0;
        return out;
    }
    for (const auto& [v, raw] : raws) {
        out[v] = 10.0 * (raw - lo) / (hi - lo);
    }
    return out;
}

double mitigation_effectiveness(double eta_median) {
    if (!std::isfinite(eta_median)) throw RangeError("eta must be finite");
    return eta_median;
}

std::pair<double, bool> residual_risk(double inherent, double me) {
    if (!(inherent >= 0.0 && inherent <= 10.0)) {
        throw RangeError("inherent risk must lie in [0, 10]");
    }
    double residual = inherent * (1.0 - me);
    if (residual > 10.0) return {10.0, true};
    return {residual, false};
}

std::vector<RiskScore> assess(std::span<const RiskInputs> inputs, double backfire_eta) {
    if (inputs.size() < 2) {
        throw EmptyInputError("assessment requires at least 2 vulnerabilities");
    }

    std::map<Vulnerability, double> raws;
    for (const RiskInputs& in : inputs) {
        if (raws.count(in.vulnerability)) {
            throw SchemaError("duplicate vulnerability " + std::string(to_string(in.vulnerability)) +
                              " in assessment input");
        }
        raws[in.vulnerability] = raw_score(in);
    }

    double lo = raws.begin()->second;
    double hi = raws.begin()->second;
    for (const auto& [v, r] : raws) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    const bool degenerate = hi == lo;
    std::map<Vulnerability, double> inherent = normalize_set(raws);

    std::vector<RiskScore> scores;
    scores.reserve(inputs.size());
    for (const RiskInputs& in : inputs) {
        RiskScore s;
        s.vulnerability = in.vulnerability;
        s.raw = raws.at(in.vulnerability);
        s.inherent = inherent.at(in.vulnerability);
        s.degenerate_normalization = degenerate;
        double me = mitigation_effectiveness(in.eta_median);
        std::tie(s.residual, s.residual_capped) = residual_risk(s.inherent, me);
        s.backfire = backfire_flag(in.eta_all, backfire_eta);
        s.mitigation_unevaluated = in.eta_missing;
        scores.push_back(s);
    }

    std::sort(scores.begin(), scores.end(), [](const RiskScore& a, const RiskScore& b) {
        if (a.residual != b.residual) return a.residual > b.residual;
        return a.vulnerability < b.vulnerability;
    });
    return scores;
}

std::vector<RiskInputs> risk_inputs_from(std::span<const VulnAggregate> aggregates,
                                         std::vector<std::string>* warnings) {
    std::vector<RiskInputs> inputs;
    inputs.reserve(aggregates.size());
    for (const VulnAggregate& agg : aggregates) {
        if (!agg.kappa.has_value()) {
            if (warnings != nullptr) {
                warnings->push_back(std::string(to_string(agg.vulnerability)) +
                                    " excluded from assessment: kappa degenerate");
            }
            continue;
        }
        RiskInputs in;
        in.vulnerability = agg.vulnerability;
        in.exploitability = agg.exploitability;
        in.impact = agg.impact;
        in.kappa = *agg.kappa;
        in.eta_median = agg.eta_median.value_or(0.0);
        in.eta_missing = !agg.eta_median.has_value();
        for (const auto& [arch, e] : agg.eta_per_arch) {
            if (e) in.eta_all.push_back(*e);
        }
        inputs.push_back(std::move(in));
    }
    return inputs;
}

std::vector<RiskScore> assess(std::span<const VulnAggregate> aggregates,
                              std::vector<std::string>* warnings, double backfire_eta) {
    std::vector<RiskInputs> inputs = risk_inputs_from(aggregates, warnings);
    return assess(inputs, backfire_eta);
}

} // namespace cpt
