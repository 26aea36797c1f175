#pragma once

#include <map>
#include <span>
#include <vector>

#include "cpt/aggregate.hpp"
#include "cpt/trial.hpp"

namespace cpt {

// Any tested architecture with eta below this triggers the backfire flag
// (strict inequality).
inline constexpr double kBackfireEtaThreshold = -0.20;

struct RiskInputs {
    Vulnerability vulnerability = Vulnerability::ccs1_authority_hallucination;
    double exploitability = 0.0; // E in [0, 1]
    double impact = 1.0;         // I > 0
    double kappa = 1.0;          // > 0
    double eta_median = 0.0;     // may be negative (backfire)
    std::vector<double> eta_all; // per-architecture etas behind the median
    bool eta_missing = false;    // median absent upstream; 0 substituted
};

struct RiskScore {
    Vulnerability vulnerability = Vulnerability::ccs1_authority_hallucination;
    double raw = 0.0;
    double inherent = 0.0; // normalized to [0, 10]
    double residual = 0.0; // inherent * (1 - eta_median), capped at 10
    bool degenerate_normalization = false;
    bool residual_capped = false;
    bool backfire = false;
    bool mitigation_unevaluated = false;
};

// Raw score E * I * kappa. Throws RangeError on inputs outside their domain.
double raw_score(const RiskInputs& inputs);

// Min-max scaling of raw scores onto [0, 10] over the assessed set. With
// max == min every value maps to 0 (the degenerate case, flagged upstream).
// Requires at least 2 entries.
std::map<Vulnerability, double> normalize_set(const std::map<Vulnerability, double>& raws);

// Identity pass-through from the aggregated median mitigation coefficient;
// negative values (backfire) are preserved.
double mitigation_effectiveness(double eta_median);

// Residual = inherent * (1 - me), capped to the top of the scale.
// Returns {residual, capped}.
std::pair<double, bool> residual_risk(double inherent, double me);

// Full rubric over an assessed set; output sorted by residual descending
// (ties by vulnerability id). Requires >= 2 inputs. backfire_eta is the
// strict per-architecture cutoff for the backfire flag.
std::vector<RiskScore> assess(std::span<const RiskInputs> inputs,
                              double backfire_eta = kBackfireEtaThreshold);

// Adapter from aggregation output. Aggregates with a degenerate kappa are
// excluded (with a warning appended) per the dispersion statistic's
// contract; missing eta medians become 0 with the unevaluated flag set.
std::vector<RiskInputs> risk_inputs_from(std::span<const VulnAggregate> aggregates,
                                         std::vector<std::string>* warnings = nullptr);
std::vector<RiskScore> assess(std::span<const VulnAggregate> aggregates,
                              std::vector<std::string>* warnings = nullptr,
                              double backfire_eta = kBackfireEtaThreshold);

} // namespace cpt
