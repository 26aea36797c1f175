#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpt/aggregate.hpp"
#include "cpt/gate.hpp"
#include "cpt/risk.hpp"
#include "cpt/scorers.hpp"
#include "cpt/trial.hpp"

namespace cpt {

inline constexpr std::string_view kToolName = "cpt";
inline constexpr std::string_view kToolVersion = "0.1.0";

// FNV-1a 64-bit digest used for provenance fingerprints.
std::uint64_t fnv1a64(std::string_view bytes);
std::string digest_hex(std::string_view bytes);

// ---------------------------------------------------------------------------
// Machine formats (the contract). One JSON object per line for row streams,
// a single JSON document for gate decisions, mapping exports and reports.
// ---------------------------------------------------------------------------

nlohmann::json scored_trial_to_json(const ScoredTrial& row);
ScoredTrial scored_trial_from_json(const nlohmann::json& obj);

nlohmann::json aggregate_to_json(const VulnAggregate& agg);

// Accepts both full aggregate rows and minimal direct rows carrying the
// statistics columns (vulnerability, E, kappa, optional I / eta_median /
// eta_all). Rows with a degenerate kappa are skipped with a warning.
std::vector<RiskInputs> risk_inputs_from_lines(std::istream& in,
                                               std::string_view source_name,
                                               std::vector<std::string>* warnings = nullptr);

nlohmann::json risk_score_to_json(const RiskScore& score);
RiskScore risk_score_from_json(const nlohmann::json& obj);

nlohmann::json gate_to_json(const GateDecision& decision);

// Row streams.
std::vector<ScoredTrial> read_scored_trials(std::istream& in, std::string_view source_name);
std::vector<RiskScore> read_risk_scores(std::istream& in, std::string_view source_name);

// ---------------------------------------------------------------------------
// Report bundle
// ---------------------------------------------------------------------------

struct Provenance {
    std::string tool = std::string(kToolName);
    std::string version = std::string(kToolVersion);
    std::string input_digest;
    std::string config_digest;
    std::string generated_at; // excluded from content_digest
    std::string content_digest;
};

struct ReportBundle {
    AggregationResult aggregation;
    std::vector<RiskScore> assessment;
    GateDecision gate;
    nlohmann::json mapping;
    std::vector<std::string> warnings;
    Provenance provenance;
};

// Composes the full pipeline over a loaded set. Warnings from every stage
// are collected into the bundle.
ReportBundle build_report(const TrialSet& set, const Config& config,
                          const GateThresholds& thresholds);

// Machine document. content_digest covers the serialized document with
// generated_at blanked and content_digest absent.
nlohmann::json report_to_json(const ReportBundle& bundle);

// ---------------------------------------------------------------------------
// Human renderings (best effort, not a contract)
// ---------------------------------------------------------------------------

std::string render_assessment_table(std::span<const RiskScore> scores);
std::string render_aggregates_table(std::span<const VulnAggregate> aggregates);
std::string render_gate_text(const GateDecision& decision);
std::string render_mapping_table(const nlohmann::json& mapping_doc);
std::string render_report_text(const ReportBundle& bundle);

std::string current_timestamp_utc();

} // namespace cpt
