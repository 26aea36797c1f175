#include "cpt/report.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <istream>
#include <sstream>

#include "cpt/standards.hpp"

namespace cpt {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 0xCBF29CE484222325ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001B3ull;
    }
    return hash;
}

std::string digest_hex(std::string_view bytes) {
    std::ostringstream os;
    os << "fnv1a64:" << std::hex << std::setfill('0') << std::setw(16) << fnv1a64(bytes);
    return os.str();
}

// ---------------------------------------------------------------------------
// Row serialization
// ---------------------------------------------------------------------------

json scored_trial_to_json(const ScoredTrial& row) {
    json obj;
    obj["trial_id"] = row.outcome.trial_id;
    obj["vulnerability"] = to_string(row.vulnerability);
    obj["architecture"] = row.architecture;
    obj["condition"] = to_string(row.condition);
    if (row.outcome.success) obj["success"] = *row.outcome.success;
    if (row.outcome.metric_value) obj["metric_value"] = *row.outcome.metric_value;
    obj["refusal"] = row.outcome.refusal;
    obj["evidence"] = row.outcome.evidence;
    return obj;
}

namespace {

json parse_line_object(std::string_view line, std::string_view source, std::size_t lineno) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string(source) + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!obj.is_object()) {
        throw ParseError(std::string(source) + ":" + std::to_string(lineno) +
                         ": record must be an object");
    }
    return obj;
}

template <typename Fn>
void for_each_line_object(std::istream& in, std::string_view source, Fn&& fn) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        fn(parse_line_object(line, source, lineno), lineno);
    }
}

Vulnerability vulnerability_from(const json& obj, std::string_view source, std::size_t lineno) {
    if (!obj.contains("vulnerability") || !obj["vulnerability"].is_string()) {
        throw SchemaError(std::string(source) + ":" + std::to_string(lineno) +
                          ": missing required field \"vulnerability\"");
    }
    auto v = parse_vulnerability(obj["vulnerability"].get<std::string>());
    if (!v) {
        throw SchemaError(std::string(source) + ":" + std::to_string(lineno) +
                          ": unknown vulnerability id \"" +
                          obj["vulnerability"].get<std::string>() + "\"");
    }
    return *v;
}

double number_field(const json& obj, const char* key, std::string_view source,
                    std::size_t lineno) {
    if (!obj.contains(key) || !obj[key].is_number()) {
        throw SchemaError(std::string(source) + ":" + std::to_string(lineno) +
                          ": missing required field \"" + key + "\"");
    }
    return obj[key].get<double>();
}

} // namespace

ScoredTrial scored_trial_from_json(const json& obj) {
    ScoredTrial row;
    if (!obj.contains("trial_id") || !obj["trial_id"].is_string()) {
        throw SchemaError("missing required field \"trial_id\"");
    }
    row.outcome.trial_id = obj["trial_id"].get<std::string>();
    auto v = parse_vulnerability(obj.value("vulnerability", ""));
    if (!v) throw SchemaError("unknown vulnerability id in scored row");
    row.vulnerability = *v;
    row.architecture = obj.value("architecture", "");
    if (row.architecture.empty()) throw SchemaError("missing required field \"architecture\"");
    auto c = parse_condition(obj.value("condition", ""));
    if (!c) throw SchemaError("unknown condition in scored row");
    row.condition = *c;
    if (obj.contains("success")) {
        if (!obj["success"].is_boolean()) throw SchemaError("field \"success\" must be a boolean");
        row.outcome.success = obj["success"].get<bool>();
    }
    if (obj.contains("metric_value") && !obj["metric_value"].is_null()) {
        row.outcome.metric_value = obj["metric_value"].get<double>();
    }
    row.outcome.refusal = obj.value("refusal", false);
    if (obj.contains("evidence")) {
        row.outcome.evidence = obj["evidence"].get<std::vector<std::string>>();
    }
    return row;
}

std::vector<ScoredTrial> read_scored_trials(std::istream& in, std::string_view source_name) {
    std::vector<ScoredTrial> rows;
    for_each_line_object(in, source_name, [&](const json& obj, std::size_t lineno) {
        try {
            rows.push_back(scored_trial_from_json(obj));
        } catch (const SchemaError& e) {
            throw SchemaError(std::string(source_name) + ":" + std::to_string(lineno) + ": " +
                              e.what());
        }
    });
    return rows;
}

json aggregate_to_json(const VulnAggregate& agg) {
    json obj;
    obj["vulnerability"] = to_string(agg.vulnerability);
    obj["E"] = agg.exploitability;
    obj["I"] = agg.impact;
    if (agg.kappa) {
        obj["kappa"] = *agg.kappa;
    } else {
        obj["kappa_degenerate"] = true;
    }
    if (agg.eta_median) obj["eta_median"] = *agg.eta_median;
    obj["mitigation_unevaluated"] = agg.mitigation_unevaluated;
    json asr = json::object();
    for (const auto& [arch, value] : agg.per_arch_attack_asr) asr[arch] = value;
    obj["per_arch_attack_asr"] = std::move(asr);
    json etas = json::object();
    for (const auto& [arch, value] : agg.eta_per_arch) {
        if (value) {
            etas[arch] = *value;
        } else {
            etas[arch] = nullptr;
        }
    }
    obj["eta_per_arch"] = std::move(etas);
    obj["warnings"] = agg.warnings;
    return obj;
}

std::vector<RiskInputs> risk_inputs_from_lines(std::istream& in, std::string_view source_name,
                                               std::vector<std::string>* warnings) {
    std::vector<RiskInputs> inputs;
    for_each_line_object(in, source_name, [&](const json& obj, std::size_t lineno) {
        Vulnerability v = vulnerability_from(obj, source_name, lineno);
        if (obj.value("kappa_degenerate", false)) {
            if (warnings != nullptr) {
                warnings->push_back(std::string(to_string(v)) +
                                    " excluded from assessment: kappa degenerate");
            }
            return;
        }
        RiskInputs in_row;
        in_row.vulnerability = v;
        in_row.exploitability = number_field(obj, "E", source_name, lineno);
        in_row.impact = obj.contains("I") ? number_field(obj, "I", source_name, lineno) : 1.0;
        in_row.kappa = number_field(obj, "kappa", source_name, lineno);
        if (obj.contains("eta_median") && !obj["eta_median"].is_null()) {
            in_row.eta_median = obj["eta_median"].get<double>();
        } else {
            in_row.eta_missing = true;
        }
        in_row.eta_missing = obj.value("mitigation_unevaluated", in_row.eta_missing);
        if (obj.contains("eta_all") && obj["eta_all"].is_array()) {
            for (const auto& e : obj["eta_all"]) in_row.eta_all.push_back(e.get<double>());
        } else if (obj.contains("eta_per_arch") && obj["eta_per_arch"].is_object()) {
            for (const auto& [arch, e] : obj["eta_per_arch"].items()) {
                if (!e.is_null()) in_row.eta_all.push_back(e.get<double>());
            }
        } else if (!in_row.eta_missing) {
            // Direct statistics rows carry only the median; the backfire
            // flag then keys off that single value.
            in_row.eta_all.push_back(in_row.eta_median);
        }
        inputs.push_back(std::move(in_row));
    });
    return inputs;
}

json risk_score_to_json(const RiskScore& score) {
    json obj;
    obj["vulnerability"] = to_string(score.vulnerability);
    obj["raw"] = score.raw;
    obj["inherent"] = score.inherent;
    obj["residual"] = score.residual;
    obj["degenerate_normalization"] = score.degenerate_normalization;
    obj["residual_capped"] = score.residual_capped;
    obj["backfire"] = score.backfire;
    obj["mitigation_unevaluated"] = score.mitigation_unevaluated;
    return obj;
}

RiskScore risk_score_from_json(const json& obj) {
    RiskScore s;
    auto v = parse_vulnerability(obj.value("vulnerability", ""));
    if (!v) throw SchemaError("unknown vulnerability id in risk score row");
    s.vulnerability = *v;
    if (!obj.contains("residual") || !obj["residual"].is_number()) {
        throw SchemaError("missing required field \"residual\"");
    }
    s.raw = obj.value("raw", 0.0);
    s.inherent = obj.value("inherent", 0.0);
    s.residual = obj["residual"].get<double>();
    s.degenerate_normalization = obj.value("degenerate_normalization", false);
    s.residual_capped = obj.value("residual_capped", false);
    s.backfire = obj.value("backfire", false);
    s.mitigation_unevaluated = obj.value("mitigation_unevaluated", false);
    return s;
}

std::vector<RiskScore> read_risk_scores(std::istream& in, std::string_view source_name) {
    std::vector<RiskScore> scores;
    for_each_line_object(in, source_name, [&](const json& obj, std::size_t lineno) {
        try {
            scores.push_back(risk_score_from_json(obj));
        } catch (const SchemaError& e) {
            throw SchemaError(std::string(source_name) + ":" + std::to_string(lineno) + ": " +
                              e.what());
        }
    });
    return scores;
}

json gate_to_json(const GateDecision& decision) {
    json per = json::array();
    for (const GateEntry& e : decision.per_vulnerability) {
        per.push_back({
            {"vulnerability", to_string(e.vulnerability)},
            {"residual", e.residual},
            {"band", to_string(e.band)},
            {"controls", e.controls},
        });
    }
    json obj;
    obj["per_vulnerability"] = std::move(per);
    obj["overall_band"] = to_string(decision.overall_band);
    obj["backfire_review_required"] = decision.backfire_review_required;
    obj["exit_status"] = decision.exit_status;
    return obj;
}

// ---------------------------------------------------------------------------
// Report bundle
// ---------------------------------------------------------------------------

ReportBundle build_report(const TrialSet& set, const Config& config,
                          const GateThresholds& thresholds) {
    ReportBundle bundle;
    std::vector<ScoreOutcome> outcomes = score_all(set, config.scorer);
    bundle.aggregation = aggregate(set, outcomes, config.impact);
    bundle.warnings = bundle.aggregation.warnings;
    for (const VulnAggregate& agg : bundle.aggregation.aggregates) {
        for (const std::string& w : agg.warnings) {
            bundle.warnings.push_back(std::string(to_string(agg.vulnerability)) + ": " + w);
        }
    }
    bundle.assessment =
        assess(bundle.aggregation.aggregates, &bundle.warnings, thresholds.backfire_eta);
    bundle.gate = gate_assessment(bundle.assessment, thresholds);
    bundle.mapping = export_mapping(bundle.assessment);
    return bundle;
}

json report_to_json(const ReportBundle& bundle) {
    json doc;
    doc["tool"] = bundle.provenance.tool;
    doc["version"] = bundle.provenance.version;

    json cells = json::array();
    for (const CellStats& c : bundle.aggregation.cells) {
        json row;
        row["vulnerability"] = to_string(c.vulnerability);
        row["architecture"] = c.architecture;
        row["condition"] = to_string(c.condition);
        row["n_total"] = c.n_total;
        row["n_evaluable"] = c.n_evaluable;
        row["n_success"] = c.n_success;
        row["n_refusal"] = c.n_refusal;
        if (c.asr) row["asr"] = *c.asr;
        if (c.refusal_rate) row["refusal_rate"] = *c.refusal_rate;
        cells.push_back(std::move(row));
    }
    doc["cells"] = std::move(cells);

    json aggregates = json::array();
    for (const VulnAggregate& a : bundle.aggregation.aggregates) {
        aggregates.push_back(aggregate_to_json(a));
    }
    doc["aggregates"] = std::move(aggregates);

    json assessment = json::array();
    for (const RiskScore& s : bundle.assessment) assessment.push_back(risk_score_to_json(s));
    doc["assessment"] = std::move(assessment);

    doc["gate"] = gate_to_json(bundle.gate);
    doc["mapping"] = bundle.mapping;
    doc["warnings"] = bundle.warnings;

    json prov;
    prov["tool"] = bundle.provenance.tool;
    prov["version"] = bundle.provenance.version;
    prov["input_digest"] = bundle.provenance.input_digest;
    prov["config_digest"] = bundle.provenance.config_digest;
    prov["generated_at"] = "";
    doc["provenance"] = prov;

    // The content digest covers the document with the timestamp blanked.
    std::string canonical = doc.dump();
    doc["provenance"]["content_digest"] = digest_hex(canonical);
    doc["provenance"]["generated_at"] = bundle.provenance.generated_at;
    return doc;
}

// ---------------------------------------------------------------------------
// Human renderings
// ---------------------------------------------------------------------------

namespace {

std::string fixed3(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << v;
    return os.str();
}

std::string fixed2(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
}

} // namespace

std::string render_aggregates_table(std::span<const VulnAggregate> aggregates) {
    std::ostringstream os;
    os << "vulnerability  name                      E      I     kappa  eta_median\n";
    for (const VulnAggregate& a : aggregates) {
        os << std::left << std::setw(15) << to_string(a.vulnerability) << std::setw(25)
           << display_name(a.vulnerability) << " " << fixed3(a.exploitability) << "  "
           << fixed2(a.impact) << "  " << (a.kappa ? fixed3(*a.kappa) : "  n/a") << "  "
           << (a.eta_median ? fixed2(*a.eta_median) : "n/a") << "\n";
    }
    return os.str();
}

std::string render_assessment_table(std::span<const RiskScore> scores) {
    std::ostringstream os;
    os << "vulnerability  name                      raw    inherent  residual  flags\n";
    for (const RiskScore& s : scores) {
        std::string flags;
        if (s.backfire) flags += " backfire";
        if (s.residual_capped) flags += " capped";
        if (s.degenerate_normalization) flags += " degenerate-norm";
        if (s.mitigation_unevaluated) flags += " mitigation-unevaluated";
        if (flags.empty()) flags = " -";
        os << std::left << std::setw(15) << to_string(s.vulnerability) << std::setw(25)
           << display_name(s.vulnerability) << " " << fixed3(s.raw) << "  " << std::setw(8)
           << fixed2(s.inherent) << "  " << std::setw(8) << fixed2(s.residual) << flags << "\n";
    }
    return os.str();
}

std::string render_gate_text(const GateDecision& decision) {
    std::ostringstream os;
    os << "deployment gate\n";
    for (const GateEntry& e : decision.per_vulnerability) {
        os << "  " << std::left << std::setw(8) << to_string(e.vulnerability) << " residual "
           << fixed2(e.residual) << "  " << std::setw(20) << to_string(e.band) << " " << e.controls
           << "\n";
    }
    os << "overall: " << to_string(decision.overall_band)
       << (decision.backfire_review_required ? " (architecture backfire review required)" : "")
       << "\nexit status: " << decision.exit_status << "\n";
    return os.str();
}

std::string render_mapping_table(const json& mapping_doc) {
    std::ostringstream os;
    os << "standards mapping (" << mapping_doc.value("mapping_version", "") << ")\n";
    for (const auto& row : mapping_doc.at("rows")) {
        os << "  " << row.value("vulnerability", "") << " " << row.value("name", "");
        if (row.contains("residual_risk")) {
            os << " [residual " << fixed2(row["residual_risk"].get<double>()) << "]";
        }
        os << "\n";
        for (const auto& r : row.at("owasp")) {
            os << "    OWASP " << r.value("id", "") << " " << r.value("title", "") << "\n";
        }
        for (const auto& r : row.at("atlas")) {
            os << "    ATLAS " << r.value("id", "") << " " << r.value("title", "") << "\n";
        }
    }
    return os.str();
}

std::string render_report_text(const ReportBundle& bundle) {
    std::ostringstream os;
    os << "cognitive pentest report (" << bundle.provenance.tool << " "
       << bundle.provenance.version << ")\n\n";
    os << render_aggregates_table(bundle.aggregation.aggregates) << "\n";
    os << render_assessment_table(bundle.assessment) << "\n";
    os << render_gate_text(bundle.gate) << "\n";
    os << render_mapping_table(bundle.mapping);
    if (!bundle.warnings.empty()) {
        os << "\nwarnings:\n";
        for (const std::string& w : bundle.warnings) os << "  - " << w << "\n";
    }
    return os.str();
}

std::string current_timestamp_utc() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

} // namespace cpt
