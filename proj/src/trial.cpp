#include "cpt/trial.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace cpt {

using nlohmann::json;

const std::array<Vulnerability, kVulnerabilityCount>& all_vulnerabilities() {
    static const std::array<Vulnerability, kVulnerabilityCount> all = {
        Vulnerability::ccs1_authority_hallucination,
        Vulnerability::ccs2_context_poisoning,
        Vulnerability::ccs3_goal_misalignment,
        Vulnerability::ccs4_identity_confusion,
        Vulnerability::ccs5_source_interference,
        Vulnerability::ccs6_cognitive_overflow,
        Vulnerability::ccs7_attention_hijacking,
    };
    return all;
}

std::string_view to_string(Vulnerability v) {
    switch (v) {
    case Vulnerability::ccs1_authority_hallucination: return "CCS-1";
    case Vulnerability::ccs2_context_poisoning: return "CCS-2";
    case Vulnerability::ccs3_goal_misalignment: return "CCS-3";
    case Vulnerability::ccs4_identity_confusion: return "CCS-4";
    case Vulnerability::ccs5_source_interference: return "CCS-5";
    case Vulnerability::ccs6_cognitive_overflow: return "CCS-6";
    case Vulnerability::ccs7_attention_hijacking: return "CCS-7";
    }
    return "CCS-?";
}

std::string_view display_name(Vulnerability v) {
    switch (v) {
    case Vulnerability::ccs1_authority_hallucination: return "Authority Hallucination";
    case Vulnerability::ccs2_context_poisoning: return "Context Poisoning";
    case Vulnerability::ccs3_goal_misalignment: return "Goal Misalignment";
    case Vulnerability::ccs4_identity_confusion: return "Identity Confusion";
    case Vulnerability::ccs5_source_interference: return "Source Interference";
    case Vulnerability::ccs6_cognitive_overflow: return "Cognitive Overflow";
    case Vulnerability::ccs7_attention_hijacking: return "Attention Hijacking";
    }
    return "";
}

std::optional<Vulnerability> parse_vulnerability(std::string_view id) {
    for (Vulnerability v : all_vulnerabilities()) {
        if (to_string(v) == id) return v;
    }
    return std::nullopt;
}

const std::array<Condition, kConditionCount>& all_conditions() {
    static const std::array<Condition, kConditionCount> all = {
        Condition::baseline,
        Condition::attack,
        Condition::mitigated,
    };
    return all;
}

std::string_view to_string(Condition c) {
    switch (c) {
    case Condition::baseline: return "baseline";
    case Condition::attack: return "attack";
    case Condition::mitigated: return "mitigated";
    }
    return "";
}

std::optional<Condition> parse_condition(std::string_view s) {
    for (Condition c : all_conditions()) {
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// TrialSet
// ---------------------------------------------------------------------------

TrialSet TrialSet::from_records(std::vector<TrialRecord> records) {
    TrialSet set;
    std::set<std::string_view> seen;
    for (const TrialRecord& r : records) {
        if (!seen.insert(r.trial_id).second) {
            throw DuplicateError("duplicate trial_id \"" + r.trial_id + "\"");
        }
    }

    std::sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
        return std::tie(a.vulnerability, a.architecture, a.condition, a.trial_id) <
               std::tie(b.vulnerability, b.architecture, b.condition, b.trial_id);
    });

    set.records_ = std::move(records);
    for (std::size_t i = 0; i < set.records_.size(); ++i) {
        const TrialRecord& r = set.records_[i];
        set.cells_[CellKey{r.vulnerability, r.architecture, r.condition}].push_back(i);
        set.by_id_.emplace(r.trial_id, i);
    }
    return set;
}

const TrialRecord* TrialSet::find(std::string_view trial_id) const {
    auto it = by_id_.find(trial_id);
    if (it == by_id_.end()) return nullptr;
    return &records_[it->second];
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

const json& require_field(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw SchemaError(std::string("missing required field \"") + key + "\"");
    }
    return *it;
}

std::string require_string(const json& obj, const char* key) {
    const json& v = require_field(obj, key);
    if (!v.is_string()) {
        throw SchemaError(std::string("field \"") + key + "\" must be a string");
    }
    return v.get<std::string>();
}

int require_int(const json& obj, const char* key) {
    const json& v = require_field(obj, key);
    if (!v.is_number_integer()) {
        throw SchemaError(std::string("field \"") + key + "\" must be an integer");
    }
    return v.get<int>();
}

// Payload keys the scorers require per vulnerability. Presence is part of
// the record contract; value semantics are checked by the scorer itself.
const std::vector<const char*>& required_payload_keys(Vulnerability v) {
    static const std::vector<const char*> none;
    static const std::vector<const char*> decision = {"expected_decision", "observed_decision"};
    static const std::vector<const char*> overflow = {"actionable_item_count"};
    static const std::vector<const char*> framing = {"scenario_group", "framing", "observed_decision"};
    switch (v) {
    case Vulnerability::ccs3_goal_misalignment: return decision;
    case Vulnerability::ccs6_cognitive_overflow: return overflow;
    case Vulnerability::ccs7_attention_hijacking: return framing;
    default: return none;
    }
}

Turn parse_turn(const json& jt, std::size_t position) {
    if (!jt.is_object()) {
        throw SchemaError("turns[" + std::to_string(position) + "] must be an object");
    }
    Turn t;
    t.index = require_int(jt, "index");
    t.text = require_string(jt, "text");
    if (auto it = jt.find("stance_value"); it != jt.end() && !it->is_null()) {
        if (!it->is_number()) throw SchemaError("field \"stance_value\" must be a number");
        double s = it->get<double>();
        if (!std::isfinite(s) || s < -1.0 || s > 1.0) {
            throw SchemaError("field \"stance_value\" must lie in [-1, 1]");
        }
        t.stance_value = s;
    }
    return t;
}

} // namespace

TrialRecord parse_trial_line(std::string_view line) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed record: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError("record must be an object");

    int schema = require_int(obj, "cpt_schema");
    if (schema != kTrialSchemaVersion) {
        throw SchemaError("unsupported cpt_schema " + std::to_string(schema));
    }

    TrialRecord rec;
    rec.trial_id = require_string(obj, "trial_id");
    if (rec.trial_id.empty()) throw SchemaError("field \"trial_id\" must be non-empty");

    std::string vuln = require_string(obj, "vulnerability");
    auto v = parse_vulnerability(vuln);
    if (!v) throw SchemaError("unknown vulnerability id \"" + vuln + "\"");
    rec.vulnerability = *v;

    rec.architecture = require_string(obj, "architecture");
    if (rec.architecture.empty()) throw SchemaError("field \"architecture\" must be non-empty");

    std::string cond = require_string(obj, "condition");
    auto c = parse_condition(cond);
    if (!c) throw SchemaError("unknown condition \"" + cond + "\"");
    rec.condition = *c;

    const json& jturns = require_field(obj, "turns");
    if (!jturns.is_array() || jturns.empty()) {
        throw SchemaError("field \"turns\" must be a non-empty array");
    }
    for (std::size_t i = 0; i < jturns.size(); ++i) {
        Turn t = parse_turn(jturns[i], i);
        if (t.index != static_cast<int>(i)) {
            throw SchemaError("turn indices must be contiguous from 0");
        }
        rec.turns.push_back(std::move(t));
    }

    if (auto it = obj.find("payload"); it != obj.end()) {
        if (!it->is_object()) throw SchemaError("field \"payload\" must be an object");
        rec.payload = *it;
    }

    if (auto it = obj.find("decoding_meta"); it != obj.end() && !it->is_null()) {
        if (!it->is_object()) throw SchemaError("field \"decoding_meta\" must be an object");
        DecodingMeta m;
        const json& jm = *it;
        const json& temp = require_field(jm, "temperature");
        if (!temp.is_number()) throw SchemaError("field \"temperature\" must be a number");
        m.temperature = temp.get<double>();
        m.max_tokens = require_int(jm, "max_tokens");
        rec.decoding_meta = m;
    }

    // Unknown top-level keys ride along in payload so forward-compatible
    // scorers can see them; explicit payload entries win on collision.
    static const std::set<std::string_view> known = {
        "cpt_schema", "trial_id", "vulnerability", "architecture",
        "condition", "turns", "payload", "decoding_meta",
    };
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.contains(it.key()) && !rec.payload.contains(it.key())) {
            rec.payload[it.key()] = it.value();
        }
    }

    for (const char* key : required_payload_keys(rec.vulnerability)) {
        if (!rec.payload.contains(key)) {
            throw SchemaError(std::string("missing required field \"") + key + "\" for " +
                              std::string(to_string(rec.vulnerability)));
        }
    }

    return rec;
}

TrialSet load_trial_set(std::istream& in, std::string_view source_name) {
    std::vector<TrialRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            records.push_back(parse_trial_line(line));
        } catch (const Error& e) {
            std::ostringstream msg;
            msg << source_name << ":" << lineno << ": " << e.what();
            // Rethrow with the location prefix but the original family.
            if (dynamic_cast<const SchemaError*>(&e)) throw SchemaError(msg.str());
            throw ParseError(msg.str());
        }
    }
    return TrialSet::from_records(std::move(records));
}

TrialSet load_trial_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open trial log \"" + path.string() + "\"");
    return load_trial_set(in, path.string());
}

std::string serialize_trial_line(const TrialRecord& record) {
    json obj;
    obj["cpt_schema"] = kTrialSchemaVersion;
    obj["trial_id"] = record.trial_id;
    obj["vulnerability"] = to_string(record.vulnerability);
    obj["architecture"] = record.architecture;
    obj["condition"] = to_string(record.condition);
    json jturns = json::array();
    for (const Turn& t : record.turns) {
        json jt;
        jt["index"] = t.index;
        jt["text"] = t.text;
        if (t.stance_value) jt["stance_value"] = *t.stance_value;
        jturns.push_back(std::move(jt));
    }
    obj["turns"] = std::move(jturns);
    if (!record.payload.empty()) obj["payload"] = record.payload;
    if (record.decoding_meta) {
        obj["decoding_meta"] = {
            {"temperature", record.decoding_meta->temperature},
            {"max_tokens", record.decoding_meta->max_tokens},
        };
    }
    return obj.dump();
}

void write_trial_set(const TrialSet& set, std::ostream& out) {
    for (const TrialRecord& r : set.records()) {
        out << serialize_trial_line(r) << '\n';
    }
}

} // namespace cpt
