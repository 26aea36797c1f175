#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpt/errors.hpp"

namespace cpt {

// ---------------------------------------------------------------------------
// Vulnerability taxonomy
// ---------------------------------------------------------------------------

enum class Vulnerability : int {
    ccs1_authority_hallucination = 1,
    ccs2_context_poisoning = 2,
    ccs3_goal_misalignment = 3,
    ccs4_identity_confusion = 4,
    ccs5_source_interference = 5,
    ccs6_cognitive_overflow = 6,
    ccs7_attention_hijacking = 7,
};

inline constexpr int kVulnerabilityCount = 7;

// All seven categories in id order.
const std::array<Vulnerability, kVulnerabilityCount>& all_vulnerabilities();

// Stable id string, "CCS-1" .. "CCS-7".
std::string_view to_string(Vulnerability v);

// Human-readable category name, e.g. "Authority Hallucination".
std::string_view display_name(Vulnerability v);

std::optional<Vulnerability> parse_vulnerability(std::string_view id);

// ---------------------------------------------------------------------------
// Trial conditions
// ---------------------------------------------------------------------------

enum class Condition : int {
    baseline = 0,
    attack = 1,
    mitigated = 2,
};

inline constexpr int kConditionCount = 3;

const std::array<Condition, kConditionCount>& all_conditions();
std::string_view to_string(Condition c);
std::optional<Condition> parse_condition(std::string_view s);

// ---------------------------------------------------------------------------
// Trial records
// ---------------------------------------------------------------------------

struct Turn {
    int index = 0;
    std::string text;
    std::optional<double> stance_value; // in [-1, 1] when present

    bool operator==(const Turn&) const = default;
};

struct DecodingMeta {
    double temperature = 0.0;
    int max_tokens = 0;

    bool operator==(const DecodingMeta&) const = default;
};

struct TrialRecord {
    std::string trial_id;
    Vulnerability vulnerability = Vulnerability::ccs1_authority_hallucination;
    std::string architecture;
    Condition condition = Condition::baseline;
    std::vector<Turn> turns; // non-empty, indices contiguous from 0
    nlohmann::json payload = nlohmann::json::object();
    std::optional<DecodingMeta> decoding_meta;

    // The model response under scoring: the final turn's text.
    const std::string& response_text() const { return turns.back().text; }

    bool operator==(const TrialRecord&) const = default;
};

// Grouping key for the (vulnerability, architecture, condition) index.
struct CellKey {
    Vulnerability vulnerability;
    std::string architecture;
    Condition condition;

    auto operator<=>(const CellKey&) const = default;
};

// Immutable, canonically ordered collection of trial records with a
// per-cell index. Safe to share across threads once constructed.
class TrialSet {
public:
    TrialSet() = default;

    // Validates trial_id uniqueness, sorts records by
    // (vulnerability, architecture, condition, trial_id) and builds the index.
    static TrialSet from_records(std::vector<TrialRecord> records);

    const std::vector<TrialRecord>& records() const { return records_; }
    const std::map<CellKey, std::vector<std::size_t>>& cells() const { return cells_; }

    bool empty() const { return records_.empty(); }
    std::size_t size() const { return records_.size(); }

    const TrialRecord* find(std::string_view trial_id) const;

private:
    std::vector<TrialRecord> records_;
    std::map<CellKey, std::vector<std::size_t>> cells_;
    std::map<std::string, std::size_t, std::less<>> by_id_;
};

// Current trial-log schema version; every line must carry cpt_schema = 1.
inline constexpr int kTrialSchemaVersion = 1;

// Parses one trial-log line. Unknown top-level keys are preserved inside
// payload; explicit payload keys win on collision.
// Throws ParseError on malformed syntax, SchemaError on contract violations.
TrialRecord parse_trial_line(std::string_view line);

// Loads a newline-delimited trial log. Blank lines are permitted. Any line
// error aborts with "<source>:<line>: ..." diagnostics; duplicate trial ids
// raise DuplicateError.
TrialSet load_trial_set(std::istream& in, std::string_view source_name = "<stream>");
TrialSet load_trial_file(const std::filesystem::path& path);

// Canonical single-line serialization (UTF-8, no trailing newline).
std::string serialize_trial_line(const TrialRecord& record);

// Writes every record as one line terminated by '\n', in canonical order.
void write_trial_set(const TrialSet& set, std::ostream& out);

} // namespace cpt
