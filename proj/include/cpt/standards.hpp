#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpt/risk.hpp"
#include "cpt/trial.hpp"

namespace cpt {

enum class Framework {
    owasp_llm_2025,
    mitre_atlas,
};

std::string_view to_string(Framework f);

struct StandardRef {
    Framework framework = Framework::owasp_llm_2025;
    std::string identifier; // e.g. "LLM09:2025", "AML.T0048.002"
    std::string title;

    bool operator==(const StandardRef&) const = default;
};

// Version tag for the embedded mapping data.
inline constexpr std::string_view kMappingVersion = "table1-v1";

// True iff the identifier matches its framework's pattern
// (OWASP "LLM\d\d:2025"; ATLAS "AML\.T\d{4}(\.\d{3})?").
bool identifier_matches_pattern(const StandardRef& ref);

// The full mapping row for a vulnerability: OWASP references first, then
// ATLAS, in the published order.
const std::vector<StandardRef>& refs_for(Vulnerability v);

// Machine export: one row per vulnerability. When scores are provided,
// rows carry the residual risk and are sorted by it descending; otherwise
// rows appear in CCS id order.
nlohmann::json export_mapping(std::span<const RiskScore> scores = {});

} // namespace cpt
