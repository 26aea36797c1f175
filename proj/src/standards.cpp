#include "cpt/standards.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace cpt {

using nlohmann::json;

std::string_view to_string(Framework f) {
    switch (f) {
    case Framework::owasp_llm_2025: return "OWASP_LLM_2025";
    case Framework::mitre_atlas: return "MITRE_ATLAS";
    }
    return "";
}

bool identifier_matches_pattern(const StandardRef& ref) {
    const std::string& id = ref.identifier;
    auto digits = [&](std::size_t pos, std::size_t count) {
        if (pos + count > id.size()) return false;
        for (std::size_t i = 0; i < count; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(id[pos + i]))) return false;
        }
        return true;
    };
    if (ref.framework == Framework::owasp_llm_2025) {
        // LLM\d\d:2025
        return id.size() == 10 && id.rfind("LLM", 0) == 0 && digits(3, 2) &&
               id.compare(5, 5, ":2025") == 0;
    }
    // AML\.T\d{4}(\.\d{3})?
    if (id.rfind("AML.T", 0) != 0 || !digits(5, 4)) return false;
    if (id.size() == 9) return true;
    return id.size() == 13 && id[9] == '.' && digits(10, 3);
}

namespace {

StandardRef owasp(std::string id, std::string title) {
    return StandardRef{Framework::owasp_llm_2025, std::move(id), std::move(title)};
}

StandardRef atlas(std::string id, std::string title) {
    return StandardRef{Framework::mitre_atlas, std::move(id), std::move(title)};
}

const std::map<Vulnerability, std::vector<StandardRef>>& mapping_table() {
    static const std::map<Vulnerability, std::vector<StandardRef>> table = {
        {Vulnerability::ccs1_authority_hallucination,
         {owasp("LLM09:2025", "Misinformation"),
          atlas("AML.T0048.002", "Societal Harm")}},
        {Vulnerability::ccs2_context_poisoning,
         {owasp("LLM04:2025", "Data and Model Poisoning"),
          atlas("AML.T0020", "Poison Training Data"),
          atlas("AML.T0018", "Manipulate ML Model")}},
        {Vulnerability::ccs3_goal_misalignment,
         {owasp("LLM06:2025", "Excessive Agency"),
          atlas("AML.T0051.000", "LLM Prompt Injection (Direct)"),
          atlas("AML.T0051.001", "LLM Prompt Injection (Indirect)"),
          atlas("AML.T0054", "LLM Jailbreak")}},
        {Vulnerability::ccs4_identity_confusion,
         {owasp("LLM01:2025", "Prompt Injection"),
          atlas("AML.T0051.000", "LLM Prompt Injection (Direct)"),
          atlas("AML.T0051.001", "LLM Prompt Injection (Indirect)")}},
        {Vulnerability::ccs5_source_interference,
         {owasp("LLM08:2025", "Vector and Embedding Weaknesses"),
          owasp("LLM05:2025", "Improper Output Handling"),
          atlas("AML.T0020", "Poison Training Data"),
          atlas("AML.T0051.001", "LLM Prompt Injection: Indirect")}},
        {Vulnerability::ccs6_cognitive_overflow,
         {owasp("LLM10:2025", "Unbounded Consumption"),
          atlas("AML.T0029", "Denial of AI Service"),
          atlas("AML.T0034", "Cost Harvesting")}},
        {Vulnerability::ccs7_attention_hijacking,
         {owasp("LLM01:2025", "Prompt Injection"),
          atlas("AML.T0054", "LLM Jailbreak")}},
    };
    return table;
}

json refs_to_json(const std::vector<StandardRef>& refs, Framework framework) {
    json arr = json::array();
    for (const StandardRef& r : refs) {
        if (r.framework != framework) continue;
        arr.push_back({{"id", r.identifier}, {"title", r.title}});
    }
    return arr;
}

} // namespace

const std::vector<StandardRef>& refs_for(Vulnerability v) {
    return mapping_table().at(v);
}

json export_mapping(std::span<const RiskScore> scores) {
    std::map<Vulnerability, double> residuals;
    for (const RiskScore& s : scores) residuals[s.vulnerability] = s.residual;

    std::vector<Vulnerability> order(all_vulnerabilities().begin(), all_vulnerabilities().end());
    if (!residuals.empty()) {
        std::stable_sort(order.begin(), order.end(), [&](Vulnerability a, Vulnerability b) {
            double ra = residuals.count(a) ? residuals.at(a) : -1.0;
            double rb = residuals.count(b) ? residuals.at(b) : -1.0;
            return ra > rb;
        });
    }

    json rows = json::array();
    for (Vulnerability v : order) {
        const std::vector<StandardRef>& refs = refs_for(v);
        json row;
        row["vulnerability"] = to_string(v);
        row["name"] = display_name(v);
        row["owasp"] = refs_to_json(refs, Framework::owasp_llm_2025);
        row["atlas"] = refs_to_json(refs, Framework::mitre_atlas);
        if (residuals.count(v)) row["residual_risk"] = residuals.at(v);
        rows.push_back(std::move(row));
    }

    json doc;
    doc["mapping_version"] = kMappingVersion;
    doc["rows"] = std::move(rows);
    return doc;
}

} // namespace cpt
