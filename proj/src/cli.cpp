#include "cpt/cli.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "cpt/aggregate.hpp"
#include "cpt/config.hpp"
#include "cpt/gate.hpp"
#include "cpt/report.hpp"
#include "cpt/risk.hpp"
#include "cpt/scorers.hpp"
#include "cpt/standards.hpp"
#include "cpt/synth.hpp"
#include "cpt/trial.hpp"

namespace cpt {

namespace {

struct CommonOpts {
    std::string input;
    std::string config;
    std::string out;
    std::string format = "machine";
    std::string thresholds;
    bool strict = false;
};

// Output sink: --out file or stdout.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw ConfigError("cannot open output file \"" + path + "\"");
        }
    }

    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open input file \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Config load_config(const CommonOpts& opts) {
    if (opts.config.empty()) return Config::defaults();
    return Config::from_file(opts.config);
}

GateThresholds load_thresholds(const CommonOpts& opts) {
    if (opts.thresholds.empty()) return GateThresholds{};
    return GateThresholds::from_file(opts.thresholds);
}

void report_warnings(const std::vector<std::string>& warnings) {
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

int fail_on_strict(const CommonOpts& opts, const std::vector<std::string>& warnings) {
    if (opts.strict && !warnings.empty()) {
        std::cerr << "error: --strict promotes " << warnings.size() << " warning(s) to failure\n";
        return kExitInput;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// Subcommand handlers
// ---------------------------------------------------------------------------

int cmd_score(const CommonOpts& opts) {
    Config config = load_config(opts);
    std::string bytes = read_file(opts.input);
    std::istringstream in(bytes);
    TrialSet set = load_trial_set(in, opts.input);

    std::vector<ScoreOutcome> outcomes = score_all(set, config.scorer);
    std::vector<ScoredTrial> rows = join_outcomes(set, outcomes);

    Sink sink(opts.out);
    for (const ScoredTrial& row : rows) {
        sink.stream() << scored_trial_to_json(row).dump() << '\n';
    }
    return 0;
}

int cmd_aggregate(const CommonOpts& opts) {
    Config config = load_config(opts);
    std::string bytes = read_file(opts.input);
    std::istringstream in(bytes);
    std::vector<ScoredTrial> rows = read_scored_trials(in, opts.input);

    AggregationResult result = aggregate_scored(rows, config.impact);
    std::vector<std::string> warnings = result.warnings;
    for (const VulnAggregate& agg : result.aggregates) {
        for (const std::string& w : agg.warnings) {
            warnings.push_back(std::string(to_string(agg.vulnerability)) + ": " + w);
        }
    }
    report_warnings(warnings);
    if (int rc = fail_on_strict(opts, warnings)) return rc;

    Sink sink(opts.out);
    if (opts.format == "human") {
        sink.stream() << render_aggregates_table(result.aggregates);
    } else {
        for (const VulnAggregate& agg : result.aggregates) {
            sink.stream() << aggregate_to_json(agg).dump() << '\n';
        }
    }
    return 0;
}

int cmd_assess(const CommonOpts& opts) {
    GateThresholds thresholds = load_thresholds(opts);
    std::string bytes = read_file(opts.input);
    std::istringstream in(bytes);

    std::vector<std::string> warnings;
    std::vector<RiskInputs> inputs = risk_inputs_from_lines(in, opts.input, &warnings);
    for (const RiskInputs& i : inputs) {
        if (i.eta_missing) {
            warnings.push_back(std::string(to_string(i.vulnerability)) +
                               ": eta median missing; treated as 0 (no mitigation credit)");
        }
    }

    std::vector<RiskScore> scores = assess(inputs, thresholds.backfire_eta);
    if (!scores.empty() && scores.front().degenerate_normalization) {
        warnings.push_back("degenerate normalization: all raw scores equal");
    }
    report_warnings(warnings);
    if (int rc = fail_on_strict(opts, warnings)) return rc;

    Sink sink(opts.out);
    if (opts.format == "human") {
        sink.stream() << render_assessment_table(scores);
    } else {
        for (const RiskScore& s : scores) {
            sink.stream() << risk_score_to_json(s).dump() << '\n';
        }
    }
    return 0;
}

int cmd_gate(const CommonOpts& opts) {
    GateThresholds thresholds = load_thresholds(opts);
    std::string bytes = read_file(opts.input);
    std::istringstream in(bytes);
    std::vector<RiskScore> scores = read_risk_scores(in, opts.input);

    GateDecision decision = gate_assessment(scores, thresholds);
    Sink sink(opts.out);
    if (opts.format == "human") {
        sink.stream() << render_gate_text(decision);
    } else {
        sink.stream() << gate_to_json(decision).dump(2) << '\n';
    }
    return decision.exit_status;
}

int cmd_map(const CommonOpts& opts) {
    std::vector<RiskScore> scores;
    if (!opts.input.empty()) {
        std::string bytes = read_file(opts.input);
        std::istringstream in(bytes);
        scores = read_risk_scores(in, opts.input);
    }
    nlohmann::json doc = export_mapping(scores);
    Sink sink(opts.out);
    if (opts.format == "human") {
        sink.stream() << render_mapping_table(doc);
    } else {
        sink.stream() << doc.dump(2) << '\n';
    }
    return 0;
}

int cmd_synth(const CommonOpts& opts) {
    Config config = load_config(opts);
    std::vector<SynthProfile> profiles = load_profiles_file(opts.input);
    Sink sink(opts.out);
    generate_trials(profiles, sink.stream(), config.scorer);
    return 0;
}

int cmd_report(const CommonOpts& opts) {
    if (opts.config.empty()) {
        throw ConfigError("report requires --config; gating runs must pin "
                          "drift_slope_threshold and action_density_threshold explicitly");
    }
    Config config = Config::from_file(opts.config);
    if (!config.drift_threshold_explicit || !config.density_threshold_explicit) {
        throw ConfigError("gating runs must set drift_slope_threshold and "
                          "action_density_threshold explicitly in the config file");
    }
    GateThresholds thresholds = load_thresholds(opts);

    std::string input_bytes = read_file(opts.input);
    std::istringstream in(input_bytes);
    TrialSet set = load_trial_set(in, opts.input);

    ReportBundle bundle = build_report(set, config, thresholds);
    bundle.provenance.input_digest = digest_hex(input_bytes);
    bundle.provenance.config_digest = digest_hex(read_file(opts.config));
    bundle.provenance.generated_at = current_timestamp_utc();

    report_warnings(bundle.warnings);
    if (int rc = fail_on_strict(opts, bundle.warnings)) return rc;

    Sink sink(opts.out);
    if (opts.format == "human") {
        sink.stream() << render_report_text(bundle);
    } else {
        sink.stream() << report_to_json(bundle).dump(2) << '\n';
    }
    return bundle.gate.exit_status;
}

void add_common_flags(CLI::App* sub, CommonOpts& opts, bool input_required) {
    auto* input = sub->add_option("--input", opts.input, "input file");
    if (input_required) input->required();
    sub->add_option("--config", opts.config, "configuration file (plain-text key = value)");
    sub->add_option("--out", opts.out, "output file (default: stdout)");
    sub->add_option("--format", opts.format, "output format")
        ->check(CLI::IsMember({"machine", "human"}));
    sub->add_option("--thresholds", opts.thresholds, "deployment band threshold overrides");
    sub->add_flag("--strict", opts.strict, "promote warnings to failures");
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"cognitive pentest scoring and risk assessment"};
    app.require_subcommand(1);

    CommonOpts opts;
    int (*handler)(const CommonOpts&) = nullptr;

    struct SubSpec {
        const char* name;
        const char* help;
        bool input_required;
        int (*fn)(const CommonOpts&);
    };
    const SubSpec subs[] = {
        {"score", "score a trial log into per-trial outcomes", true, cmd_score},
        {"aggregate", "aggregate outcomes into per-vulnerability statistics", true, cmd_aggregate},
        {"assess", "compute inherent and residual risks from statistics", true, cmd_assess},
        {"gate", "map residual risks to deployment bands and a CI exit code", true, cmd_gate},
        {"map", "export the standards mapping, optionally annotated", false, cmd_map},
        {"synth", "generate seeded synthetic trial logs from profiles", true, cmd_synth},
        {"report", "run the full pipeline and emit a single report", true, cmd_report},
    };
    for (const SubSpec& spec : subs) {
        CLI::App* sub = app.add_subcommand(spec.name, spec.help);
        add_common_flags(sub, opts, spec.input_required);
        sub->callback([&handler, fn = spec.fn]() { handler = fn; });
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        return handler(opts);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

} // namespace cpt
