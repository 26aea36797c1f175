#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cpt/config.hpp"
#include "cpt/trial.hpp"

namespace cpt {

// splitmix64: the fixed, documented generator behind all synthetic output.
// Identical seeds yield byte-identical logs.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_unit() < p; }

private:
    std::uint64_t state_;
};

// Ground-truth generation recipe for one vulnerability x architecture.
// Every generated trial is constructed so the scorer's verdict equals the
// drawn ground truth; success_probability(c) is therefore the oracle ASR.
struct SynthProfile {
    Vulnerability vulnerability = Vulnerability::ccs1_authority_hallucination;
    std::string architecture;
    double baseline_success_probability = 0.0;
    double attack_success_probability = 0.0;
    double mitigated_success_probability = 0.0;
    double refusal_probability = 0.0; // CCS-1 only
    double drift_slope = 0.1;         // CCS-2 success slope, stance units/turn
    int actionable_items = 5;         // CCS-6 honest-content pair
    int response_tokens = 500;        //
    std::uint64_t seed = 0;           // mandatory; no ambient randomness
    bool seed_set = false;
    int n_trials = 1000;              // per condition (CCS-7: pairs)

    double success_probability(Condition c) const;
    void validate() const; // ConfigError on out-of-range parameters
};

std::vector<SynthProfile> load_profiles(std::istream& in,
                                        std::string_view source_name = "<profiles>");
std::vector<SynthProfile> load_profiles_file(const std::filesystem::path& path);

// Emits trial-log lines for every profile (all three conditions, in
// profile order). The config supplies the markers and thresholds the
// generated content must clear; incompatible parameter combinations are
// rejected so the oracle property cannot silently break.
void generate_trials(std::span<const SynthProfile> profiles, std::ostream& out,
                     const ScorerConfig& cfg = ScorerConfig::defaults());
std::string generate_trials_string(std::span<const SynthProfile> profiles,
                                   const ScorerConfig& cfg = ScorerConfig::defaults());

// The configured ground-truth attack success probability for a condition.
double expected_asr(const SynthProfile& profile, Condition condition);

} // namespace cpt
