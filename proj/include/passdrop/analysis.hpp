#pragma once

#include "passdrop/corpus_voice.hpp"
#include "passdrop/judgments.hpp"
#include "passdrop/stats.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace passdrop::analysis {

// Resampling unit for model per-verb CIs: every (frame, score set) drop, or
// one drop per frame averaged over score sets.
enum class ModelCiUnit { item, frame };

std::string_view to_string(ModelCiUnit u);
ModelCiUnit parse_model_ci_unit(std::string_view s); // throws FormatError

struct AnalysisConfig {
    std::uint64_t seed = 1;
    int bootstrap_iters = 2000;
    int perm_iters = 9999;
    double level = 0.95;
    ModelCiUnit model_ci_unit = ModelCiUnit::item;

    bool operator==(const AnalysisConfig&) const = default;
};

// An empty stimuli path means the built-in stimulus set. Each score file is one
// score set (e.g. one model seed); its file stem becomes the seed_id.
struct AnalysisInputs {
    std::filesystem::path stimuli;
    std::vector<std::filesystem::path> scores;
    std::optional<std::filesystem::path> ratings;
    std::optional<std::filesystem::path> counts;
};

// Seed streams derived from AnalysisConfig::seed with derive_seed().
inline constexpr std::uint64_t kStreamModelVerbCi = 1;
inline constexpr std::uint64_t kStreamHumanVerbCi = 2;
inline constexpr std::uint64_t kStreamModelHumanCi = 3;
inline constexpr std::uint64_t kStreamRatioDropCi = 4;
inline constexpr std::uint64_t kStreamModelContrast = 100; // + class index
inline constexpr std::uint64_t kStreamHumanContrast = 200; // + class index

struct InputDigest {
    std::string role; // stimuli, scores, ratings, counts
    std::string path; // absolute; empty for built-in stimuli
    std::string sha256;

    bool operator==(const InputDigest&) const = default;
};

struct Provenance {
    AnalysisConfig config;
    std::string config_hash;
    std::map<std::string, std::uint64_t> seeds;
    std::vector<InputDigest> inputs;
};

struct VerbSummary {
    std::string verb;
    VerbClass klass = VerbClass::agent_patient;
    std::optional<PassiveDrop> model;
    std::optional<PassiveDrop> human;
    std::optional<corpus::RatioRow> ratio;
};

struct ClassContrast {
    std::string source; // "model" or "human"
    VerbClass klass = VerbClass::agent_patient;
    int n_class = 0;
    int n_baseline = 0;
    stats::PermutationResult<double> result;
};

struct ExclusionSummary {
    int participants = 0;
    std::vector<std::string> excluded;
};

struct AnalysisReport {
    std::vector<VerbSummary> per_verb_drops; // lexicon order
    std::vector<ItemDrop> model_item_drops;
    std::vector<ClassContrast> class_contrasts;
    std::optional<stats::CorrelationResult<double>> model_human_correlation;
    std::optional<stats::CorrelationResult<double>> ratio_drop_correlation;
    std::optional<ExclusionSummary> exclusions;
    Provenance provenance;
};

// Throws ValidationError when nothing is analysable (no scores and no ratings)
// or when scores and stimuli disagree; IoError on unreadable inputs.
AnalysisReport run_analysis(const AnalysisInputs& inputs, const AnalysisConfig& config);

std::string to_json(const AnalysisReport& report);
AnalysisReport report_from_json(std::string_view text); // throws FormatError

// Inputs and config recorded in the provenance block. Throws ValidationError
// if any input file is missing or its digest no longer matches.
std::pair<AnalysisInputs, AnalysisConfig> rerun_request(const Provenance& provenance);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path); // throws IoError

// Delimited tables written next to the JSON document.
void write_verb_table(std::ostream& os, const AnalysisReport& report);
void write_contrast_table(std::ostream& os, const AnalysisReport& report);
void write_item_drops(std::ostream& os, std::span<const ItemDrop> items);

} // namespace passdrop::analysis
