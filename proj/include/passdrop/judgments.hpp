#pragma once

#include "passdrop/stimuli.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace passdrop {

// Natural-log probability of one model token given its prefix.
struct TokenScore {
    std::string token_text;
    double logprob = 0.0;
};

struct ScoreSummary {
    double sum_logprob = 0.0;
    int token_count = 0;
    double normalized = 0.0;
};

struct SentenceScore {
    std::string pair_id;
    Voice voice = Voice::active;
    std::vector<TokenScore> token_scores;
    double sum_logprob = 0.0;
    int token_count = 0;
    double normalized = 0.0;
    std::string model_name;
};

// Tolerance for tiny positive log-probabilities from numerically sloppy scorers.
inline constexpr double kPositiveLogprobSlack = 1e-6;

// Sum and per-token mean of log-probabilities. Values in (0, 1e-6] are clamped
// to zero with a warning; anything larger, or an empty list, throws ScoreError.
ScoreSummary score_sentence(std::span<const TokenScore> tokens);

SentenceScore make_sentence_score(std::string pair_id, Voice voice, std::vector<TokenScore> tokens,
                                  std::string model_name = {});

// normalized(active) - normalized(passive): positive when the passive is dispreferred.
double item_passive_drop(const SentenceScore& active, const SentenceScore& passive);

// --- Human ratings ------------------------------------------------------------

struct Rating {
    std::string participant_id;
    std::string item_id; // pair_id for stimuli
    ItemType item_type = ItemType::stimulus;
    std::optional<bool> grammatical_expected; // fillers
    std::optional<Voice> voice;               // stimuli
    int score = 0;                            // [0, 100], never 50
    int presentation_index = 0;
};

// Throws ValidationError on out-of-range or midpoint scores and missing fields.
void validate_rating(const Rating& r);

// Accepts the columns participant_id, item_id, item_type, grammatical_expected,
// voice, score, presentation_index, with or without the "#passdrop-ratings v1" line.
std::vector<Rating> read_ratings(std::istream& is);
void write_ratings(std::ostream& os, std::span<const Rating> ratings);

inline constexpr int kMaxFillerMisses = 15;

struct ExclusionResult {
    std::set<std::string> kept;
    std::set<std::string> excluded;
    std::map<std::string, int> filler_misses;
};

// A filler "miss" is an ungrammatical filler rated above 50 or a grammatical
// one rated below 50. Participants with more than 15 misses are excluded.
ExclusionResult exclude_participants(std::span<const Rating> ratings);

std::vector<Rating> apply_exclusions(std::span<const Rating> ratings, const ExclusionResult& exclusions);

// --- Passive drop ------------------------------------------------------------

enum class DropScope { item, verb, klass };

std::string_view to_string(DropScope s);

struct PassiveDrop {
    DropScope scope = DropScope::item;
    std::string key;
    double drop = 0.0;
    int n = 0;
    std::optional<double> ci_low;
    std::optional<double> ci_high;
};

// Per scope key: mean(active scores) - mean(passive scores). Keys rated in only
// one voice are skipped with a warning. Output sorted by key.
std::vector<PassiveDrop> human_passive_drop(std::span<const Rating> ratings, DropScope scope,
                                            std::span<const SentencePair> stimuli);

struct ItemDrop {
    std::string verb;
    std::string frame_id;
    std::string seed_id; // identifies the score set (model seed); empty for single runs
    double drop = 0.0;
};

struct BootstrapConfig {
    int iterations = 2000;
    double level = 0.95;
    std::uint64_t seed = 0;
};

// Mean drop per verb over every (frame, seed) item, optionally with a
// percentile bootstrap CI that resamples those items. Output sorted by verb.
std::vector<PassiveDrop> aggregate_verb_drop(std::span<const ItemDrop> items,
                                             const std::optional<BootstrapConfig>& ci = std::nullopt);

// Human per-verb drops with CIs from resampling participants.
std::vector<PassiveDrop> human_verb_drop_with_ci(std::span<const Rating> ratings,
                                                 std::span<const SentencePair> stimuli, const BootstrapConfig& ci);

// Item drops for one score set. Throws ValidationError listing every pair_id
// that lacks a score in either voice and every scored id not in the stimuli.
std::vector<ItemDrop> model_item_drops(std::span<const SentenceScore> scores, std::span<const SentencePair> stimuli,
                                       const std::string& seed_id);

void write_sentence_scores(std::ostream& os, std::span<const SentenceScore> scores);
std::vector<SentenceScore> read_sentence_scores(std::istream& is);

void write_passive_drops(std::ostream& os, std::span<const PassiveDrop> drops);

} // namespace passdrop
