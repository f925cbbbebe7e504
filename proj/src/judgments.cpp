#include "passdrop/judgments.hpp"

#include "passdrop/errors.hpp"
#include "passdrop/log.hpp"
#include "passdrop/stats.hpp"
#include "passdrop/tsv.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace passdrop {

ScoreSummary score_sentence(std::span<const TokenScore> tokens) {
    if (tokens.empty()) throw ScoreError("cannot score a sentence with no tokens");
    ScoreSummary s;
    for (const auto& t : tokens) {
        double lp = t.logprob;
        if (!std::isfinite(lp)) throw ScoreError(fmt::format("non-finite logprob for token '{}'", t.token_text));
        if (lp > kPositiveLogprobSlack)
            throw ScoreError(fmt::format("positive logprob {} for token '{}': malformed scorer output", lp, t.token_text));
        if (lp > 0) {
            warn(fmt::format("clamping small positive logprob {} for token '{}' to 0", lp, t.token_text));
            lp = 0;
        }
        s.sum_logprob += lp;
    }
    s.token_count = static_cast<int>(tokens.size());
    s.normalized = s.sum_logprob / s.token_count;
    return s;
}

SentenceScore make_sentence_score(std::string pair_id, Voice voice, std::vector<TokenScore> tokens,
                                  std::string model_name) {
    const ScoreSummary s = score_sentence(tokens);
    SentenceScore out;
    out.pair_id = std::move(pair_id);
    out.voice = voice;
    out.token_scores = std::move(tokens);
    out.sum_logprob = s.sum_logprob;
    out.token_count = s.token_count;
    out.normalized = s.normalized;
    out.model_name = std::move(model_name);
    return out;
}

double item_passive_drop(const SentenceScore& active, const SentenceScore& passive) {
    if (active.pair_id != passive.pair_id)
        throw PairError(fmt::format("pair mismatch: '{}' vs '{}'", active.pair_id, passive.pair_id));
    if (active.voice == passive.voice)
        throw PairError(fmt::format("pair '{}': both scores are {}", active.pair_id, to_string(active.voice)));
    // Positional, so swapping the arguments negates the result.
    return active.normalized - passive.normalized;
}

// --- Ratings -----------------------------------------------------------------

namespace {

const std::vector<std::string_view> kRatingColumns = {
    "participant_id", "item_id", "item_type", "grammatical_expected", "voice", "score", "presentation_index"};

bool is_miss(const Rating& r) {
    if (r.item_type != ItemType::filler || !r.grammatical_expected) return false;
    return *r.grammatical_expected ? r.score < 50 : r.score > 50;
}

} // namespace

void validate_rating(const Rating& r) {
    const auto who = fmt::format("rating by '{}' on '{}'", r.participant_id, r.item_id);
    if (r.participant_id.empty() || r.item_id.empty()) throw ValidationError(who + ": missing participant or item id");
    if (r.score < 0 || r.score > 100) throw ValidationError(fmt::format("{}: score {} outside [0, 100]", who, r.score));
    if (r.score == 50) throw ValidationError(who + ": score of exactly 50 is not a valid response");
    if (r.item_type == ItemType::filler && !r.grammatical_expected)
        throw ValidationError(who + ": filler without grammatical_expected");
    if (r.item_type == ItemType::stimulus && !r.voice) throw ValidationError(who + ": stimulus without voice");
}

std::vector<Rating> read_ratings(std::istream& is) {
    std::string line;
    if (!tsv::next_row(is, line)) throw FormatError("ratings file is empty");
    if (line.starts_with("#passdrop-ratings")) {
        if (line != "#passdrop-ratings v1") throw FormatError(fmt::format("ratings file: unsupported version '{}'", line));
        if (!tsv::next_row(is, line)) throw FormatError("ratings file: missing column header");
    }
    if (tsv::split(line) != kRatingColumns) throw FormatError(fmt::format("ratings file: unexpected header '{}'", line));

    std::vector<Rating> out;
    std::size_t row = 1;
    while (tsv::next_row(is, line)) {
        ++row;
        auto c = tsv::split(line);
        if (c.size() != kRatingColumns.size())
            throw FormatError(fmt::format("ratings file row {}: expected {} columns", row, kRatingColumns.size()));
        Rating r;
        r.participant_id = std::string(c[0]);
        r.item_id = std::string(c[1]);
        if (c[2] == "stimulus")
            r.item_type = ItemType::stimulus;
        else if (c[2] == "filler")
            r.item_type = ItemType::filler;
        else
            throw FormatError(fmt::format("ratings file row {}: unknown item_type '{}'", row, c[2]));
        if (!c[3].empty()) r.grammatical_expected = tsv::parse_bool(c[3], "grammatical_expected");
        if (!c[4].empty()) r.voice = parse_voice(c[4]);
        r.score = static_cast<int>(tsv::parse_int(c[5], "score"));
        r.presentation_index = c[6].empty() ? 0 : static_cast<int>(tsv::parse_int(c[6], "presentation_index"));
        try {
            validate_rating(r);
        } catch (const ValidationError& e) {
            throw ValidationError(fmt::format("ratings file row {}: {}", row, e.what()));
        }
        out.push_back(std::move(r));
    }
    return out;
}

void write_ratings(std::ostream& os, std::span<const Rating> ratings) {
    tsv::write_header(os, "ratings", 1, kRatingColumns);
    for (const auto& r : ratings) {
        os << tsv::field(r.participant_id) << '\t' << tsv::field(r.item_id) << '\t' << to_string(r.item_type) << '\t'
           << (r.grammatical_expected ? (*r.grammatical_expected ? "true" : "false") : "") << '\t'
           << (r.voice ? to_string(*r.voice) : "") << '\t' << r.score << '\t' << r.presentation_index << '\n';
    }
}

ExclusionResult exclude_participants(std::span<const Rating> ratings) {
    ExclusionResult out;
    std::map<std::string, int> fillers_seen;
    for (const auto& r : ratings) {
        validate_rating(r);
        out.filler_misses.try_emplace(r.participant_id, 0);
        if (r.item_type == ItemType::filler) ++fillers_seen[r.participant_id];
        if (is_miss(r)) ++out.filler_misses[r.participant_id];
    }
    for (const auto& [pid, misses] : out.filler_misses) {
        if (!fillers_seen.count(pid)) warn(fmt::format("participant '{}' rated no fillers", pid));
        (misses > kMaxFillerMisses ? out.excluded : out.kept).insert(pid);
    }
    return out;
}

std::vector<Rating> apply_exclusions(std::span<const Rating> ratings, const ExclusionResult& exclusions) {
    std::vector<Rating> out;
    for (const auto& r : ratings)
        if (!exclusions.excluded.count(r.participant_id)) out.push_back(r);
    return out;
}

// --- Drops -------------------------------------------------------------------

std::string_view to_string(DropScope s) {
    switch (s) {
    case DropScope::item: return "item";
    case DropScope::verb: return "verb";
    case DropScope::klass: return "class";
    }
    return "item";
}

namespace {

struct VoiceSums {
    double active = 0.0;
    double passive = 0.0;
    int n_active = 0;
    int n_passive = 0;

    void add(Voice v, double x) {
        if (v == Voice::active) {
            active += x;
            ++n_active;
        } else {
            passive += x;
            ++n_passive;
        }
    }
    bool complete() const { return n_active > 0 && n_passive > 0; }
    double drop() const { return active / n_active - passive / n_passive; }
};

std::map<std::string, const SentencePair*> index_pairs(std::span<const SentencePair> stimuli) {
    std::map<std::string, const SentencePair*> m;
    for (const auto& p : stimuli) m[p.pair_id] = &p;
    return m;
}

std::string scope_key(DropScope scope, const SentencePair& p) {
    switch (scope) {
    case DropScope::item: return p.pair_id;
    case DropScope::verb: return std::string(p.verb.lemma);
    case DropScope::klass: return std::string(to_string(p.class_id()));
    }
    return p.pair_id;
}

} // namespace

std::vector<PassiveDrop> human_passive_drop(std::span<const Rating> ratings, DropScope scope,
                                            std::span<const SentencePair> stimuli) {
    const auto pairs = index_pairs(stimuli);
    std::map<std::string, VoiceSums> sums;
    for (const auto& r : ratings) {
        if (r.item_type != ItemType::stimulus || !r.voice) continue;
        auto it = pairs.find(r.item_id);
        if (it == pairs.end()) throw ValidationError(fmt::format("rating for unknown stimulus '{}'", r.item_id));
        sums[scope_key(scope, *it->second)].add(*r.voice, r.score);
    }
    std::vector<PassiveDrop> out;
    for (const auto& [key, s] : sums) {
        if (!s.complete()) {
            warn(fmt::format("{} '{}' has ratings in only one voice; skipped", to_string(scope), key));
            continue;
        }
        out.push_back({scope, key, s.drop(), s.n_active + s.n_passive, std::nullopt, std::nullopt});
    }
    return out;
}

std::vector<PassiveDrop> aggregate_verb_drop(std::span<const ItemDrop> items, const std::optional<BootstrapConfig>& ci) {
    std::map<std::string, std::vector<double>> by_verb;
    for (const auto& it : items) by_verb[it.verb].push_back(it.drop);
    std::vector<PassiveDrop> out;
    std::uint64_t verb_index = 0;
    for (const auto& [verb, drops] : by_verb) {
        const auto v = stats::as_vector(drops);
        PassiveDrop d{DropScope::verb, verb, v.mean(), static_cast<int>(drops.size()), std::nullopt, std::nullopt};
        if (ci) {
            const auto iv = stats::bootstrap_ci(v, stats::Statistic::mean, ci->iterations, ci->level,
                                                splitmix64(ci->seed + verb_index));
            d.ci_low = std::min(iv.low, d.drop);
            d.ci_high = std::max(iv.high, d.drop);
        }
        ++verb_index;
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<PassiveDrop> human_verb_drop_with_ci(std::span<const Rating> ratings,
                                                 std::span<const SentencePair> stimuli, const BootstrapConfig& ci) {
    const auto pairs = index_pairs(stimuli);
    // Per participant, per verb sums; participants are the resampling unit.
    std::map<std::string, std::map<std::string, VoiceSums>> by_participant;
    for (const auto& r : ratings) {
        if (r.item_type != ItemType::stimulus || !r.voice) continue;
        auto it = pairs.find(r.item_id);
        if (it == pairs.end()) throw ValidationError(fmt::format("rating for unknown stimulus '{}'", r.item_id));
        by_participant[r.participant_id][std::string(it->second->verb.lemma)].add(*r.voice, r.score);
    }
    std::vector<const std::map<std::string, VoiceSums>*> units;
    for (const auto& [pid, m] : by_participant) units.push_back(&m);

    auto out = human_passive_drop(ratings, DropScope::verb, stimuli);
    std::uint64_t verb_index = 0;
    for (auto& d : out) {
        auto stat = [&](std::span<const std::size_t> idx) {
            VoiceSums total;
            for (auto i : idx) {
                auto it = units[i]->find(d.key);
                if (it == units[i]->end()) continue;
                total.active += it->second.active;
                total.passive += it->second.passive;
                total.n_active += it->second.n_active;
                total.n_passive += it->second.n_passive;
            }
            return total.complete() ? total.drop() : std::numeric_limits<double>::quiet_NaN();
        };
        const auto iv = stats::bootstrap_percentile<double>(units.size(), ci.iterations, ci.level,
                                                            splitmix64(ci.seed + verb_index), stat);
        d.ci_low = std::min(iv.low, d.drop);
        d.ci_high = std::max(iv.high, d.drop);
        ++verb_index;
    }
    return out;
}

std::vector<ItemDrop> model_item_drops(std::span<const SentenceScore> scores, std::span<const SentencePair> stimuli,
                                       const std::string& seed_id) {
    std::map<std::string, std::pair<const SentenceScore*, const SentenceScore*>> by_pair;
    std::vector<std::string> unknown;
    const auto pairs = index_pairs(stimuli);
    for (const auto& s : scores) {
        if (!pairs.count(s.pair_id)) {
            unknown.push_back(s.pair_id);
            continue;
        }
        auto& slot = by_pair[s.pair_id];
        (s.voice == Voice::active ? slot.first : slot.second) = &s;
    }
    std::vector<std::string> missing;
    std::vector<ItemDrop> out;
    for (const auto& p : stimuli) {
        auto it = by_pair.find(p.pair_id);
        if (it == by_pair.end() || !it->second.first || !it->second.second) {
            missing.push_back(p.pair_id);
            continue;
        }
        out.push_back({std::string(p.verb.lemma), p.frame_id, seed_id,
                       item_passive_drop(*it->second.first, *it->second.second)});
    }
    if (!missing.empty() || !unknown.empty()) {
        std::sort(unknown.begin(), unknown.end());
        unknown.erase(std::unique(unknown.begin(), unknown.end()), unknown.end());
        std::string msg = fmt::format("score set '{}' does not match the stimuli", seed_id);
        if (!missing.empty()) msg += fmt::format("; unscored pair_ids: {}", fmt::join(missing, ", "));
        if (!unknown.empty()) msg += fmt::format("; unknown pair_ids: {}", fmt::join(unknown, ", "));
        throw ValidationError(msg);
    }
    return out;
}

void write_sentence_scores(std::ostream& os, std::span<const SentenceScore> scores) {
    tsv::write_header(os, "scores", 1, {"pair_id", "voice", "token_count", "sum_logprob", "normalized", "model_name"});
    for (const auto& s : scores)
        os << tsv::field(s.pair_id) << '\t' << to_string(s.voice) << '\t' << s.token_count << '\t'
           << tsv::format_double(s.sum_logprob) << '\t' << tsv::format_double(s.normalized) << '\t'
           << tsv::field(s.model_name) << '\n';
}

std::vector<SentenceScore> read_sentence_scores(std::istream& is) {
    tsv::expect_header(is, "scores", 1, {"pair_id", "voice", "token_count", "sum_logprob", "normalized", "model_name"},
                       "sentence score file");
    std::vector<SentenceScore> out;
    std::string line;
    while (tsv::next_row(is, line)) {
        auto c = tsv::split(line);
        if (c.size() != 6) throw FormatError(fmt::format("sentence score file: malformed row '{}'", line));
        SentenceScore s;
        s.pair_id = std::string(c[0]);
        s.voice = parse_voice(c[1]);
        s.token_count = static_cast<int>(tsv::parse_int(c[2], "token_count"));
        s.sum_logprob = tsv::parse_double(c[3], "sum_logprob");
        s.normalized = tsv::parse_double(c[4], "normalized");
        s.model_name = std::string(c[5]);
        if (s.token_count < 1) throw FormatError(fmt::format("sentence score for '{}': token_count < 1", s.pair_id));
        out.push_back(std::move(s));
    }
    return out;
}

void write_passive_drops(std::ostream& os, std::span<const PassiveDrop> drops) {
    tsv::write_header(os, "drops", 1, {"scope", "key", "drop", "n", "ci_low", "ci_high"});
    for (const auto& d : drops)
        os << to_string(d.scope) << '\t' << tsv::field(d.key) << '\t' << tsv::format_double(d.drop) << '\t' << d.n
           << '\t' << (d.ci_low ? tsv::format_double(*d.ci_low) : "") << '\t'
           << (d.ci_high ? tsv::format_double(*d.ci_high) : "") << '\n';
}

} // namespace passdrop
