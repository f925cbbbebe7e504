#pragma once

// Synthetic analysis inputs with known per-verb drops.
//   model drop for verb i, frame k: 0.05 * i + 0.01 * k
//   human drop for verb i: 11 + 2 * i (active rated 80)
//   corpus counts for verb i: 1000 * (i + 1) active, 10 passive
// Participant p00 misses 16 fillers and is excluded.

#include "passdrop/corpus_voice.hpp"
#include "passdrop/judgments.hpp"
#include "passdrop/lexicon.hpp"
#include "passdrop/stimuli.hpp"

#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace fixture {

inline std::size_t verb_index(std::string_view lemma) {
    const auto lex = passdrop::lexicon();
    for (std::size_t i = 0; i < lex.size(); ++i)
        if (lex[i].lemma == lemma) return i;
    return lex.size();
}

inline double model_drop(std::size_t verb, std::size_t frame) { return 0.05 * verb + 0.01 * frame; }
inline int human_drop(std::size_t verb) { return 11 + 2 * static_cast<int>(verb); }

// Frame position of each pair within its verb, in stimulus order.
inline std::map<std::string, std::size_t> frame_positions(const std::vector<passdrop::SentencePair>& pairs) {
    std::map<std::string, std::size_t> out, seen;
    for (const auto& p : pairs) out[p.pair_id] = seen[std::string(p.verb.lemma)]++;
    return out;
}

inline std::vector<passdrop::SentenceScore> model_scores(const std::vector<passdrop::SentencePair>& pairs,
                                                         double offset = 0.0) {
    using namespace passdrop;
    const auto pos = frame_positions(pairs);
    std::vector<SentenceScore> out;
    for (const auto& p : pairs) {
        const double d = model_drop(verb_index(p.verb.lemma), pos.at(p.pair_id));
        const double a = -2.0 - offset;
        out.push_back(make_sentence_score(p.pair_id, Voice::active, {{"a", a}, {".", a}}, "fixture"));
        out.push_back(make_sentence_score(p.pair_id, Voice::passive, {{"p", a - d}, {".", a - d}}, "fixture"));
    }
    return out;
}

inline std::vector<passdrop::Rating> ratings(const std::vector<passdrop::SentencePair>& pairs, int participants = 12) {
    using namespace passdrop;
    std::vector<Rating> out;
    const auto fillers = default_fillers();
    for (int p = 0; p < participants; ++p) {
        const std::string pid = fmt::format("p{:02}", p);
        int idx = 0;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const Voice v = (i + static_cast<std::size_t>(p)) % 2 ? Voice::passive : Voice::active;
            const int score = v == Voice::active ? 80 : 80 - human_drop(verb_index(pairs[i].verb.lemma));
            out.push_back({pid, pairs[i].pair_id, ItemType::stimulus, std::nullopt, v, score, idx++});
        }
        int misses = p == 0 ? 16 : p % 4;
        for (std::size_t f = 0; f < fillers.size(); ++f) {
            const bool g = fillers[f].grammatical;
            const bool miss = misses-- > 0;
            const int score = (g != miss) ? 90 : 10;
            out.push_back({pid, fmt::format("filler{:02}", f), ItemType::filler, g, std::nullopt, score, idx++});
        }
    }
    return out;
}

inline passdrop::corpus::CountTable counts() {
    passdrop::corpus::CountTable t;
    const auto lex = passdrop::lexicon();
    for (std::size_t i = 0; i < lex.size(); ++i) {
        const std::string l(lex[i].lemma);
        t[l] = {l, 1000 * (i + 1), 10};
    }
    return t;
}

struct Files {
    std::filesystem::path dir, stimuli, scores_a, scores_b, ratings, counts;

    explicit Files(const std::string& tag) {
        using namespace passdrop;
        dir = std::filesystem::temp_directory_path() / fmt::format("passdrop-{}-{}", tag, std::random_device{}());
        std::filesystem::create_directories(dir);
        const auto pairs = generate_pairs();
        stimuli = dir / "stimuli.tsv";
        scores_a = dir / "seed1.tsv";
        scores_b = dir / "seed2.tsv";
        ratings = dir / "ratings.tsv";
        counts = dir / "counts.tsv";
        {
            std::ofstream o(stimuli);
            write_stimuli(o, pairs);
        }
        {
            std::ofstream o(scores_a);
            write_sentence_scores(o, model_scores(pairs));
        }
        {
            std::ofstream o(scores_b);
            write_sentence_scores(o, model_scores(pairs, 0.5));
        }
        {
            std::ofstream o(ratings);
            write_ratings(o, fixture::ratings(pairs));
        }
        {
            std::ofstream o(counts);
            std::vector<std::string> lemmas;
            for (const auto& v : lexicon()) lemmas.emplace_back(v.lemma);
            write_ratio_table(o, corpus::ratio_table(fixture::counts(), lemmas));
        }
    }
    ~Files() { std::filesystem::remove_all(dir); }
    Files(const Files&) = delete;
    Files& operator=(const Files&) = delete;
};

} // namespace fixture
