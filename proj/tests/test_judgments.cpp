#include "doctest.h"

#include "passdrop/errors.hpp"
#include "passdrop/judgments.hpp"
#include "passdrop/log.hpp"

#include <algorithm>
#include <random>
#include <sstream>

using namespace passdrop;

namespace {

std::vector<TokenScore> tokens(std::initializer_list<double> lps) {
    std::vector<TokenScore> out;
    int i = 0;
    for (double lp : lps) out.push_back({"t" + std::to_string(i++), lp});
    return out;
}

SentenceScore scored(const std::string& pair, Voice v, std::initializer_list<double> lps) {
    return make_sentence_score(pair, v, tokens(lps));
}

Rating filler(const std::string& pid, int idx, bool grammatical, int score) {
    return {pid, "filler" + std::to_string(idx), ItemType::filler, grammatical, std::nullopt, score, idx};
}

Rating stim(const std::string& pid, const std::string& item, Voice v, int score) {
    return {pid, item, ItemType::stimulus, std::nullopt, v, score, 0};
}

// Captures warnings for the lifetime of the guard.
struct WarningCapture {
    std::vector<std::string> messages;
    WarningCapture() {
        set_warning_sink([this](std::string_view m) { messages.emplace_back(m); });
    }
    ~WarningCapture() { set_warning_sink(nullptr); }
};

} // namespace

TEST_CASE("score_sentence sums and normalizes") {
    auto s = score_sentence(tokens({-1.0, -2.0, -3.0}));
    CHECK(s.sum_logprob == -6.0);
    CHECK(s.token_count == 3);
    CHECK(s.normalized == -2.0);
    CHECK(score_sentence(tokens({-0.5})).normalized == -0.5);
    CHECK_THROWS_AS(score_sentence({}), ScoreError);
}

TEST_CASE("score_sentence positive log-probabilities") {
    WarningCapture warnings;
    const auto s = score_sentence(tokens({-1.0, 5e-7}));
    CHECK(s.sum_logprob == -1.0);
    CHECK(warnings.messages.size() == 1);
    CHECK_THROWS_AS(score_sentence(tokens({-1.0, 1e-3})), ScoreError);
    CHECK_THROWS_AS(score_sentence(tokens({-1.0, std::nan("")})), ScoreError);
    CHECK_THROWS_AS(score_sentence(tokens({-std::numeric_limits<double>::infinity()})), ScoreError);
}

TEST_CASE("normalization is invariant to duplicating every token") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> lp(-12.0, 0.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<TokenScore> t, twice;
        const int n = 1 + static_cast<int>(rng() % 20);
        for (int i = 0; i < n; ++i) t.push_back({"w", lp(rng)});
        twice = t;
        twice.insert(twice.end(), t.begin(), t.end());
        CHECK(score_sentence(twice).normalized == doctest::Approx(score_sentence(t).normalized).epsilon(1e-12));
    }
}

TEST_CASE("item_passive_drop is active minus passive") {
    auto a = scored("p", Voice::active, {-2.0});
    auto p = scored("p", Voice::passive, {-2.5});
    CHECK(item_passive_drop(a, p) == 0.5);
    CHECK(item_passive_drop(a, scored("p", Voice::passive, {-2.0})) == 0.0);
    CHECK_THROWS_AS(item_passive_drop(a, scored("q", Voice::passive, {-1.0})), PairError);
    CHECK_THROWS_AS(item_passive_drop(a, scored("p", Voice::active, {-1.0})), PairError);
}

TEST_CASE("item_passive_drop antisymmetry") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> lp(-15.0, 0.0);
    for (int trial = 0; trial < 500; ++trial) {
        auto a = make_sentence_score("p", Voice::active, {{"a", lp(rng)}, {"b", lp(rng)}});
        auto p = make_sentence_score("p", Voice::passive, {{"a", lp(rng)}, {"b", lp(rng)}, {"c", lp(rng)}});
        // Swapping which score plays which role negates the drop exactly.
        auto a2 = p, p2 = a;
        a2.voice = Voice::active;
        p2.voice = Voice::passive;
        CHECK(item_passive_drop(a2, p2) == -item_passive_drop(a, p));
    }
}

TEST_CASE("ratings validation") {
    CHECK_THROWS_AS(validate_rating(stim("p", "x", Voice::active, 50)), ValidationError);
    CHECK_THROWS_AS(validate_rating(stim("p", "x", Voice::active, 101)), ValidationError);
    CHECK_THROWS_AS(validate_rating(stim("p", "x", Voice::active, -1)), ValidationError);
    CHECK_NOTHROW(validate_rating(stim("p", "x", Voice::active, 0)));
    CHECK_NOTHROW(validate_rating(stim("p", "x", Voice::active, 100)));
    Rating no_voice = stim("p", "x", Voice::active, 10);
    no_voice.voice.reset();
    CHECK_THROWS_AS(validate_rating(no_voice), ValidationError);
    Rating f = filler("p", 0, true, 10);
    f.grammatical_expected.reset();
    CHECK_THROWS_AS(validate_rating(f), ValidationError);
}

TEST_CASE("exclusion threshold is more than 15 misses") {
    std::vector<Rating> r;
    for (int i = 0; i < 16; ++i) r.push_back(filler("sixteen", i, false, 80));
    for (int i = 0; i < 15; ++i) r.push_back(filler("fifteen", i, true, 20));
    for (int i = 15; i < 30; ++i) r.push_back(filler("fifteen", i, true, 90));
    r.push_back(filler("fifteen", 99, false, 10));
    const auto ex = exclude_participants(r);
    CHECK(ex.excluded == std::set<std::string>{"sixteen"});
    CHECK(ex.kept == std::set<std::string>{"fifteen"});
    CHECK(ex.filler_misses.at("sixteen") == 16);
    CHECK(ex.filler_misses.at("fifteen") == 15);
    const auto kept = apply_exclusions(r, ex);
    CHECK(std::none_of(kept.begin(), kept.end(), [](const Rating& x) { return x.participant_id == "sixteen"; }));
}

TEST_CASE("exclusion is monotone in misses") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Rating> r;
        const int n = static_cast<int>(rng() % 40);
        for (int i = 0; i < n; ++i) {
            const bool g = rng() % 2;
            r.push_back(filler("p", i, g, (rng() % 2) ? 10 : 90));
        }
        r.push_back(filler("p", 1000, true, 90));
        const bool before = exclude_participants(r).excluded.count("p");
        r.push_back(filler("p", 1001, true, 5)); // one more miss
        const bool after = exclude_participants(r).excluded.count("p");
        CHECK((!before || after));
    }
}

TEST_CASE("human passive drop") {
    const auto pairs = generate_pairs();
    const auto& p = pairs.front();
    std::vector<Rating> r{stim("a", p.pair_id, Voice::active, 80), stim("b", p.pair_id, Voice::active, 90),
                          stim("c", p.pair_id, Voice::passive, 20), stim("d", p.pair_id, Voice::passive, 30)};
    const auto d = human_passive_drop(r, DropScope::item, pairs);
    REQUIRE(d.size() == 1);
    CHECK(d[0].drop == 60.0);
    CHECK(d[0].n == 4);
    CHECK(d[0].key == p.pair_id);

    const auto by_verb = human_passive_drop(r, DropScope::verb, pairs);
    REQUIRE(by_verb.size() == 1);
    CHECK(by_verb[0].key == std::string(p.verb.lemma));
    const auto by_class = human_passive_drop(r, DropScope::klass, pairs);
    REQUIRE(by_class.size() == 1);
    CHECK(by_class[0].key == std::string(to_string(p.class_id())));

    std::vector<Rating> same{stim("a", p.pair_id, Voice::active, 30), stim("b", p.pair_id, Voice::passive, 30)};
    CHECK(human_passive_drop(same, DropScope::item, pairs)[0].drop == 0.0);
}

TEST_CASE("one-voice keys are skipped with a warning") {
    WarningCapture warnings;
    const auto pairs = generate_pairs();
    std::vector<Rating> r{stim("a", pairs[0].pair_id, Voice::active, 80)};
    CHECK(human_passive_drop(r, DropScope::item, pairs).empty());
    CHECK(warnings.messages.size() == 1);
    std::vector<Rating> unknown{stim("a", "nope", Voice::active, 80)};
    CHECK_THROWS_AS(human_passive_drop(unknown, DropScope::item, pairs), ValidationError);
}

TEST_CASE("human drop is invariant under row permutation") {
    const auto pairs = generate_pairs();
    std::mt19937_64 rng(4);
    std::vector<Rating> r;
    for (int i = 0; i < 400; ++i) {
        const auto& p = pairs[rng() % 30];
        int score = static_cast<int>(rng() % 100);
        if (score == 50) score = 51;
        r.push_back(stim("p" + std::to_string(rng() % 10), p.pair_id, (rng() % 2) ? Voice::active : Voice::passive, score));
    }
    const auto base = human_passive_drop(r, DropScope::verb, pairs);
    for (int k = 0; k < 5; ++k) {
        std::shuffle(r.begin(), r.end(), rng);
        const auto again = human_passive_drop(r, DropScope::verb, pairs);
        REQUIRE(again.size() == base.size());
        for (std::size_t i = 0; i < base.size(); ++i) {
            CHECK(again[i].key == base[i].key);
            CHECK(again[i].drop == doctest::Approx(base[i].drop).epsilon(1e-12));
        }
    }
}

TEST_CASE("aggregate_verb_drop means") {
    std::vector<ItemDrop> items;
    for (int i = 1; i <= 5; ++i) items.push_back({"last", "f" + std::to_string(i), "", double(i)});
    auto d = aggregate_verb_drop(items);
    REQUIRE(d.size() == 1);
    CHECK(d[0].drop == 3.0);
    CHECK(d[0].n == 5);
    CHECK_FALSE(d[0].ci_low);

    std::vector<ItemDrop> seeds;
    for (int i = 1; i <= 5; ++i) seeds.push_back({"cost", "f" + std::to_string(i), "s1", double(i)});
    for (int i = 3; i <= 7; ++i) seeds.push_back({"cost", "f" + std::to_string(i - 2), "s2", double(i)});
    CHECK(aggregate_verb_drop(seeds)[0].drop == 4.0);

    std::vector<ItemDrop> one{{"take", "f1", "", 2.5}};
    auto single = aggregate_verb_drop(one, BootstrapConfig{200, 0.95, 1});
    CHECK(single[0].drop == 2.5);
    CHECK(*single[0].ci_low == 2.5);
    CHECK(*single[0].ci_high == 2.5);
}

TEST_CASE("aggregation linearity over disjoint equal-size frame sets") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ItemDrop> a, b;
        for (int i = 0; i < 5; ++i) {
            a.push_back({"v", "a" + std::to_string(i), "", nd(rng)});
            b.push_back({"v", "b" + std::to_string(i), "", nd(rng)});
        }
        std::vector<ItemDrop> both = a;
        both.insert(both.end(), b.begin(), b.end());
        const double expected = (aggregate_verb_drop(a)[0].drop + aggregate_verb_drop(b)[0].drop) / 2;
        CHECK(aggregate_verb_drop(both)[0].drop == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("verb CIs bracket the drop and are reproducible") {
    std::vector<ItemDrop> items;
    std::mt19937_64 rng(6);
    std::normal_distribution<double> nd(1.0, 2.0);
    for (const char* v : {"last", "take", "require"})
        for (int i = 0; i < 5; ++i) items.push_back({v, "f" + std::to_string(i), "", nd(rng)});
    const auto a = aggregate_verb_drop(items, BootstrapConfig{500, 0.95, 9});
    const auto b = aggregate_verb_drop(items, BootstrapConfig{500, 0.95, 9});
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(*a[i].ci_low <= a[i].drop);
        CHECK(a[i].drop <= *a[i].ci_high);
        CHECK(*a[i].ci_low == *b[i].ci_low);
        CHECK(*a[i].ci_high == *b[i].ci_high);
    }
}

TEST_CASE("human verb CIs resample participants") {
    const auto pairs = generate_pairs();
    std::vector<Rating> r;
    std::mt19937_64 rng(7);
    for (int pid = 0; pid < 20; ++pid)
        for (int k = 0; k < 10; ++k) {
            const auto& p = pairs[static_cast<std::size_t>(k)];
            const bool act = (pid + k) % 2;
            int score = act ? 60 + static_cast<int>(rng() % 40) : static_cast<int>(rng() % 40);
            r.push_back(stim("p" + std::to_string(pid), p.pair_id, act ? Voice::active : Voice::passive, score));
        }
    const auto d = human_verb_drop_with_ci(r, pairs, BootstrapConfig{300, 0.95, 3});
    REQUIRE_FALSE(d.empty());
    for (const auto& x : d) {
        CHECK(*x.ci_low <= x.drop);
        CHECK(x.drop <= *x.ci_high);
        CHECK(x.drop > 0);
    }
}

TEST_CASE("model_item_drops lists mismatched ids") {
    const auto pairs = generate_pairs();
    std::vector<SentenceScore> scores;
    for (const auto& p : pairs) {
        scores.push_back(scored(p.pair_id, Voice::active, {-1.0}));
        scores.push_back(scored(p.pair_id, Voice::passive, {-2.0}));
    }
    const auto drops = model_item_drops(scores, pairs, "s");
    CHECK(drops.size() == 140);
    CHECK(std::all_of(drops.begin(), drops.end(), [](const ItemDrop& d) { return d.drop == 1.0; }));

    scores.erase(scores.begin() + 1); // first pair loses its passive
    scores.push_back(scored("bogus.pair", Voice::active, {-1.0}));
    try {
        model_item_drops(scores, pairs, "s");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find(pairs[0].pair_id) != std::string::npos);
        CHECK(msg.find("bogus.pair") != std::string::npos);
    }
}

TEST_CASE("ratings and scores round-trip through files") {
    std::vector<Rating> r{stim("a", "duration.last.f1", Voice::active, 77), filler("a", 3, false, 12)};
    std::stringstream ss;
    write_ratings(ss, r);
    const auto back = read_ratings(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[0].score == 77);
    CHECK(back[0].voice == Voice::active);
    CHECK(back[1].grammatical_expected == false);

    std::istringstream bare("participant_id\titem_id\titem_type\tgrammatical_expected\tvoice\tscore\tpresentation_index\n"
                            "p\tx\tstimulus\t\tpassive\t40\t2\n");
    CHECK(read_ratings(bare).size() == 1);
    std::istringstream fifty("participant_id\titem_id\titem_type\tgrammatical_expected\tvoice\tscore\tpresentation_index\n"
                             "p\tx\tstimulus\t\tpassive\t50\t2\n");
    CHECK_THROWS_AS(read_ratings(fifty), ValidationError);

    std::vector<SentenceScore> s{scored("x", Voice::active, {-1.25, -0.5}), scored("x", Voice::passive, {-3.0})};
    std::stringstream sc;
    write_sentence_scores(sc, s);
    const auto sback = read_sentence_scores(sc);
    REQUIRE(sback.size() == 2);
    CHECK(sback[0].normalized == s[0].normalized);
    CHECK(sback[0].sum_logprob == s[0].sum_logprob);
    CHECK(sback[1].voice == Voice::passive);
}
