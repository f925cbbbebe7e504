#include "doctest.h"

#include "passdrop/analysis.hpp"
#include "passdrop/errors.hpp"
#include "support/fixtures.hpp"

#include <fstream>
#include <sstream>

using namespace passdrop;
using namespace passdrop::analysis;
namespace fs = std::filesystem;

namespace {

AnalysisConfig quick_config(std::uint64_t seed = 7) { return {seed, 300, 999, 0.95}; }

AnalysisInputs all_inputs(const fixture::Files& f) { return {f.stimuli, {f.scores_a, f.scores_b}, f.ratings, f.counts}; }

} // namespace

TEST_CASE("sha256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK_THROWS_AS(sha256_file("/nonexistent/file"), IoError);
}

TEST_CASE("end to end on synthetic inputs") {
    fixture::Files f("analysis");
    const auto rep = run_analysis(all_inputs(f), quick_config());

    REQUIRE(rep.per_verb_drops.size() == 28);
    CHECK(rep.model_item_drops.size() == 280);
    const auto pairs = generate_pairs();
    for (const auto& s : rep.per_verb_drops) {
        CAPTURE(s.verb);
        const auto i = fixture::verb_index(s.verb);
        REQUIRE(s.model);
        REQUIRE(s.human);
        REQUIRE(s.ratio);
        // Independent mean over the verb's frames.
        double sum = 0;
        int n = 0;
        const auto pos = fixture::frame_positions(pairs);
        for (const auto& p : pairs)
            if (p.verb.lemma == s.verb) {
                sum += fixture::model_drop(i, pos.at(p.pair_id));
                ++n;
            }
        CHECK(s.model->drop == doctest::Approx(sum / n).epsilon(1e-12));
        CHECK(s.model->n == 2 * n);
        CHECK(*s.model->ci_low <= s.model->drop);
        CHECK(*s.model->ci_high >= s.model->drop);
        CHECK(s.human->drop == doctest::Approx(fixture::human_drop(i)));
        CHECK(s.ratio->active_count == 1000 * (i + 1));
        CHECK(s.klass == lookup_verb(s.verb).class_id);
    }
    REQUIRE(rep.exclusions);
    CHECK(rep.exclusions->participants == 12);
    CHECK(rep.exclusions->excluded == std::vector<std::string>{"p00"});

    CHECK(rep.class_contrasts.size() == 12);
    for (const auto& c : rep.class_contrasts) {
        CHECK(c.result.p_value > 0);
        CHECK(c.result.p_value <= 1);
        CHECK(c.n_baseline > 0);
    }
    REQUIRE(rep.model_human_correlation);
    CHECK(rep.model_human_correlation->r_s == doctest::Approx(1.0));
    CHECK(rep.model_human_correlation->n == 28);
    REQUIRE(rep.ratio_drop_correlation);
    CHECK(rep.ratio_drop_correlation->r_s == doctest::Approx(1.0));

    const auto& prov = rep.provenance;
    CHECK(prov.inputs.size() == 5);
    CHECK(prov.seeds.at("master") == 7);
    CHECK(prov.seeds.count("model_verb_ci") == 1);
    CHECK(prov.seeds.count("human_contrast.duration") == 1);
}

TEST_CASE("determinism and seed sensitivity") {
    fixture::Files f("analysis-det");
    const auto a = to_json(run_analysis(all_inputs(f), quick_config()));
    CHECK(a == to_json(run_analysis(all_inputs(f), quick_config())));
    const auto other = run_analysis(all_inputs(f), quick_config(8));
    CHECK(to_json(other) != a);
    // Point estimates do not depend on the seed.
    const auto base = run_analysis(all_inputs(f), quick_config());
    for (std::size_t i = 0; i < base.per_verb_drops.size(); ++i)
        CHECK(base.per_verb_drops[i].model->drop == other.per_verb_drops[i].model->drop);
}

TEST_CASE("model CI resampling unit") {
    fixture::Files f("analysis-unit");
    auto cfg = quick_config();
    const auto items = run_analysis(all_inputs(f), cfg);
    cfg.model_ci_unit = ModelCiUnit::frame;
    const auto frames = run_analysis(all_inputs(f), cfg);
    for (std::size_t i = 0; i < items.per_verb_drops.size(); ++i) {
        const auto& a = *items.per_verb_drops[i].model;
        const auto& b = *frames.per_verb_drops[i].model;
        CHECK(a.n == 2 * b.n);
        CHECK(a.drop == doctest::Approx(b.drop).epsilon(1e-12));
    }
    CHECK(frames.provenance.config_hash != items.provenance.config_hash);
    CHECK(report_from_json(to_json(frames)).provenance.config == cfg);
    CHECK(parse_model_ci_unit("frame") == ModelCiUnit::frame);
    CHECK_THROWS_AS(parse_model_ci_unit("verb"), FormatError);
}

TEST_CASE("JSON round trip") {
    fixture::Files f("analysis-json");
    const auto text = to_json(run_analysis(all_inputs(f), quick_config()));
    CHECK(to_json(report_from_json(text)) == text);

    const auto model_only = to_json(run_analysis({{}, {f.scores_a}, std::nullopt, std::nullopt}, quick_config()));
    CHECK(to_json(report_from_json(model_only)) == model_only);

    CHECK_THROWS_AS(report_from_json("not json"), FormatError);
    CHECK_THROWS_AS(report_from_json("{\"format\":\"other\"}"), FormatError);
    CHECK_THROWS_AS(report_from_json("{\"format\":\"passdrop-analysis\",\"version\":1}"), FormatError);
    CHECK_THROWS_AS(report_from_json("{\"format\":\"passdrop-analysis\",\"version\":2}"), FormatError);
}

TEST_CASE("zero active counts survive serialization") {
    fixture::Files f("analysis-inf");
    {
        auto counts = fixture::counts();
        counts.at("last").active_count = 0;
        std::vector<std::string> lemmas;
        for (const auto& v : lexicon()) lemmas.emplace_back(v.lemma);
        std::ofstream o(f.counts);
        write_ratio_table(o, corpus::ratio_table(counts, lemmas));
    }
    const auto text = to_json(run_analysis(all_inputs(f), quick_config()));
    CHECK(to_json(report_from_json(text)) == text);
}

TEST_CASE("provenance reproduces the run") {
    fixture::Files f("analysis-prov");
    const auto rep = run_analysis(all_inputs(f), quick_config(11));
    const auto [inputs, cfg] = rerun_request(report_from_json(to_json(rep)).provenance);
    CHECK(cfg == quick_config(11));
    CHECK(to_json(run_analysis(inputs, cfg)) == to_json(rep));

    // Built-in stimuli are recorded with an empty path.
    const auto builtin = run_analysis({{}, {f.scores_a}, std::nullopt, std::nullopt}, quick_config());
    CHECK(builtin.provenance.inputs.front().path.empty());
    const auto [in2, cfg2] = rerun_request(builtin.provenance);
    CHECK(to_json(run_analysis(in2, cfg2)) == to_json(builtin));

    SUBCASE("changed input") {
        std::ofstream(f.ratings, std::ios::app) << "\n";
        try {
            rerun_request(rep.provenance);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("ratings.tsv changed") != std::string::npos);
        }
    }
    SUBCASE("missing input") {
        fs::remove(f.counts);
        CHECK_THROWS_AS(rerun_request(rep.provenance), ValidationError);
    }
    SUBCASE("tampered config") {
        auto prov = rep.provenance;
        prov.config.seed = 12;
        CHECK_THROWS_AS(rerun_request(prov), ValidationError);
    }
}

TEST_CASE("invalid requests") {
    fixture::Files f("analysis-bad");
    CHECK_THROWS_AS(run_analysis({f.stimuli, {}, std::nullopt, std::nullopt}, quick_config()), ValidationError);
    CHECK_THROWS_AS(run_analysis(all_inputs(f), {1, 0, 999, 0.95}), ValidationError);
    CHECK_THROWS_AS(run_analysis(all_inputs(f), {1, 10, 10, 0.95}), ValidationError);
    CHECK_THROWS_AS(run_analysis(all_inputs(f), {1, 10, 999, 1.0}), ValidationError);
    CHECK_THROWS_AS(run_analysis({f.dir / "nope.tsv", {f.scores_a}, std::nullopt, std::nullopt}, quick_config()), IoError);

    // Scores missing one pair and carrying an unknown one.
    auto scores = fixture::model_scores(generate_pairs());
    const std::string dropped = scores[4].pair_id;
    scores.erase(scores.begin() + 4, scores.begin() + 6);
    scores.push_back(make_sentence_score("bogus.f9", Voice::active, {{"x", -1.0}}));
    scores.push_back(make_sentence_score("bogus.f9", Voice::passive, {{"x", -1.0}}));
    {
        std::ofstream o(f.scores_b);
        write_sentence_scores(o, scores);
    }
    try {
        run_analysis(all_inputs(f), quick_config());
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find(dropped) != std::string::npos);
        CHECK(msg.find("bogus.f9") != std::string::npos);
        CHECK(msg.find("seed2.tsv") != std::string::npos);
    }
}

TEST_CASE("tables") {
    fixture::Files f("analysis-tables");
    const auto rep = run_analysis(all_inputs(f), quick_config());
    auto lines = [](const std::string& s) { return std::count(s.begin(), s.end(), '\n'); };

    std::ostringstream verbs, contrasts, items;
    write_verb_table(verbs, rep);
    write_contrast_table(contrasts, rep);
    write_item_drops(items, rep.model_item_drops);
    CHECK(verbs.str().starts_with("#passdrop-verb-drops v1\n"));
    CHECK(lines(verbs.str()) == 2 + 28);
    CHECK(contrasts.str().starts_with("#passdrop-class-contrasts v1\n"));
    CHECK(lines(contrasts.str()) == 2 + 12);
    CHECK(lines(items.str()) == 2 + 280);
}
