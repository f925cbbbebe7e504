#include "passdrop/cli.hpp"

#include "passdrop/analysis.hpp"
#include "passdrop/corpus_voice.hpp"
#include "passdrop/errors.hpp"
#include "passdrop/judgments.hpp"
#include "passdrop/lexicon.hpp"
#include "passdrop/lists.hpp"
#include "passdrop/protocol.hpp"
#include "passdrop/report.hpp"
#include "passdrop/scorer_client.hpp"
#include "passdrop/stimuli.hpp"
#include "passdrop/tsv.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fmt/ranges.h>

#include "CLI11.hpp"

namespace passdrop::cli {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
    std::uint64_t seed = 1;
    int bootstrap_iters = 2000;
    int perm_iters = 9999;
    std::string model_ci_unit = "item";
    std::string scorer;
    bool keep_going = false;
    std::string out_dir = ".";
};

// Keys a config file may set, mapped to their flags. Boolean keys take true/false.
const std::set<std::string>& config_keys() {
    static const std::set<std::string> keys{"seed",   "bootstrap-iters", "perm-iters", "model-ci-unit",
                                            "scorer", "keep-going",      "out-dir"};
    return keys;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

// Config file: "key = value" lines, '#' comments; the first entry must be
// "passdrop-config = 1". Returns flags to place ahead of the command line so
// that explicit flags win.
std::vector<std::string> config_args(const fs::path& path, const std::vector<std::string>& cli_args) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot read config file '{}'", path.string()));
    std::vector<std::string> out;
    std::string line;
    bool versioned = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto text = trim(line.substr(0, line.find('#')));
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ValidationError(fmt::format("{}:{}: expected 'key = value'", path.string(), lineno));
        const auto key = trim(text.substr(0, eq));
        const auto value = trim(text.substr(eq + 1));
        if (!versioned) {
            if (key != "passdrop-config" || value != "1")
                throw ValidationError(fmt::format("{}: first entry must be 'passdrop-config = 1'", path.string()));
            versioned = true;
            continue;
        }
        if (!config_keys().count(key))
            throw ValidationError(fmt::format("{}:{}: unknown key '{}'", path.string(), lineno, key));
        const auto flag = "--" + key;
        bool overridden = false;
        for (const auto& a : cli_args)
            if (a == flag || a.starts_with(flag + "=")) overridden = true;
        if (overridden) continue;
        if (key == "keep-going") {
            if (tsv::parse_bool(value, key)) out.push_back(flag);
        } else {
            out.push_back(flag);
            out.push_back(value);
        }
    }
    if (!versioned) throw ValidationError(fmt::format("{}: missing 'passdrop-config = 1'", path.string()));
    return out;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError(fmt::format("cannot create directory '{}': {}", path.parent_path().string(), ec.message()));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    return out;
}

void close_out(std::ofstream& os, const fs::path& path) {
    os.close();
    if (!os) throw IoError(fmt::format("error writing '{}'", path.string()));
}

template <typename Fn>
void write_file(const fs::path& path, Fn fn) {
    auto os = open_out(path);
    fn(os);
    close_out(os, path);
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read '{}'", path.string()));
    return in;
}

// Input-format errors carry the file name.
template <typename Fn>
auto read_file(const fs::path& path, Fn fn) {
    auto in = open_in(path);
    try {
        return fn(in);
    } catch (const IoError&) {
        throw;
    } catch (const FormatError& e) {
        throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
    } catch (const ValidationError& e) {
        throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
    } catch (const ProtocolError& e) {
        throw ProtocolError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::vector<SentencePair> load_stimuli(const std::string& path) {
    if (path.empty()) return generate_pairs();
    return read_file(path, [](std::istream& in) { return read_stimuli(in); });
}

std::vector<Filler> load_fillers(const std::string& path) {
    if (path.empty()) return default_fillers();
    return read_file(path, [](std::istream& in) { return read_fillers(in); });
}

// Published class means of the human passive drop, drawn for orientation only.
const std::vector<report::ReferenceLine> kHumanReferences{
    {59.4, "published duration mean 59.4", "duration"},
    {8.0, "published ooze mean 8.0", "ooze"},
};

std::vector<report::ScatterPoint> verb_points(const analysis::AnalysisReport& rep, bool model_x, bool ratio_x) {
    std::vector<report::ScatterPoint> pts;
    auto ci = [](const std::optional<PassiveDrop>& d) -> std::optional<std::pair<double, double>> {
        if (!d || !d->ci_low || !d->ci_high) return std::nullopt;
        return std::pair{*d->ci_low, *d->ci_high};
    };
    for (const auto& s : rep.per_verb_drops) {
        if (ratio_x) {
            // Same pairing as the analysis correlation; verbs never seen actively have no log ratio.
            const auto& ydrop = s.model ? s.model : s.human;
            if (!s.ratio || !std::isfinite(s.ratio->log10_ratio)) continue;
            pts.push_back({s.ratio->log10_ratio, ydrop->drop, s.verb, std::string(to_string(s.klass)), std::nullopt, ci(ydrop)});
        } else if (model_x) {
            if (!s.model || !s.human) continue;
            pts.push_back({s.model->drop, s.human->drop, s.verb, std::string(to_string(s.klass)), ci(s.model), ci(s.human)});
        }
    }
    return pts;
}

int run_report(const GlobalOptions& g, const std::string& analysis_path, std::ostream& out) {
    const fs::path in_path = analysis_path.empty() ? fs::path(g.out_dir) / "analysis.json" : fs::path(analysis_path);
    auto in = open_in(in_path);
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    analysis::AnalysisReport rep;
    try {
        rep = analysis::report_from_json(text);
    } catch (const FormatError& e) {
        throw FormatError(fmt::format("{}: {}", in_path.string(), e.what()));
    }
    const fs::path dir(g.out_dir);
    write_file(dir / "report.tsv", [&](std::ostream& os) { analysis::write_verb_table(os, rep); });
    write_file(dir / "report_contrasts.tsv", [&](std::ostream& os) { analysis::write_contrast_table(os, rep); });
    out << fmt::format("wrote {}\n", (dir / "report.tsv").string());

    int plots = 0;
    if (auto pts = verb_points(rep, true, false); !pts.empty()) {
        const auto svg = report::emit_scatter(pts,
                                              {"model passive drop (normalized log-prob)",
                                               "human passive drop (rating points)", "Model vs human passive drop"},
                                              kHumanReferences);
        write_file(dir / "scatter_model_human.svg", [&](std::ostream& os) { os << svg; });
        out << fmt::format("wrote {}\n", (dir / "scatter_model_human.svg").string());
        ++plots;
    }
    if (auto pts = verb_points(rep, false, true); !pts.empty()) {
        const auto svg = report::emit_scatter(pts, {"log10 active:passive ratio", "passive drop", "Corpus ratio vs passive drop"});
        write_file(dir / "scatter_ratio_drop.svg", [&](std::ostream& os) { os << svg; });
        out << fmt::format("wrote {}\n", (dir / "scatter_ratio_drop.svg").string());
        ++plots;
    }
    if (plots == 0) {
        // Single source and no corpus counts: drop per verb against lexicon position.
        std::vector<report::ScatterPoint> pts;
        double i = 0;
        for (const auto& s : rep.per_verb_drops) {
            const auto& d = s.human ? s.human : s.model;
            std::optional<std::pair<double, double>> ci;
            if (d->ci_low && d->ci_high) ci = std::pair{*d->ci_low, *d->ci_high};
            pts.push_back({i++, d->drop, s.verb, std::string(to_string(s.klass)), std::nullopt, ci});
        }
        if (!pts.empty()) {
            const bool human_axis = !rep.per_verb_drops.empty() && rep.per_verb_drops.front().human.has_value();
            const auto svg = report::emit_scatter(pts, {"verb", "passive drop", "Passive drop per verb"},
                                                  human_axis ? std::span(kHumanReferences)
                                                             : std::span<const report::ReferenceLine>{});
            write_file(dir / "drops_by_verb.svg", [&](std::ostream& os) { os << svg; });
            out << fmt::format("wrote {}\n", (dir / "drops_by_verb.svg").string());
        }
    }
    if (rep.model_human_correlation)
        out << fmt::format("model-human r_s = {:.3f} (n = {})\n", rep.model_human_correlation->r_s,
                           rep.model_human_correlation->n);
    if (rep.ratio_drop_correlation)
        out << fmt::format("ratio-drop r_s = {:.3f} (n = {})\n", rep.ratio_drop_correlation->r_s,
                           rep.ratio_drop_correlation->n);
    return kExitOk;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    for (auto f : tsv::split(s, ','))
        if (auto t = trim(f); !t.empty()) out.push_back(t);
    return out;
}

int dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Minimal-pair passive-drop toolkit", "passdrop"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalOptions g;
    std::string config_path;
    app.add_option("--config", config_path, "Versioned key-value config file (flags override it)");
    app.add_option("--seed", g.seed, "Master random seed")->capture_default_str();
    app.add_option("--bootstrap-iters", g.bootstrap_iters, "Bootstrap resamples")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--perm-iters", g.perm_iters, "Permutation-test relabelings")->capture_default_str()->check(CLI::Range(99, 100000000));
    app.add_option("--model-ci-unit", g.model_ci_unit, "Resampling unit for model verb CIs")
        ->capture_default_str()
        ->check(CLI::IsMember({"item", "frame"}));
    app.add_option("--scorer", g.scorer, "Scorer command (stdin/stdout JSONL) or http:// endpoint");
    app.add_flag("--keep-going", g.keep_going, "Skip unreadable corpus files instead of failing");
    app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();

    auto* gen = app.add_subcommand("gen-stimuli", "Write the 140 minimal pairs (280 sentences)");
    std::string gen_out, gen_fillers_out;
    gen->add_option("--out", gen_out, "Stimulus file (default <out-dir>/stimuli.tsv)");
    gen->add_option("--fillers-out", gen_fillers_out, "Also write the default filler file here");

    auto* lists = app.add_subcommand("build-lists", "Build and validate the 16 counterbalanced lists");
    std::string lists_stimuli, lists_fillers;
    lists->add_option("--stimuli", lists_stimuli, "Stimulus file (default built-in)");
    lists->add_option("--fillers", lists_fillers, "Filler file (default built-in placeholders)");

    auto* score = app.add_subcommand("score", "Write scorer requests and collect sentence scores");
    std::string score_stimuli, score_responses, score_out;
    score->add_option("--stimuli", score_stimuli, "Stimulus file (default built-in)");
    score->add_option("--responses", score_responses, "Existing JSONL responses instead of running --scorer");
    score->add_option("--out", score_out, "Score table (default <out-dir>/scores.tsv)");

    auto* ingest = app.add_subcommand("ingest-ratings", "Validate ratings and apply attention-check exclusions");
    std::string ingest_ratings, ingest_stimuli;
    ingest->add_option("--ratings", ingest_ratings, "Ratings table")->required();
    ingest->add_option("--stimuli", ingest_stimuli, "Stimulus file (default built-in)");

    auto* corpus = app.add_subcommand("corpus-count", "Count active and passive occurrences per verb");
    std::vector<std::string> corpus_files;
    std::string corpus_lemmas;
    bool line_docs = false, per_sentence = false;
    unsigned threads = 1;
    corpus->add_option("files", corpus_files, "Plain-text corpus files")->required();
    corpus->add_option("--lemmas", corpus_lemmas, "Comma-separated lemmas (default all 28)");
    corpus->add_flag("--line-docs", line_docs, "Treat each line as a document");
    corpus->add_flag("--per-sentence", per_sentence, "Count sentences instead of occurrences");
    corpus->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();

    auto* analyze = app.add_subcommand("analyze", "Per-verb drops, class contrasts and correlations");
    std::string an_stimuli, an_ratings, an_counts;
    std::vector<std::string> an_scores;
    analyze->add_option("--stimuli", an_stimuli, "Stimulus file (default built-in)");
    analyze->add_option("--scores", an_scores, "Score tables, one per model seed");
    analyze->add_option("--ratings", an_ratings, "Human ratings table");
    analyze->add_option("--counts", an_counts, "Corpus count table");

    auto* rep = app.add_subcommand("report", "Emit tables and SVG plots from an analysis");
    std::string rep_analysis;
    rep->add_option("--analysis", rep_analysis, "Analysis document (default <out-dir>/analysis.json)");

    // The config file is read before the real parse so command-line flags override it.
    std::vector<std::string> args = raw_args;
    for (std::size_t i = 0; i < raw_args.size(); ++i) {
        std::string path;
        if (raw_args[i] == "--config" && i + 1 < raw_args.size())
            path = raw_args[i + 1];
        else if (raw_args[i].starts_with("--config="))
            path = raw_args[i].substr(9);
        if (path.empty()) continue;
        auto extra = config_args(path, raw_args);
        args.insert(args.begin(), extra.begin(), extra.end());
        break;
    }

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitInvalid;
    }

    const fs::path dir(g.out_dir);

    if (*gen) {
        const auto pairs = generate_pairs();
        const fs::path path = gen_out.empty() ? dir / "stimuli.tsv" : fs::path(gen_out);
        write_file(path, [&](std::ostream& os) { write_stimuli(os, pairs); });
        out << fmt::format("wrote {} sentences ({} pairs) to {}\n", pairs.size() * 2, pairs.size(), path.string());
        if (!gen_fillers_out.empty()) {
            write_file(gen_fillers_out, [](std::ostream& os) { write_fillers(os, default_fillers()); });
            out << fmt::format("wrote fillers to {}\n", gen_fillers_out);
        }
        return kExitOk;
    }

    if (*lists) {
        const auto pairs = load_stimuli(lists_stimuli);
        const auto fillers = load_fillers(lists_fillers);
        const auto built = build_experiment_lists(pairs, fillers, g.seed);
        const auto violations = validate_experiment_lists(built, pairs, fillers);
        if (!violations.empty())
            throw ValidationError(fmt::format("list validation failed: {}", fmt::join(violations, "; ")));
        for (const auto& l : built)
            write_file(dir / "lists" / (l.list_id + ".tsv"), [&](std::ostream& os) { write_experiment_list(os, l); });
        out << fmt::format("wrote {} lists to {}\n", built.size(), (dir / "lists").string());
        return kExitOk;
    }

    if (*score) {
        const auto pairs = load_stimuli(score_stimuli);
        const auto requests = protocol::make_requests(pairs);
        const fs::path req_path = dir / "requests.jsonl";
        write_file(req_path, [&](std::ostream& os) { protocol::write_requests(os, requests); });
        std::vector<protocol::ScoreResponse> responses;
        if (!score_responses.empty()) {
            responses = read_file(score_responses, [](std::istream& in) { return protocol::read_responses(in); });
        } else if (!g.scorer.empty()) {
            responses = protocol::is_http_endpoint(g.scorer) ? protocol::run_http_scorer(g.scorer, requests)
                                                             : protocol::run_subprocess_scorer(g.scorer, req_path);
            write_file(dir / "responses.jsonl", [&](std::ostream& os) {
                for (const auto& r : responses) os << protocol::to_json_line(r) << '\n';
            });
        } else {
            out << fmt::format("wrote {} requests to {}; pass --scorer or --responses to collect scores\n",
                               requests.size(), req_path.string());
            return kExitOk;
        }
        const auto scores = protocol::to_sentence_scores(requests, responses);
        const fs::path path = score_out.empty() ? dir / "scores.tsv" : fs::path(score_out);
        write_file(path, [&](std::ostream& os) { write_sentence_scores(os, scores); });
        out << fmt::format("wrote {} sentence scores to {}\n", scores.size(), path.string());
        return kExitOk;
    }

    if (*ingest) {
        const auto pairs = load_stimuli(ingest_stimuli);
        const auto ratings = read_file(ingest_ratings, [](std::istream& in) { return read_ratings(in); });
        std::set<std::string> known;
        for (const auto& p : pairs) known.insert(p.pair_id);
        std::set<std::string> unknown;
        for (const auto& r : ratings)
            if (r.item_type == ItemType::stimulus && !known.count(r.item_id)) unknown.insert(r.item_id);
        if (!unknown.empty())
            throw ValidationError(fmt::format("{}: ratings for unknown pair_ids: {}", ingest_ratings, fmt::join(unknown, ", ")));
        const auto excl = exclude_participants(ratings);
        const auto kept = apply_exclusions(ratings, excl);
        write_file(dir / "ratings_kept.tsv", [&](std::ostream& os) { write_ratings(os, kept); });
        write_file(dir / "exclusions.tsv", [&](std::ostream& os) {
            tsv::write_header(os, "exclusions", 1, {"participant_id", "filler_misses", "excluded"});
            for (const auto& [pid, misses] : excl.filler_misses)
                os << pid << '\t' << misses << '\t' << (excl.excluded.count(pid) ? "true" : "false") << '\n';
        });
        write_file(dir / "human_item_drops.tsv", [&](std::ostream& os) {
            write_passive_drops(os, human_passive_drop(kept, DropScope::item, pairs));
        });
        out << fmt::format("excluded {} of {} participants (more than {} filler misses); kept {} ratings\n",
                           excl.excluded.size(), excl.kept.size() + excl.excluded.size(), kMaxFillerMisses, kept.size());
        return kExitOk;
    }

    if (*corpus) {
        std::vector<std::string> lemmas = split_commas(corpus_lemmas);
        if (lemmas.empty())
            for (const auto& v : lexicon()) lemmas.emplace_back(v.lemma);
        for (const auto& l : lemmas) lookup_verb(l);
        corpus::CountOptions opt;
        opt.document_mode = line_docs ? corpus::DocumentMode::line : corpus::DocumentMode::file;
        opt.count_mode = per_sentence ? corpus::CountMode::sentences : corpus::CountMode::occurrences;
        opt.threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
        opt.keep_going = g.keep_going;
        std::vector<fs::path> paths(corpus_files.begin(), corpus_files.end());
        const auto result = corpus::count_corpus(paths, lemmas, opt);
        for (const auto& f : result.failed_files) err << fmt::format("warning: skipped unreadable file '{}'\n", f);
        const auto rows = corpus::ratio_table(result.counts, lemmas);
        const fs::path path = dir / "counts.tsv";
        write_file(path, [&](std::ostream& os) { corpus::write_ratio_table(os, rows); });
        out << fmt::format("counted {} sentences; wrote {}\n", result.sentences, path.string());
        return kExitOk;
    }

    if (*analyze) {
        analysis::AnalysisInputs in;
        in.stimuli = an_stimuli;
        in.scores.assign(an_scores.begin(), an_scores.end());
        if (!an_ratings.empty()) in.ratings = an_ratings;
        if (!an_counts.empty()) in.counts = an_counts;
        const analysis::AnalysisConfig cfg{g.seed, g.bootstrap_iters, g.perm_iters, 0.95,
                                           analysis::parse_model_ci_unit(g.model_ci_unit)};
        const auto result = analysis::run_analysis(in, cfg);
        write_file(dir / "analysis.json", [&](std::ostream& os) { os << analysis::to_json(result); });
        write_file(dir / "verb_drops.tsv", [&](std::ostream& os) { analysis::write_verb_table(os, result); });
        write_file(dir / "class_contrasts.tsv", [&](std::ostream& os) { analysis::write_contrast_table(os, result); });
        if (!result.model_item_drops.empty())
            write_file(dir / "item_drops.tsv",
                       [&](std::ostream& os) { analysis::write_item_drops(os, result.model_item_drops); });
        if (result.exclusions)
            out << fmt::format("excluded {} of {} participants\n", result.exclusions->excluded.size(),
                               result.exclusions->participants);
        out << fmt::format("wrote {}\n", (dir / "analysis.json").string());
        return kExitOk;
    }

    if (*rep) return run_report(g, rep_analysis, out);
    return kExitInvalid;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(args, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.is_io() ? kExitIo : kExitInvalid;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

} // namespace passdrop::cli
