#include "passdrop/analysis.hpp"

#include "passdrop/errors.hpp"
#include "passdrop/lexicon.hpp"
#include "passdrop/rng.hpp"
#include "passdrop/stimuli.hpp"
#include "passdrop/tsv.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <openssl/evp.h>

#include "json.hpp"

namespace passdrop::analysis {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read '{}'", path.string()));
    std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (in.bad()) throw IoError(fmt::format("error reading '{}'", path.string()));
    return data;
}

// Parse errors are reported against the file that caused them.
template <typename Fn>
auto parse_file(const std::string& data, const std::filesystem::path& path, Fn fn) {
    std::istringstream in(data);
    try {
        return fn(in);
    } catch (const IoError&) {
        throw;
    } catch (const FormatError& e) {
        throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
    } catch (const ValidationError& e) {
        throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::string absolute_path(const std::filesystem::path& p) {
    return std::filesystem::absolute(p).lexically_normal().string();
}

std::size_t class_index(VerbClass c) {
    for (std::size_t i = 0; i < kAllClasses.size(); ++i)
        if (kAllClasses[i] == c) return i;
    return 0;
}

// Spearman r_s with a percentile CI from resampling the paired points.
stats::CorrelationResult<double> spearman_with_ci(const stats::Vector<double>& x, const stats::Vector<double>& y,
                                                  const AnalysisConfig& cfg, std::uint64_t seed) {
    auto r = stats::spearman(x, y);
    const auto iv = stats::bootstrap_percentile<double>(
        static_cast<std::size_t>(x.size()), cfg.bootstrap_iters, cfg.level, seed,
        [&](std::span<const std::size_t> idx) {
            stats::Vector<double> bx(x.size()), by(y.size());
            for (std::size_t i = 0; i < idx.size(); ++i) {
                bx(static_cast<Eigen::Index>(i)) = x(static_cast<Eigen::Index>(idx[i]));
                by(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(idx[i]));
            }
            // Degenerate resamples (constant ranks) are dropped.
            if (bx.maxCoeff() == bx.minCoeff() || by.maxCoeff() == by.minCoeff())
                return std::numeric_limits<double>::quiet_NaN();
            return stats::spearman(bx, by).r_s;
        });
    r.ci_low = iv.low;
    r.ci_high = iv.high;
    return r;
}

std::vector<ClassContrast> contrasts(const std::string& source, const std::map<VerbClass, std::vector<double>>& by_class,
                                     const AnalysisConfig& cfg, std::uint64_t stream_base,
                                     std::map<std::string, std::uint64_t>& seeds) {
    std::vector<ClassContrast> out;
    auto base_it = by_class.find(VerbClass::agent_patient);
    if (base_it == by_class.end() || base_it->second.empty()) return out;
    const auto baseline = stats::as_vector(base_it->second);
    for (VerbClass c : kAllClasses) {
        if (c == VerbClass::agent_patient) continue;
        auto it = by_class.find(c);
        if (it == by_class.end() || it->second.empty()) continue;
        const auto seed = derive_seed(cfg.seed, stream_base + class_index(c));
        seeds[fmt::format("{}_contrast.{}", source, to_string(c))] = seed;
        ClassContrast cc{source, c, static_cast<int>(it->second.size()), static_cast<int>(base_it->second.size()),
                         stats::permutation_test(stats::as_vector(it->second), baseline, cfg.perm_iters, seed)};
        out.push_back(cc);
    }
    return out;
}

json opt_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<double>();
}

ordered_json drop_json(const PassiveDrop& d) {
    return ordered_json{{"drop", d.drop}, {"n", d.n}, {"ci_low", opt_number(d.ci_low)}, {"ci_high", opt_number(d.ci_high)}};
}

PassiveDrop drop_from(const json& j, const std::string& verb) {
    return PassiveDrop{DropScope::verb, verb, j.at("drop").get<double>(), j.at("n").get<int>(), opt_from(j, "ci_low"),
                       opt_from(j, "ci_high")};
}

ordered_json correlation_json(const stats::CorrelationResult<double>& c) {
    return ordered_json{{"r_s", c.r_s}, {"n", c.n}, {"ci_low", opt_number(c.ci_low)}, {"ci_high", opt_number(c.ci_high)}};
}

stats::CorrelationResult<double> correlation_from(const json& j) {
    return {j.at("r_s").get<double>(), j.at("n").get<Eigen::Index>(), opt_from(j, "ci_low"), opt_from(j, "ci_high")};
}

ordered_json config_json(const AnalysisConfig& c) {
    return ordered_json{{"seed", c.seed},   {"bootstrap_iters", c.bootstrap_iters}, {"perm_iters", c.perm_iters},
                        {"level", c.level}, {"model_ci_unit", to_string(c.model_ci_unit)}};
}

std::string opt_field(const std::optional<double>& v) { return v ? tsv::format_double(*v) : std::string(); }

} // namespace

std::string_view to_string(ModelCiUnit u) { return u == ModelCiUnit::item ? "item" : "frame"; }

ModelCiUnit parse_model_ci_unit(std::string_view s) {
    if (s == "item") return ModelCiUnit::item;
    if (s == "frame") return ModelCiUnit::frame;
    throw FormatError(fmt::format("unknown model CI unit '{}'", s));
}

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 computation failed");
    std::string out;
    for (unsigned i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
    return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

AnalysisReport run_analysis(const AnalysisInputs& inputs, const AnalysisConfig& cfg) {
    if (cfg.bootstrap_iters < 1) throw ValidationError("bootstrap iterations must be positive");
    if (cfg.perm_iters < 99) throw ValidationError("permutation iterations must be at least 99");
    if (!(cfg.level > 0 && cfg.level < 1)) throw ValidationError("confidence level must lie in (0, 1)");
    if (inputs.scores.empty() && !inputs.ratings) throw ValidationError("nothing to analyze: give score files and/or ratings");

    AnalysisReport rep;
    auto& prov = rep.provenance;
    prov.config = cfg;
    prov.config_hash = sha256_hex(config_json(cfg).dump());
    prov.seeds["master"] = cfg.seed;

    std::vector<SentencePair> stimuli;
    if (inputs.stimuli.empty()) {
        stimuli = generate_pairs();
        std::ostringstream os;
        write_stimuli(os, stimuli);
        prov.inputs.push_back({"stimuli", "", sha256_hex(os.str())});
    } else {
        const auto data = read_file(inputs.stimuli);
        stimuli = parse_file(data, inputs.stimuli, [](std::istream& in) { return read_stimuli(in); });
        prov.inputs.push_back({"stimuli", absolute_path(inputs.stimuli), sha256_hex(data)});
    }

    // Model side: one item drop per (verb, frame, score set).
    for (const auto& path : inputs.scores) {
        const auto data = read_file(path);
        prov.inputs.push_back({"scores", absolute_path(path), sha256_hex(data)});
        const auto scores = parse_file(data, path, [](std::istream& in) { return read_sentence_scores(in); });
        auto items = parse_file(data, path, [&](std::istream&) {
            return model_item_drops(scores, stimuli, path.stem().string());
        });
        rep.model_item_drops.insert(rep.model_item_drops.end(), items.begin(), items.end());
    }
    std::map<std::string, PassiveDrop> model_verb, human_verb;
    if (!rep.model_item_drops.empty()) {
        std::map<std::pair<std::string, std::string>, std::pair<double, int>> per_item;
        for (const auto& it : rep.model_item_drops) {
            auto& acc = per_item[{it.verb, it.frame_id}];
            acc.first += it.drop;
            ++acc.second;
        }
        std::vector<ItemDrop> frame_drops;
        for (const auto& [key, acc] : per_item) frame_drops.push_back({key.first, key.second, "", acc.first / acc.second});

        const auto seed = derive_seed(cfg.seed, kStreamModelVerbCi);
        prov.seeds["model_verb_ci"] = seed;
        const auto& ci_items = cfg.model_ci_unit == ModelCiUnit::item ? rep.model_item_drops : frame_drops;
        for (auto& d : aggregate_verb_drop(ci_items, BootstrapConfig{cfg.bootstrap_iters, cfg.level, seed}))
            model_verb.emplace(d.key, d);

        // Contrasts treat (verb, frame) items as exchangeable; score sets are averaged first.
        std::map<VerbClass, std::vector<double>> by_class;
        for (const auto& [key, acc] : per_item)
            by_class[lookup_verb(key.first).class_id].push_back(acc.first / acc.second);
        auto cc = contrasts("model", by_class, cfg, kStreamModelContrast, prov.seeds);
        rep.class_contrasts.insert(rep.class_contrasts.end(), cc.begin(), cc.end());
    }

    // Human side.
    if (inputs.ratings) {
        const auto data = read_file(*inputs.ratings);
        prov.inputs.push_back({"ratings", absolute_path(*inputs.ratings), sha256_hex(data)});
        const auto ratings = parse_file(data, *inputs.ratings, [](std::istream& in) { return read_ratings(in); });
        const auto excl = exclude_participants(ratings);
        rep.exclusions = ExclusionSummary{static_cast<int>(excl.kept.size() + excl.excluded.size()),
                                          {excl.excluded.begin(), excl.excluded.end()}};
        const auto kept = apply_exclusions(ratings, excl);
        const auto seed = derive_seed(cfg.seed, kStreamHumanVerbCi);
        prov.seeds["human_verb_ci"] = seed;
        for (auto& d : human_verb_drop_with_ci(kept, stimuli, BootstrapConfig{cfg.bootstrap_iters, cfg.level, seed}))
            human_verb.emplace(d.key, d);

        std::map<VerbClass, std::vector<double>> by_class;
        std::map<std::string, const SentencePair*> pair_index;
        for (const auto& p : stimuli) pair_index[p.pair_id] = &p;
        for (const auto& d : human_passive_drop(kept, DropScope::item, stimuli))
            by_class[pair_index.at(d.key)->class_id()].push_back(d.drop);
        auto cc = contrasts("human", by_class, cfg, kStreamHumanContrast, prov.seeds);
        rep.class_contrasts.insert(rep.class_contrasts.end(), cc.begin(), cc.end());
    }

    std::map<std::string, corpus::RatioRow> ratios;
    if (inputs.counts) {
        const auto data = read_file(*inputs.counts);
        prov.inputs.push_back({"counts", absolute_path(*inputs.counts), sha256_hex(data)});
        const auto counts = parse_file(data, *inputs.counts, [](std::istream& in) { return corpus::read_count_table(in); });
        std::vector<std::string> lemmas;
        for (const auto& v : lexicon())
            if (model_verb.count(std::string(v.lemma)) || human_verb.count(std::string(v.lemma)))
                lemmas.emplace_back(v.lemma);
        for (auto& r : corpus::ratio_table(counts, lemmas)) ratios.emplace(r.lemma, r);
    }

    for (const auto& v : lexicon()) {
        const std::string lemma(v.lemma);
        VerbSummary s{lemma, v.class_id, std::nullopt, std::nullopt, std::nullopt};
        if (auto it = model_verb.find(lemma); it != model_verb.end()) s.model = it->second;
        if (auto it = human_verb.find(lemma); it != human_verb.end()) s.human = it->second;
        if (auto it = ratios.find(lemma); it != ratios.end()) s.ratio = it->second;
        if (s.model || s.human) rep.per_verb_drops.push_back(std::move(s));
    }

    std::vector<double> mx, hy, lr, dr;
    for (const auto& s : rep.per_verb_drops) {
        if (s.model && s.human) {
            mx.push_back(s.model->drop);
            hy.push_back(s.human->drop);
        }
        if (s.ratio && std::isfinite(s.ratio->log10_ratio)) {
            lr.push_back(s.ratio->log10_ratio);
            dr.push_back(s.model ? s.model->drop : s.human->drop);
        }
    }
    auto correlate = [&](const std::vector<double>& a, const std::vector<double>& b, std::uint64_t stream,
                         const char* name) -> std::optional<stats::CorrelationResult<double>> {
        if (a.size() < 3) return std::nullopt;
        const stats::Vector<double> x = stats::as_vector(a), y = stats::as_vector(b);
        if (x.maxCoeff() == x.minCoeff() || y.maxCoeff() == y.minCoeff()) return std::nullopt;
        const auto seed = derive_seed(cfg.seed, stream);
        prov.seeds[name] = seed;
        return spearman_with_ci(x, y, cfg, seed);
    };
    rep.model_human_correlation = correlate(mx, hy, kStreamModelHumanCi, "model_human_ci");
    rep.ratio_drop_correlation = correlate(lr, dr, kStreamRatioDropCi, "ratio_drop_ci");
    return rep;
}

std::string to_json(const AnalysisReport& r) {
    ordered_json j;
    j["format"] = "passdrop-analysis";
    j["version"] = 1;
    ordered_json verbs = ordered_json::array();
    for (const auto& s : r.per_verb_drops) {
        ordered_json v{{"verb", s.verb}, {"class", to_string(s.klass)}};
        v["model"] = s.model ? drop_json(*s.model) : ordered_json(nullptr);
        v["human"] = s.human ? drop_json(*s.human) : ordered_json(nullptr);
        v["ratio"] = s.ratio ? ordered_json{{"active_count", s.ratio->active_count},
                                            {"passive_count", s.ratio->passive_count},
                                            {"ratio", s.ratio->ratio},
                                            {"log10_ratio", std::isfinite(s.ratio->log10_ratio)
                                                                   ? ordered_json(s.ratio->log10_ratio)
                                                                   : ordered_json(nullptr)}}
                             : ordered_json(nullptr);
        verbs.push_back(std::move(v));
    }
    j["per_verb_drops"] = std::move(verbs);
    ordered_json cc = ordered_json::array();
    for (const auto& c : r.class_contrasts)
        cc.push_back({{"source", c.source},
                      {"class", to_string(c.klass)},
                      {"baseline", to_string(VerbClass::agent_patient)},
                      {"n_class", c.n_class},
                      {"n_baseline", c.n_baseline},
                      {"observed_diff", c.result.observed_diff},
                      {"p_value", c.result.p_value},
                      {"n_permutations", c.result.n_permutations},
                      {"exact", c.result.exact}});
    j["class_contrasts"] = std::move(cc);
    j["model_human_correlation"] =
        r.model_human_correlation ? correlation_json(*r.model_human_correlation) : ordered_json(nullptr);
    j["ratio_drop_correlation"] =
        r.ratio_drop_correlation ? correlation_json(*r.ratio_drop_correlation) : ordered_json(nullptr);
    j["exclusions"] = r.exclusions ? ordered_json{{"participants", r.exclusions->participants},
                                                  {"excluded", r.exclusions->excluded}}
                                   : ordered_json(nullptr);
    ordered_json items = ordered_json::array();
    for (const auto& it : r.model_item_drops)
        items.push_back({{"verb", it.verb}, {"frame_id", it.frame_id}, {"seed_id", it.seed_id}, {"drop", it.drop}});
    j["model_item_drops"] = std::move(items);

    ordered_json prov;
    prov["config"] = config_json(r.provenance.config);
    prov["config_hash"] = r.provenance.config_hash;
    prov["seeds"] = r.provenance.seeds;
    ordered_json ins = ordered_json::array();
    for (const auto& d : r.provenance.inputs) ins.push_back({{"role", d.role}, {"path", d.path}, {"sha256", d.sha256}});
    prov["inputs"] = std::move(ins);
    j["provenance"] = std::move(prov);
    return j.dump(2) + "\n";
}

AnalysisReport report_from_json(std::string_view text) {
    const json j = json::parse(text.begin(), text.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw FormatError("analysis document is not a JSON object");
    if (j.value("format", "") != "passdrop-analysis") throw FormatError("not a passdrop analysis document");
    if (j.value("version", 0) != 1) throw FormatError("unsupported analysis document version");
    try {
        AnalysisReport r;
        for (const auto& v : j.at("per_verb_drops")) {
            VerbSummary s;
            s.verb = v.at("verb").get<std::string>();
            s.klass = parse_verb_class(v.at("class").get<std::string>());
            if (!v.at("model").is_null()) s.model = drop_from(v.at("model"), s.verb);
            if (!v.at("human").is_null()) s.human = drop_from(v.at("human"), s.verb);
            if (const auto& ra = v.at("ratio"); !ra.is_null())
                s.ratio = corpus::RatioRow{s.verb, ra.at("active_count").get<std::uint64_t>(),
                                   ra.at("passive_count").get<std::uint64_t>(), ra.at("ratio").get<double>(),
                                   ra.at("log10_ratio").is_null() ? -std::numeric_limits<double>::infinity()
                                                                  : ra.at("log10_ratio").get<double>()};
            r.per_verb_drops.push_back(std::move(s));
        }
        for (const auto& c : j.at("class_contrasts"))
            r.class_contrasts.push_back({c.at("source").get<std::string>(), parse_verb_class(c.at("class").get<std::string>()),
                                         c.at("n_class").get<int>(), c.at("n_baseline").get<int>(),
                                         {c.at("observed_diff").get<double>(), c.at("p_value").get<double>(),
                                          c.at("n_permutations").get<std::uint64_t>(), c.at("exact").get<bool>()}});
        if (!j.at("model_human_correlation").is_null())
            r.model_human_correlation = correlation_from(j.at("model_human_correlation"));
        if (!j.at("ratio_drop_correlation").is_null())
            r.ratio_drop_correlation = correlation_from(j.at("ratio_drop_correlation"));
        if (const auto& e = j.at("exclusions"); !e.is_null())
            r.exclusions = ExclusionSummary{e.at("participants").get<int>(), e.at("excluded").get<std::vector<std::string>>()};
        for (const auto& it : j.at("model_item_drops"))
            r.model_item_drops.push_back({it.at("verb").get<std::string>(), it.at("frame_id").get<std::string>(),
                                          it.at("seed_id").get<std::string>(), it.at("drop").get<double>()});
        const auto& p = j.at("provenance");
        const auto& c = p.at("config");
        r.provenance.config = {c.at("seed").get<std::uint64_t>(), c.at("bootstrap_iters").get<int>(),
                               c.at("perm_iters").get<int>(), c.at("level").get<double>(),
                               parse_model_ci_unit(c.at("model_ci_unit").get<std::string>())};
        r.provenance.config_hash = p.at("config_hash").get<std::string>();
        r.provenance.seeds = p.at("seeds").get<std::map<std::string, std::uint64_t>>();
        for (const auto& d : p.at("inputs"))
            r.provenance.inputs.push_back(
                {d.at("role").get<std::string>(), d.at("path").get<std::string>(), d.at("sha256").get<std::string>()});
        return r;
    } catch (const json::exception& e) {
        throw FormatError(fmt::format("malformed analysis document: {}", e.what()));
    } catch (const LexiconError& e) {
        throw FormatError(fmt::format("malformed analysis document: {}", e.what()));
    }
}

std::pair<AnalysisInputs, AnalysisConfig> rerun_request(const Provenance& prov) {
    if (sha256_hex(config_json(prov.config).dump()) != prov.config_hash)
        throw ValidationError("provenance config does not match its recorded hash");
    AnalysisInputs in;
    std::vector<std::string> problems;
    for (const auto& d : prov.inputs) {
        if (d.role == "stimuli" && d.path.empty()) {
            std::ostringstream os;
            write_stimuli(os, generate_pairs());
            if (sha256_hex(os.str()) != d.sha256) problems.push_back("built-in stimuli changed");
            continue;
        }
        std::string digest;
        try {
            digest = sha256_file(d.path);
        } catch (const IoError&) {
            problems.push_back(fmt::format("{} missing", d.path));
            continue;
        }
        if (digest != d.sha256) problems.push_back(fmt::format("{} changed", d.path));
        if (d.role == "stimuli")
            in.stimuli = d.path;
        else if (d.role == "scores")
            in.scores.emplace_back(d.path);
        else if (d.role == "ratings")
            in.ratings = d.path;
        else if (d.role == "counts")
            in.counts = d.path;
        else
            problems.push_back(fmt::format("unknown input role '{}'", d.role));
    }
    if (!problems.empty()) throw ValidationError(fmt::format("cannot re-run analysis: {}", fmt::join(problems, "; ")));
    return {std::move(in), prov.config};
}

void write_verb_table(std::ostream& os, const AnalysisReport& r) {
    tsv::write_header(os, "verb-drops", 1,
                      {"verb", "class", "model_drop", "model_ci_low", "model_ci_high", "model_n", "human_drop",
                       "human_ci_low", "human_ci_high", "human_n", "active_count", "passive_count", "log10_ratio"});
    for (const auto& s : r.per_verb_drops) {
        os << s.verb << '\t' << to_string(s.klass);
        for (const auto& d : {s.model, s.human}) {
            if (d)
                os << '\t' << tsv::format_double(d->drop) << '\t' << opt_field(d->ci_low) << '\t' << opt_field(d->ci_high)
                   << '\t' << d->n;
            else
                os << "\t\t\t\t";
        }
        if (s.ratio)
            os << '\t' << s.ratio->active_count << '\t' << s.ratio->passive_count << '\t'
               << tsv::format_double(s.ratio->log10_ratio);
        else
            os << "\t\t\t";
        os << '\n';
    }
}

void write_contrast_table(std::ostream& os, const AnalysisReport& r) {
    tsv::write_header(os, "class-contrasts", 1,
                      {"source", "class", "baseline", "n_class", "n_baseline", "observed_diff", "p_value",
                       "n_permutations", "exact"});
    for (const auto& c : r.class_contrasts)
        os << c.source << '\t' << to_string(c.klass) << '\t' << to_string(VerbClass::agent_patient) << '\t' << c.n_class
           << '\t' << c.n_baseline << '\t' << tsv::format_double(c.result.observed_diff) << '\t'
           << tsv::format_double(c.result.p_value) << '\t' << c.result.n_permutations << '\t'
           << (c.result.exact ? "true" : "false") << '\n';
}

void write_item_drops(std::ostream& os, std::span<const ItemDrop> items) {
    tsv::write_header(os, "item-drops", 1, {"verb", "frame_id", "seed_id", "drop"});
    for (const auto& it : items)
        os << it.verb << '\t' << it.frame_id << '\t' << it.seed_id << '\t' << tsv::format_double(it.drop) << '\n';
}

} // namespace passdrop::analysis
