#include "passdrop/corpus_voice.hpp"

#include "passdrop/errors.hpp"
#include "passdrop/log.hpp"
#include "passdrop/tsv.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>

namespace passdrop::corpus {

namespace {

constexpr std::string_view kAbbreviations[] = {
    "mr.",   "mrs.",  "ms.",   "dr.",   "prof.", "sr.",   "jr.",   "st.",   "vs.",   "etc.",  "e.g.",
    "i.e.",  "u.s.",  "u.k.",  "inc.",  "ltd.",  "co.",   "corp.", "no.",   "mt.",   "gen.",  "gov.",
    "sen.",  "rep.",  "lt.",   "col.",  "capt.", "sgt.",  "rev.",  "jan.",  "feb.",  "mar.",  "apr.",
    "aug.",  "sept.", "sep.",  "oct.",  "nov.",  "dec.",  "approx.", "dept.", "fig.",
};

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
inline bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
inline bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_word_byte(char c) { return is_alpha(c) || is_digit(c) || static_cast<unsigned char>(c) >= 0x80; }
inline bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }
inline bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
inline char to_lower(char c) { return is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

constexpr std::string_view kAuxiliaries[] = {
    "be", "am", "is", "are", "was", "were", "been", "being", "'s", "'re", "'m",
    "get", "gets", "got", "gotten", "getting",
};

constexpr std::string_view kSkippable[] = {"not", "n't", "never", "also", "just", "all"};

constexpr std::string_view kClitics[] = {"s", "re", "m", "ll", "ve", "d"};

} // namespace

std::string_view to_string(VoiceLabel v) {
    switch (v) {
    case VoiceLabel::active: return "active";
    case VoiceLabel::passive: return "passive";
    case VoiceLabel::absent: return "absent";
    }
    return "absent";
}

VoiceLabel parse_voice_label(std::string_view s) {
    if (s == "active") return VoiceLabel::active;
    if (s == "passive") return VoiceLabel::passive;
    if (s == "absent") return VoiceLabel::absent;
    throw FormatError(fmt::format("unknown voice label '{}'", s));
}

InflectionEntry inflection_entry(const VerbEntry& verb) {
    InflectionEntry e;
    e.lemma = std::string(verb.lemma);
    for (VerbForm f : {VerbForm::base, VerbForm::third_sg, VerbForm::past, VerbForm::past_participle, VerbForm::gerund})
        e.surface_forms.emplace_back(std::string(inflect(verb, f)), f);
    e.past_participle = std::string(verb.past_participle);
    return e;
}

// --- Segmentation ------------------------------------------------------------

bool is_abbreviation(std::string_view word) {
    while (!word.empty() && (word.front() == '(' || word.front() == '"' || word.front() == '\'')) word.remove_prefix(1);
    if (word.size() == 2 && is_alpha(word[0]) && word[1] == '.') return true; // initial
    std::string lower(word);
    for (auto& c : lower) c = to_lower(c);
    if (std::find(std::begin(kAbbreviations), std::end(kAbbreviations), lower) != std::end(kAbbreviations)) return true;
    // Dotted acronyms such as "a.m." or "p.h.d."
    return lower.size() >= 4 && lower.find('.') < lower.size() - 1 &&
           std::all_of(lower.begin(), lower.end(), [](char c) { return is_alpha(c) || c == '.'; }) &&
           lower.find("..") == std::string::npos &&
           std::count(lower.begin(), lower.end(), '.') * 2 >= static_cast<std::ptrdiff_t>(lower.size());
}

void SentenceSplitter::feed(std::string_view chunk, const Sink& sink) {
    buffer_.append(chunk);
    const std::size_t n = buffer_.size();
    while (scan_ < n) {
        if (!is_terminal(buffer_[scan_])) {
            ++scan_;
            continue;
        }
        std::size_t end = scan_;
        while (end < n && is_terminal(buffer_[end])) ++end;
        const bool single_period = end == scan_ + 1 && buffer_[scan_] == '.';
        while (end < n && is_closer(buffer_[end])) ++end;
        std::size_t next = end;
        while (next < n && is_space(buffer_[next])) ++next;
        if (next == n) break; // need lookahead
        if (next == end || !is_upper(buffer_[next])) {
            scan_ = end;
            continue;
        }
        if (single_period) {
            std::size_t w = scan_;
            while (w > start_ && !is_space(buffer_[w - 1])) --w;
            if (is_abbreviation(std::string_view(buffer_).substr(w, scan_ + 1 - w))) {
                scan_ = end;
                continue;
            }
        }
        const auto sentence = trim(std::string_view(buffer_).substr(start_, end - start_));
        if (!sentence.empty()) sink(sentence);
        start_ = next;
        scan_ = next;
    }
    if (start_ > 0 && start_ >= buffer_.size() / 2) {
        buffer_.erase(0, start_);
        scan_ -= start_;
        start_ = 0;
    }
}

void SentenceSplitter::finish(const Sink& sink) {
    const auto rest = trim(std::string_view(buffer_).substr(start_));
    if (!rest.empty()) sink(rest);
    buffer_.clear();
    start_ = scan_ = 0;
}

std::vector<std::string> segment(std::string_view text) {
    std::vector<std::string> out;
    SentenceSplitter splitter;
    auto sink = [&](std::string_view s) { out.emplace_back(s); };
    splitter.feed(text, sink);
    splitter.finish(sink);
    return out;
}

// --- Tokenization --------------------------------------------------------------

void tokenize(std::string_view sentence, std::string& storage, std::vector<std::string_view>& tokens) {
    storage.clear();
    storage.reserve(sentence.size());
    for (std::size_t i = 0; i < sentence.size(); ++i) {
        const char c = sentence[i];
        // U+2019 and U+2018 become ASCII apostrophes.
        if (static_cast<unsigned char>(c) == 0xE2 && i + 2 < sentence.size() &&
            static_cast<unsigned char>(sentence[i + 1]) == 0x80 &&
            (static_cast<unsigned char>(sentence[i + 2]) == 0x99 || static_cast<unsigned char>(sentence[i + 2]) == 0x98)) {
            storage.push_back('\'');
            i += 2;
            continue;
        }
        storage.push_back(to_lower(c));
    }

    tokens.clear();
    const std::string_view s = storage;
    const std::size_t n = s.size();
    std::size_t i = 0;
    while (i < n) {
        const char c = s[i];
        if (is_space(c)) {
            ++i;
        } else if (is_word_byte(c)) {
            std::size_t j = i;
            while (j < n && is_word_byte(s[j])) ++j;
            if (j + 1 < n && s[j] == '\'' && s[j + 1] == 't' && j - i >= 2 && s[j - 1] == 'n' &&
                (j + 2 == n || !is_word_byte(s[j + 2]))) {
                tokens.push_back(s.substr(i, j - 1 - i));
                tokens.push_back(s.substr(j - 1, 3));
                i = j + 2;
                continue;
            }
            tokens.push_back(s.substr(i, j - i));
            i = j;
        } else if (c == '\'') {
            std::size_t j = i + 1;
            while (j < n && is_alpha(s[j])) ++j;
            const auto suffix = s.substr(i + 1, j - i - 1);
            if (i > 0 && is_word_byte(s[i - 1]) &&
                std::find(std::begin(kClitics), std::end(kClitics), suffix) != std::end(kClitics)) {
                tokens.push_back(s.substr(i, j - i));
                i = j;
            } else {
                ++i; // quotation mark
            }
        } else {
            tokens.push_back(s.substr(i, 1));
            ++i;
        }
    }
}

std::vector<std::string> tokenize(std::string_view sentence) {
    std::string storage;
    std::vector<std::string_view> views;
    tokenize(sentence, storage, views);
    return {views.begin(), views.end()};
}

bool is_passive_auxiliary(std::string_view t) {
    return std::find(std::begin(kAuxiliaries), std::end(kAuxiliaries), t) != std::end(kAuxiliaries);
}

bool is_window_skippable(std::string_view t) {
    if (t.size() >= 4 && t.ends_with("ly")) return true;
    return std::find(std::begin(kSkippable), std::end(kSkippable), t) != std::end(kSkippable);
}

bool passive_at(std::span<const std::string_view> tokens, std::size_t index) {
    for (std::size_t k = 1; k <= kAuxiliaryWindow && k <= index; ++k) {
        const auto t = tokens[index - k];
        if (is_passive_auxiliary(t)) return true;
        if (!is_window_skippable(t)) return false;
    }
    return false;
}

std::vector<VoiceLabel> classify_occurrences(std::span<const std::string_view> tokens, const InflectionEntry& entry) {
    std::vector<VoiceLabel> out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const bool occurs = std::any_of(entry.surface_forms.begin(), entry.surface_forms.end(),
                                        [&](const auto& sf) { return sf.first == tokens[i]; });
        if (!occurs) continue;
        const bool passive = tokens[i] == entry.past_participle && passive_at(tokens, i);
        out.push_back(passive ? VoiceLabel::passive : VoiceLabel::active);
    }
    return out;
}

VoiceLabel classify_occurrence(std::span<const std::string> tokens, std::string_view lemma) {
    const InflectionEntry entry = inflection_entry(lookup_verb(lemma));
    std::vector<std::string_view> views(tokens.begin(), tokens.end());
    const auto labels = classify_occurrences(views, entry);
    if (labels.empty()) return VoiceLabel::absent;
    return std::find(labels.begin(), labels.end(), VoiceLabel::passive) != labels.end() ? VoiceLabel::passive
                                                                                        : VoiceLabel::active;
}

// --- Counting --------------------------------------------------------------------

CountTable merge(const CountTable& a, const CountTable& b) {
    CountTable out = a;
    for (const auto& [lemma, c] : b) {
        auto [it, inserted] = out.try_emplace(lemma, VoiceCounts{lemma, 0, 0});
        it->second += c;
    }
    return out;
}

VoiceCounter::VoiceCounter(std::span<const std::string> lemmas, CountMode mode) : mode_(mode) {
    for (const auto& l : lemmas) {
        const auto& verb = lookup_verb(l);
        if (std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.lemma == l; })) continue;
        entries_.push_back(inflection_entry(verb));
    }
    for (std::uint32_t li = 0; li < entries_.size(); ++li) {
        for (const auto& [surface, form] : entries_[li].surface_forms) {
            auto it = std::find_if(surfaces_.begin(), surfaces_.end(), [&](const auto& s) { return s.first == surface; });
            if (it == surfaces_.end()) {
                surfaces_.emplace_back(surface, std::vector<Hit>{});
                it = surfaces_.end() - 1;
            }
            const bool participle = surface == entries_[li].past_participle;
            auto dup = std::find_if(it->second.begin(), it->second.end(), [&](const Hit& h) { return h.lemma == li; });
            if (dup == it->second.end()) it->second.push_back({li, participle});
        }
    }
    for (std::uint32_t i = 0; i < surfaces_.size(); ++i) surface_index_.emplace(surfaces_[i].first, i);
    counts_.resize(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) counts_[i].lemma = entries_[i].lemma;
    sentence_label_.assign(entries_.size(), 0);
}

const std::vector<VoiceCounter::Hit>* VoiceCounter::find(std::string_view token) const {
    auto it = surface_index_.find(token);
    return it == surface_index_.end() ? nullptr : &surfaces_[it->second].second;
}

void VoiceCounter::add_sentence(std::string_view sentence) {
    ++sentences_;
    tokenize(sentence, storage_, tokens_);
    bool any = false;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        const auto* hits = find(tokens_[i]);
        if (!hits) continue;
        for (const Hit& h : *hits) {
            const bool passive = h.participle && passive_at(tokens_, i);
            if (mode_ == CountMode::occurrences) {
                (passive ? counts_[h.lemma].passive_count : counts_[h.lemma].active_count) += 1;
            } else {
                sentence_label_[h.lemma] = std::max<std::int8_t>(sentence_label_[h.lemma], passive ? 2 : 1);
                any = true;
            }
        }
    }
    if (!any) return;
    for (std::size_t l = 0; l < sentence_label_.size(); ++l) {
        if (sentence_label_[l] == 2) ++counts_[l].passive_count;
        if (sentence_label_[l] == 1) ++counts_[l].active_count;
        sentence_label_[l] = 0;
    }
}

void VoiceCounter::add_document(std::string_view text) {
    SentenceSplitter splitter;
    auto sink = [this](std::string_view s) { add_sentence(s); };
    splitter.feed(text, sink);
    splitter.finish(sink);
}

void VoiceCounter::merge_from(const VoiceCounter& other) {
    for (std::size_t i = 0; i < counts_.size() && i < other.counts_.size(); ++i) counts_[i] += other.counts_[i];
    sentences_ += other.sentences_;
}

CountTable VoiceCounter::table() const {
    CountTable t;
    for (const auto& c : counts_) t.emplace(c.lemma, c);
    return t;
}

namespace {

struct Shard {
    std::size_t file = 0;
    std::uint64_t begin = 0;
    std::uint64_t end = 0; // exclusive; lines starting before `end` belong to this shard
};

void process_shard(const Shard& shard, const std::filesystem::path& path, DocumentMode mode, VoiceCounter& counter) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    if (mode == DocumentMode::file) {
        SentenceSplitter splitter;
        auto sink = [&](std::string_view s) { counter.add_sentence(s); };
        std::string chunk(1u << 20, '\0');
        while (in) {
            in.read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
            const auto got = static_cast<std::size_t>(in.gcount());
            if (got == 0) break;
            splitter.feed(std::string_view(chunk).substr(0, got), sink);
        }
        if (in.bad()) throw IoError(fmt::format("read error in '{}'", path.string()));
        splitter.finish(sink);
        return;
    }
    std::uint64_t pos = shard.begin;
    if (pos > 0) {
        // Skip the line straddling the shard start; the previous shard owns it.
        in.seekg(static_cast<std::streamoff>(pos - 1));
        char prev = 0;
        in.get(prev);
        if (prev != '\n') {
            std::string skipped;
            std::getline(in, skipped);
            pos += skipped.size() + 1;
        }
    }
    std::string line;
    while (pos < shard.end && std::getline(in, line)) {
        pos += line.size() + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        counter.add_document(line);
    }
    if (in.bad()) throw IoError(fmt::format("read error in '{}'", path.string()));
}

} // namespace

CorpusResult count_corpus(std::span<const std::filesystem::path> paths, std::span<const std::string> lemmas,
                          const CountOptions& options) {
    CorpusResult result;
    std::vector<Shard> shards;
    for (std::size_t f = 0; f < paths.size(); ++f) {
        std::error_code ec;
        const bool regular = std::filesystem::is_regular_file(paths[f], ec);
        std::ifstream probe(paths[f], std::ios::binary);
        if (!regular || !probe) {
            const auto msg = fmt::format("cannot read corpus file '{}'", paths[f].string());
            if (!options.keep_going) throw IoError(msg);
            warn(msg + "; skipped");
            result.failed_files.push_back(paths[f].string());
            continue;
        }
        const std::uint64_t size = std::filesystem::file_size(paths[f], ec);
        if (options.document_mode == DocumentMode::file || size <= options.shard_bytes || options.shard_bytes == 0) {
            shards.push_back({f, 0, std::max<std::uint64_t>(size, 1)});
            continue;
        }
        for (std::uint64_t b = 0; b < size; b += options.shard_bytes)
            shards.push_back({f, b, std::min<std::uint64_t>(b + options.shard_bytes, size)});
    }

    const unsigned workers = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(shards.size())));
    std::vector<VoiceCounter> locals;
    locals.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) locals.emplace_back(lemmas, options.count_mode);
    std::vector<std::exception_ptr> shard_errors(shards.size());
    std::atomic<std::size_t> next{0};

    auto work = [&](unsigned w) {
        for (std::size_t s = next++; s < shards.size(); s = next++) {
            try {
                process_shard(shards[s], paths[shards[s].file], options.document_mode, locals[w]);
            } catch (...) {
                shard_errors[s] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }

    for (std::size_t s = 0; s < shards.size(); ++s) {
        if (!shard_errors[s]) continue;
        if (!options.keep_going) std::rethrow_exception(shard_errors[s]);
        const auto& name = paths[shards[s].file].string();
        warn(fmt::format("error while reading '{}'; its counts are incomplete", name));
        if (std::find(result.failed_files.begin(), result.failed_files.end(), name) == result.failed_files.end())
            result.failed_files.push_back(name);
    }

    for (unsigned w = 1; w < workers; ++w) locals[0].merge_from(locals[w]);
    result.counts = locals[0].table();
    result.sentences = locals[0].sentences();
    return result;
}

// --- Ratios ---------------------------------------------------------------------

std::vector<RatioRow> ratio_table(const CountTable& counts, std::span<const std::string> lemmas) {
    std::vector<RatioRow> out;
    for (const auto& l : lemmas) {
        auto it = counts.find(l);
        if (it == counts.end()) {
            warn(fmt::format("no counts for lemma '{}'; omitted from ratio table", l));
            continue;
        }
        RatioRow r;
        r.lemma = l;
        r.active_count = it->second.active_count;
        r.passive_count = it->second.passive_count;
        // Add-one smoothing on a zero denominator only.
        r.ratio = static_cast<double>(r.active_count) / static_cast<double>(std::max<std::uint64_t>(r.passive_count, 1));
        r.log10_ratio = std::log10(r.ratio);
        out.push_back(std::move(r));
    }
    return out;
}

stats::CorrelationResult<double> correlate_ratio_drop(std::span<const RatioPoint> points) {
    if (points.size() < 2) throw StatsError("ratio-drop correlation needs at least two verbs");
    stats::Vector<double> x(static_cast<Eigen::Index>(points.size()));
    stats::Vector<double> y(x.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        x(static_cast<Eigen::Index>(i)) = points[i].log10_ratio;
        y(static_cast<Eigen::Index>(i)) = points[i].drop;
    }
    return stats::spearman(x, y);
}

void write_ratio_table(std::ostream& os, std::span<const RatioRow> rows) {
    tsv::write_header(os, "counts", 1, {"lemma", "active_count", "passive_count", "ratio", "log10_ratio"});
    for (const auto& r : rows)
        os << r.lemma << '\t' << r.active_count << '\t' << r.passive_count << '\t' << tsv::format_double(r.ratio) << '\t'
           << tsv::format_double(r.log10_ratio) << '\n';
}

CountTable read_count_table(std::istream& is) {
    tsv::expect_header(is, "counts", 1, {"lemma", "active_count", "passive_count", "ratio", "log10_ratio"},
                       "count table");
    CountTable out;
    std::string line;
    while (tsv::next_row(is, line)) {
        auto c = tsv::split(line);
        if (c.size() != 5) throw FormatError(fmt::format("count table: malformed row '{}'", line));
        const auto active = tsv::parse_int(c[1], "active_count");
        const auto passive = tsv::parse_int(c[2], "passive_count");
        if (active < 0 || passive < 0) throw FormatError(fmt::format("count table: negative count for '{}'", c[0]));
        VoiceCounts v{std::string(c[0]), static_cast<std::uint64_t>(active), static_cast<std::uint64_t>(passive)};
        out[v.lemma] = v;
    }
    return out;
}

std::vector<LabeledSentence> read_labeled_suite(std::istream& is) {
    tsv::expect_header(is, "tagger-suite", 1, {"sentence", "lemma", "expected_label"}, "tagger suite");
    std::vector<LabeledSentence> out;
    std::string line;
    while (tsv::next_row(is, line)) {
        auto c = tsv::split(line);
        if (c.size() != 3) throw FormatError(fmt::format("tagger suite: malformed row '{}'", line));
        out.push_back({std::string(c[0]), std::string(c[1]), parse_voice_label(c[2])});
    }
    return out;
}

} // namespace passdrop::corpus
