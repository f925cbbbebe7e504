#pragma once

// Corpus-side voice statistics: sentence segmentation, a rule-based
// active/passive tagger for the stimulus verbs, streaming multi-threaded
// counting, and active:passive ratio tables.

#include "passdrop/lexicon.hpp"
#include "passdrop/stats.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace passdrop::corpus {

enum class VoiceLabel { active, passive, absent };

std::string_view to_string(VoiceLabel v);
VoiceLabel parse_voice_label(std::string_view s);

struct InflectionEntry {
    std::string lemma;
    std::vector<std::pair<std::string, VerbForm>> surface_forms; // all five slots, surfaces may repeat
    std::string past_participle;
};

InflectionEntry inflection_entry(const VerbEntry& verb);

// --- Segmentation ------------------------------------------------------------

// Incremental splitter: boundaries are [.!?] (plus closing quotes/brackets)
// followed by whitespace and an uppercase ASCII letter, except after
// abbreviations and single-letter initials. Holds at most one partial
// sentence between calls.
class SentenceSplitter {
public:
    using Sink = std::function<void(std::string_view)>;

    void feed(std::string_view chunk, const Sink& sink);
    void finish(const Sink& sink);

private:
    std::string buffer_;
    std::size_t start_ = 0; // first byte of the current sentence
    std::size_t scan_ = 0;  // next byte to examine
};

std::vector<std::string> segment(std::string_view text);

bool is_abbreviation(std::string_view word_with_period);

// --- Tokenization and tagging -------------------------------------------------

// Lowercased word tokens; punctuation characters become single-character
// tokens; clitics ('s 're 'm 'll 've 'd n't) are split off. Curly apostrophes
// are normalized. Views point into `storage`.
void tokenize(std::string_view sentence, std::string& storage, std::vector<std::string_view>& tokens);
std::vector<std::string> tokenize(std::string_view sentence);

bool is_passive_auxiliary(std::string_view token);
bool is_window_skippable(std::string_view token);

// Leftward window (in tokens) searched for a passive auxiliary.
inline constexpr int kAuxiliaryWindow = 4;

// Passive iff the token at `index` is preceded, within the window and across
// only skippable tokens, by a form of "be" or "get".
bool passive_at(std::span<const std::string_view> tokens, std::size_t index);

// Labels each occurrence of any surface form of `entry` in sentence order.
std::vector<VoiceLabel> classify_occurrences(std::span<const std::string_view> tokens, const InflectionEntry& entry);

// Sentence-level label: passive if any occurrence is passive, active if the
// lemma occurs only actively, absent otherwise. Throws LexiconError for an
// unknown lemma.
VoiceLabel classify_occurrence(std::span<const std::string> tokens, std::string_view lemma);

// --- Counting ------------------------------------------------------------------

struct VoiceCounts {
    std::string lemma;
    std::uint64_t active_count = 0;
    std::uint64_t passive_count = 0;

    VoiceCounts& operator+=(const VoiceCounts& o) {
        active_count += o.active_count;
        passive_count += o.passive_count;
        return *this;
    }
    bool operator==(const VoiceCounts&) const = default;
};

using CountTable = std::map<std::string, VoiceCounts>;

CountTable merge(const CountTable& a, const CountTable& b);

enum class DocumentMode { file, line }; // one document per file, or one per line
enum class CountMode { occurrences, sentences };

struct CountOptions {
    DocumentMode document_mode = DocumentMode::file;
    CountMode count_mode = CountMode::occurrences;
    unsigned threads = 1;
    bool keep_going = false;
    std::size_t shard_bytes = 8u << 20; // line-mode files are split into shards of about this size
};

// Counts over a fixed lemma set; reusable across sentences and files.
class VoiceCounter {
public:
    explicit VoiceCounter(std::span<const std::string> lemmas, CountMode mode = CountMode::occurrences);

    void add_sentence(std::string_view sentence);
    void add_document(std::string_view text);
    void merge_from(const VoiceCounter& other);

    std::uint64_t sentences() const { return sentences_; }
    CountTable table() const;

private:
    struct Hit {
        std::uint32_t lemma;
        bool participle;
    };
    std::vector<InflectionEntry> entries_;
    std::vector<std::pair<std::string, std::vector<Hit>>> surfaces_;
    std::unordered_map<std::string_view, std::uint32_t> surface_index_;
    std::vector<VoiceCounts> counts_;
    CountMode mode_;
    std::uint64_t sentences_ = 0;
    std::string storage_;
    std::vector<std::string_view> tokens_;
    std::vector<std::int8_t> sentence_label_;

    const std::vector<Hit>* find(std::string_view token) const;
};

struct CorpusResult {
    CountTable counts;
    std::uint64_t sentences = 0;
    std::vector<std::string> failed_files;
};

// Throws IoError naming the first unreadable file unless keep_going is set.
CorpusResult count_corpus(std::span<const std::filesystem::path> paths, std::span<const std::string> lemmas,
                          const CountOptions& options = {});

// --- Ratios ---------------------------------------------------------------------

struct RatioRow {
    std::string lemma;
    std::uint64_t active_count = 0;
    std::uint64_t passive_count = 0;
    double ratio = 0.0; // active / max(passive, 1)
    double log10_ratio = 0.0;
};

struct RatioPoint {
    std::string lemma;
    double log10_ratio = 0.0;
    double drop = 0.0;
};

// Rows for `lemmas` in the given order; lemmas missing from `counts` are
// omitted with a warning. Zero active counts yield log10_ratio = -inf.
std::vector<RatioRow> ratio_table(const CountTable& counts, std::span<const std::string> lemmas);

stats::CorrelationResult<double> correlate_ratio_drop(std::span<const RatioPoint> points);

void write_ratio_table(std::ostream& os, std::span<const RatioRow> rows);
CountTable read_count_table(std::istream& is);

// Labeled tagger suite: sentence, lemma, expected_label.
struct LabeledSentence {
    std::string sentence;
    std::string lemma;
    VoiceLabel expected;
};

std::vector<LabeledSentence> read_labeled_suite(std::istream& is);

} // namespace passdrop::corpus
