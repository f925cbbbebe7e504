#pragma once

#include "passdrop/lexicon.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace passdrop {

enum class Voice { active, passive };

std::string_view to_string(Voice v);
Voice parse_voice(std::string_view s); // throws FormatError

enum class ItemType { stimulus, filler };

std::string_view to_string(ItemType t);

// A subject/object template for one verb class. Controls reuse this type with
// a single-verb class, one per bespoke sentence. NPs are stored lowercase
// unless proper.
struct Frame {
    std::string frame_id;
    VerbClass class_id;
    std::string subject_np;
    std::string object_np;
    bool subject_proper = false;
    bool object_proper = false;
    std::string_view control_lemma{}; // non-empty for bespoke control sentences
};

struct SentencePair {
    std::string pair_id;
    VerbEntry verb;
    std::string frame_id;
    std::string active_text;
    std::string passive_text;
    bool is_control = false;

    VerbClass class_id() const { return verb.class_id; }
    const std::string& text(Voice v) const { return v == Voice::active ? active_text : passive_text; }
};

struct Filler {
    std::string text;
    bool grammatical = false;
};

// The 25 test-class frames (five per class), in presentation order.
std::span<const Frame> test_frames();
// The 50 bespoke control sentences (five per control verb).
std::span<const Frame> control_frames();

std::string activize(const Frame& frame, const VerbEntry& verb);
std::string passivize(const Frame& frame, const VerbEntry& verb); // throws StimulusError

struct ParsedPassive {
    std::string object_np;
    std::string participle;
    std::string subject_np;
};
// Inverse of passivize: recovers (object, participle, subject) with NPs lowercased
// unless they are "I". Returns nullopt on text that is not a long "was ... by" passive.
std::optional<ParsedPassive> parse_passive(std::string_view text);

// 90 test pairs followed by 50 control pairs, in lexicon order.
std::vector<SentencePair> generate_pairs();

std::vector<Filler> default_fillers();

// Delimited I/O. Every file starts with a versioned "#passdrop-..." line.
void write_stimuli(std::ostream& os, std::span<const SentencePair> pairs);
std::vector<SentencePair> read_stimuli(std::istream& is);

void write_fillers(std::ostream& os, std::span<const Filler> fillers);
std::vector<Filler> read_fillers(std::istream& is);

} // namespace passdrop
