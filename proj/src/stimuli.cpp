#include "passdrop/stimuli.hpp"

#include "passdrop/errors.hpp"
#include "passdrop/tsv.hpp"

#include <cctype>
#include <istream>
#include <map>
#include <ostream>
#include <regex>

#include <fmt/format.h>

namespace passdrop {

namespace {

struct NpPair {
    const char* subject;
    const char* object;
};

// Five frames per test class, in the order of the published materials.
const std::map<VerbClass, std::array<NpPair, 5>>& test_frame_table() {
    static const std::map<VerbClass, std::array<NpPair, 5>> table = {
        {VerbClass::advantage,
         {{{"your investment", "the community"},
           {"the exercise", "his fitness"},
           {"our friendship", "my life"},
           {"the law", "these workers"},
           {"the treaty", "both countries"}}}},
        {VerbClass::price,
         {{{"your dish", "ninety dollars"},
           {"the painting", "a fortune"},
           {"the tickets", "a lot of money"},
           {"your book", "thirty dollars"},
           {"his actions", "the medal"}}}},
        {VerbClass::ooze,
         {{{"my friend", "confidence"},
           {"the lightbulb", "some light"},
           {"that machine", "a sound"},
           {"the teacher", "wisdom"},
           {"the trash", "an odor"}}}},
        {VerbClass::duration,
         {{{"the journey", "three days"},
           {"my meeting", "two hours"},
           {"the interview", "some time"},
           {"her speech", "seventeen minutes"},
           {"his trek", "a month"}}}},
        {VerbClass::estimation,
         {{{"your drawing", "her likeness"},
           {"your friend", "my brother"},
           {"the character", "the author"},
           {"her son", "her father"},
           {"the copy", "the original"}}}},
    };
    return table;
}

// Bespoke control sentences, five per verb.
const std::vector<std::pair<std::string_view, std::array<NpPair, 5>>>& control_table() {
    static const std::vector<std::pair<std::string_view, std::array<NpPair, 5>>> table = {
        {"hit",
         {{{"my brother", "your friend"},
           {"your sister", "the target"},
           {"the child", "the ball"},
           {"a boy", "my bag"},
           {"a monkey", "the toy"}}}},
        {"push",
         {{{"my brother", "a child"},
           {"the mother", "my toy"},
           {"a boy", "the cup"},
           {"a child", "the bag"},
           {"your sister", "your friend"}}}},
        {"wash",
         {{{"a boy", "the cup"},
           {"a child", "the bag"},
           {"my sister", "a towel"},
           {"my brother", "my plate"},
           {"your mother", "my toy"}}}},
        {"drop",
         {{{"my brother", "my plate"},
           {"the mother", "my toy"},
           {"a boy", "the cup"},
           {"a child", "the bag"},
           {"your sister", "a book"}}}},
        {"carry",
         {{{"a boy", "my bag"},
           {"your mother", "the child"},
           {"my brother", "your friend"},
           {"the dog", "the toy"},
           {"the donkey", "the load"}}}},
        {"see",
         {{{"my brother", "your friend"},
           {"your dog", "the toy"},
           {"your sister", "a book"},
           {"a boy", "my bag"},
           {"the child", "a monkey"}}}},
        {"hear",
         {{{"a boy", "the sound"},
           {"the child", "the rules"},
           {"my brother", "your friend"},
           {"your dog", "the toy"},
           {"your sister", "a squeak"}}}},
        {"know",
         {{{"my brother", "your friend"},
           {"your dog", "my cat"},
           {"your sister", "my brother"},
           {"a boy", "my mother"},
           {"the mother", "the dog"}}}},
        {"like",
         {{{"a boy", "the game"},
           {"the child", "a monkey"},
           {"my brother", "your friend"},
           {"your dog", "the toy"},
           {"your sister", "a book"}}}},
        {"remember",
         {{{"my brother", "your friend"},
           {"your dog", "my toy"},
           {"your sister", "a book"},
           {"a boy", "the game"},
           {"the child", "the rules"}}}},
    };
    return table;
}

std::vector<Frame> build_test_frames() {
    std::vector<Frame> out;
    for (VerbClass c : kAllClasses) {
        auto it = test_frame_table().find(c);
        if (it == test_frame_table().end()) continue;
        for (std::size_t i = 0; i < it->second.size(); ++i) {
            Frame f;
            f.frame_id = fmt::format("{}.f{}", to_string(c), i + 1);
            f.class_id = c;
            f.subject_np = it->second[i].subject;
            f.object_np = it->second[i].object;
            out.push_back(std::move(f));
        }
    }
    return out;
}

std::vector<Frame> build_control_frames() {
    std::vector<Frame> out;
    for (const auto& [lemma, rows] : control_table()) {
        const VerbEntry& verb = lookup_verb(lemma);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            Frame f;
            f.frame_id = fmt::format("{}.{}.c{}", to_string(verb.class_id), verb.lemma, i + 1);
            f.class_id = verb.class_id;
            f.subject_np = rows[i].subject;
            f.object_np = rows[i].object;
            f.control_lemma = verb.lemma;
            out.push_back(std::move(f));
        }
    }
    return out;
}

bool is_first_person(std::string_view np) { return np == "I" || np.starts_with("I "); }

std::string sentence_initial(std::string np) {
    if (!np.empty()) np[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(np[0])));
    return np;
}

std::string non_initial(std::string np, bool proper) {
    if (!np.empty() && !proper && !is_first_person(np))
        np[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(np[0])));
    return np;
}

void check_frame(const Frame& frame, const VerbEntry& verb) {
    if (frame.class_id != verb.class_id)
        throw StimulusError(fmt::format("frame '{}' belongs to class {} but verb '{}' is {}", frame.frame_id,
                                        to_string(frame.class_id), verb.lemma, to_string(verb.class_id)));
    if (!frame.control_lemma.empty() && frame.control_lemma != verb.lemma)
        throw StimulusError(fmt::format("control sentence '{}' is specific to '{}', not '{}'", frame.frame_id,
                                        frame.control_lemma, verb.lemma));
    if (frame.subject_np.empty() || frame.object_np.empty())
        throw StimulusError(fmt::format("frame '{}' has an empty noun phrase", frame.frame_id));
}

} // namespace

std::string_view to_string(Voice v) { return v == Voice::active ? "active" : "passive"; }

Voice parse_voice(std::string_view s) {
    if (s == "active") return Voice::active;
    if (s == "passive") return Voice::passive;
    throw FormatError(fmt::format("unknown voice '{}'", s));
}

std::string_view to_string(ItemType t) { return t == ItemType::stimulus ? "stimulus" : "filler"; }

std::span<const Frame> test_frames() {
    static const std::vector<Frame> frames = build_test_frames();
    return frames;
}

std::span<const Frame> control_frames() {
    static const std::vector<Frame> frames = build_control_frames();
    return frames;
}

std::string activize(const Frame& frame, const VerbEntry& verb) {
    check_frame(frame, verb);
    return fmt::format("{} {} {}.", sentence_initial(frame.subject_np), verb.past,
                       non_initial(frame.object_np, frame.object_proper));
}

std::string passivize(const Frame& frame, const VerbEntry& verb) {
    check_frame(frame, verb);
    return fmt::format("{} was {} by {}.", sentence_initial(frame.object_np), verb.past_participle,
                       non_initial(frame.subject_np, frame.subject_proper));
}

std::optional<ParsedPassive> parse_passive(std::string_view text) {
    static const std::regex re(R"(^(.+) was (\S+) by (.+)\.$)");
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_match(text.begin(), text.end(), m, re)) return std::nullopt;
    return ParsedPassive{non_initial(m[1].str(), false), m[2].str(), non_initial(m[3].str(), false)};
}

std::vector<SentencePair> generate_pairs() {
    std::vector<SentencePair> out;
    out.reserve(140);
    auto add = [&](const Frame& f, const VerbEntry& v, std::string_view suffix) {
        SentencePair p;
        p.pair_id = fmt::format("{}.{}.{}", to_string(v.class_id), v.lemma, suffix);
        p.verb = v;
        p.frame_id = f.frame_id;
        p.active_text = activize(f, v);
        p.passive_text = passivize(f, v);
        p.is_control = !f.control_lemma.empty();
        out.push_back(std::move(p));
    };
    for (const VerbEntry& v : lexicon()) {
        if (is_control_class(v.class_id)) continue;
        for (const Frame& f : test_frames())
            if (f.class_id == v.class_id) add(f, v, f.frame_id.substr(f.frame_id.rfind('.') + 1));
    }
    for (const Frame& f : control_frames())
        add(f, lookup_verb(f.control_lemma), f.frame_id.substr(f.frame_id.rfind('.') + 1));
    return out;
}

std::vector<Filler> default_fillers() {
    // Placeholders: the original filler items were not published.
    static const char* const grammatical[] = {
        "The baker sold fresh bread this morning.",
        "My neighbor painted the fence green.",
        "The students finished their homework early.",
        "A small bird sang outside the window.",
        "The river flows gently through the valley.",
        "Her grandmother baked an apple pie.",
        "The children played in the park.",
        "We visited the museum on Sunday.",
        "The train arrived ten minutes late.",
        "The cat slept on the warm blanket.",
        "My cousin plays the violin beautifully.",
        "The gardener planted roses along the path.",
        "They watched a movie after dinner.",
        "The old man walked his dog slowly.",
        "The chef cooked a delicious meal.",
        "Our team won the final game.",
        "The wind blew the leaves across the yard.",
        "She wrote a long letter to her friend.",
        "The mechanic fixed the broken engine.",
        "A tall tree stands behind the school.",
        "The teacher read a story to the class.",
        "My parents bought a new car.",
        "The audience clapped loudly at the end.",
        "The farmer fed the hungry chickens.",
    };
    static const char* const ungrammatical[] = {
        "The baker bread sold fresh this morning the.",
        "My neighbor painted green fence the the.",
        "Students the finished homework their early.",
        "A bird small sang window outside the.",
        "The river flow gently through valley the.",
        "Her grandmother an apple baked pie.",
        "The children in played park the.",
        "We visited museum the Sunday on.",
        "The train arrive ten minutes lately.",
        "The cat slept warm on the blanket the.",
        "My cousin play the violin beautiful.",
        "The gardener roses planted along path the.",
        "They watched movie a dinner after.",
        "The old man his dog walked slowly slowly.",
        "The chef a meal cooked delicious.",
        "Our team the final game winned.",
        "The wind the leaves blew yard across.",
        "She a long letter wrote her friend to.",
        "The mechanic fixed engine broken the.",
        "A tall tree stand behind school the.",
        "The teacher a story read to class the.",
        "My parents a new car buyed.",
        "The audience loudly clapped at end the.",
        "The farmer the hungry fed chickens.",
        "Is the book on table the where?",
        "He have went to the store yesterday.",
        "The dogs is barking at mailman the.",
        "She don't likes the cold weather.",
        "They was singing songs all night.",
        "I has finished the reading of book.",
        "The boy who the ball threw ran.",
        "Many person attends the concert.",
        "The sun shined bright yesterdays.",
        "We goed to the beach last summer.",
        "The pencil is more sharper than pen.",
        "Him and me went the lake to.",
        "The cookies was eated by nobody all.",
        "A apple fell from tree the.",
        "The doctor gave to medicine the patient the.",
        "She is more taller than her brother is.",
        "The baby cried loudly very much the.",
        "The letters arrives every mornings.",
        "He can swims across the river.",
        "The flowers smells nice in spring the.",
        "Whom did the said students go?",
        "The car red fast drove down street.",
    };
    std::vector<Filler> out;
    for (const char* t : grammatical) out.push_back({t, true});
    for (const char* t : ungrammatical) out.push_back({t, false});
    return out;
}

void write_stimuli(std::ostream& os, std::span<const SentencePair> pairs) {
    tsv::write_header(os, "stimuli", 1, {"pair_id", "class", "lemma", "frame_id", "voice", "is_control", "text"});
    for (const auto& p : pairs) {
        for (Voice v : {Voice::active, Voice::passive}) {
            os << tsv::field(p.pair_id) << '\t' << to_string(p.class_id()) << '\t' << p.verb.lemma << '\t'
               << tsv::field(p.frame_id) << '\t' << to_string(v) << '\t' << (p.is_control ? "true" : "false")
               << '\t' << tsv::field(p.text(v)) << '\n';
        }
    }
}

std::vector<SentencePair> read_stimuli(std::istream& is) {
    tsv::expect_header(is, "stimuli", 1, {"pair_id", "class", "lemma", "frame_id", "voice", "is_control", "text"},
                       "stimulus file");
    std::vector<SentencePair> out;
    std::map<std::string, std::size_t> index;
    std::string line;
    std::size_t row = 2;
    while (tsv::next_row(is, line)) {
        ++row;
        auto cols = tsv::split(line);
        if (cols.size() != 7) throw FormatError(fmt::format("stimulus file row {}: expected 7 columns", row));
        const VerbEntry& verb = lookup_verb(cols[2]);
        if (parse_verb_class(cols[1]) != verb.class_id)
            throw FormatError(fmt::format("stimulus file row {}: class does not match lemma '{}'", row, verb.lemma));
        std::string pair_id(cols[0]);
        auto [it, inserted] = index.try_emplace(pair_id, out.size());
        if (inserted) {
            SentencePair p;
            p.pair_id = pair_id;
            p.verb = verb;
            p.frame_id = std::string(cols[3]);
            p.is_control = tsv::parse_bool(cols[5], "is_control");
            out.push_back(std::move(p));
        }
        SentencePair& p = out[it->second];
        if (p.verb.lemma != verb.lemma || p.frame_id != cols[3])
            throw FormatError(fmt::format("stimulus file row {}: inconsistent rows for pair '{}'", row, pair_id));
        std::string& slot = parse_voice(cols[4]) == Voice::active ? p.active_text : p.passive_text;
        if (!slot.empty())
            throw FormatError(fmt::format("stimulus file row {}: duplicate {} row for pair '{}'", row, cols[4], pair_id));
        slot = std::string(cols[6]);
    }
    for (const auto& p : out)
        if (p.active_text.empty() || p.passive_text.empty())
            throw FormatError(fmt::format("stimulus file: pair '{}' lacks one of its voices", p.pair_id));
    return out;
}

void write_fillers(std::ostream& os, std::span<const Filler> fillers) {
    tsv::write_header(os, "fillers", 1, {"grammatical", "text"});
    for (const auto& f : fillers) os << (f.grammatical ? "true" : "false") << '\t' << tsv::field(f.text) << '\n';
}

std::vector<Filler> read_fillers(std::istream& is) {
    tsv::expect_header(is, "fillers", 1, {"grammatical", "text"}, "filler file");
    std::vector<Filler> out;
    std::string line;
    while (tsv::next_row(is, line)) {
        auto cols = tsv::split(line);
        if (cols.size() != 2) throw FormatError(fmt::format("filler file: malformed row '{}'", line));
        out.push_back({std::string(cols[1]), tsv::parse_bool(cols[0], "grammatical")});
    }
    return out;
}

} // namespace passdrop
