#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>

namespace passdrop {

enum class VerbClass {
    advantage,
    price,
    ooze,
    duration,
    estimation,
    agent_patient,
    experiencer_theme,
};

inline constexpr std::array<VerbClass, 7> kAllClasses = {
    VerbClass::advantage,     VerbClass::price,         VerbClass::ooze,
    VerbClass::duration,      VerbClass::estimation,    VerbClass::agent_patient,
    VerbClass::experiencer_theme,
};

std::string_view to_string(VerbClass c);
VerbClass parse_verb_class(std::string_view s); // throws LexiconError

inline bool is_control_class(VerbClass c) {
    return c == VerbClass::agent_patient || c == VerbClass::experiencer_theme;
}

enum class VerbForm { base, third_sg, past, past_participle, gerund };

// One of the 28 verbs in the stimulus set, with its full closed inflection.
struct VerbEntry {
    std::string_view lemma;
    std::string_view third_sg;
    std::string_view past;
    std::string_view past_participle;
    std::string_view gerund;
    VerbClass class_id;
};

std::span<const VerbEntry> lexicon();
const VerbEntry& lookup_verb(std::string_view lemma); // throws LexiconError

std::string_view inflect(const VerbEntry& verb, VerbForm form);
std::string_view inflect(std::string_view lemma, VerbForm form);

} // namespace passdrop
