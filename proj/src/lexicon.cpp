#include "passdrop/lexicon.hpp"

#include "passdrop/errors.hpp"

#include <algorithm>

namespace passdrop {

namespace {

// Order: test classes as listed in the materials, then the two control classes.
constexpr std::array<VerbEntry, 28> kLexicon = {{
    {"benefit", "benefits", "benefited", "benefited", "benefiting", VerbClass::advantage},
    {"help", "helps", "helped", "helped", "helping", VerbClass::advantage},
    {"profit", "profits", "profited", "profited", "profiting", VerbClass::advantage},
    {"strengthen", "strengthens", "strengthened", "strengthened", "strengthening", VerbClass::advantage},

    {"cost", "costs", "cost", "cost", "costing", VerbClass::price},
    {"earn", "earns", "earned", "earned", "earning", VerbClass::price},
    {"fetch", "fetches", "fetched", "fetched", "fetching", VerbClass::price},

    {"discharge", "discharges", "discharged", "discharged", "discharging", VerbClass::ooze},
    {"emanate", "emanates", "emanated", "emanated", "emanating", VerbClass::ooze},
    {"emit", "emits", "emitted", "emitted", "emitting", VerbClass::ooze},
    {"radiate", "radiates", "radiated", "radiated", "radiating", VerbClass::ooze},

    {"last", "lasts", "lasted", "lasted", "lasting", VerbClass::duration},
    {"require", "requires", "required", "required", "requiring", VerbClass::duration},
    {"take", "takes", "took", "taken", "taking", VerbClass::duration},

    {"approximate", "approximates", "approximated", "approximated", "approximating", VerbClass::estimation},
    {"match", "matches", "matched", "matched", "matching", VerbClass::estimation},
    {"mirror", "mirrors", "mirrored", "mirrored", "mirroring", VerbClass::estimation},
    {"resemble", "resembles", "resembled", "resembled", "resembling", VerbClass::estimation},

    {"hit", "hits", "hit", "hit", "hitting", VerbClass::agent_patient},
    {"push", "pushes", "pushed", "pushed", "pushing", VerbClass::agent_patient},
    {"wash", "washes", "washed", "washed", "washing", VerbClass::agent_patient},
    {"drop", "drops", "dropped", "dropped", "dropping", VerbClass::agent_patient},
    {"carry", "carries", "carried", "carried", "carrying", VerbClass::agent_patient},

    {"see", "sees", "saw", "seen", "seeing", VerbClass::experiencer_theme},
    {"hear", "hears", "heard", "heard", "hearing", VerbClass::experiencer_theme},
    {"know", "knows", "knew", "known", "knowing", VerbClass::experiencer_theme},
    {"like", "likes", "liked", "liked", "liking", VerbClass::experiencer_theme},
    {"remember", "remembers", "remembered", "remembered", "remembering", VerbClass::experiencer_theme},
}};

constexpr std::array<std::string_view, 7> kClassNames = {
    "advantage", "price", "ooze", "duration", "estimation", "agent_patient", "experiencer_theme",
};

} // namespace

std::string_view to_string(VerbClass c) { return kClassNames[static_cast<std::size_t>(c)]; }

VerbClass parse_verb_class(std::string_view s) {
    for (std::size_t i = 0; i < kClassNames.size(); ++i)
        if (kClassNames[i] == s) return static_cast<VerbClass>(i);
    throw LexiconError("unknown verb class '" + std::string(s) + "'");
}

std::span<const VerbEntry> lexicon() { return kLexicon; }

const VerbEntry& lookup_verb(std::string_view lemma) {
    auto it = std::find_if(kLexicon.begin(), kLexicon.end(),
                           [&](const VerbEntry& v) { return v.lemma == lemma; });
    if (it == kLexicon.end()) throw LexiconError("lemma '" + std::string(lemma) + "' is not in the lexicon");
    return *it;
}

std::string_view inflect(const VerbEntry& verb, VerbForm form) {
    switch (form) {
    case VerbForm::base: return verb.lemma;
    case VerbForm::third_sg: return verb.third_sg;
    case VerbForm::past: return verb.past;
    case VerbForm::past_participle: return verb.past_participle;
    case VerbForm::gerund: return verb.gerund;
    }
    return verb.lemma;
}

std::string_view inflect(std::string_view lemma, VerbForm form) { return inflect(lookup_verb(lemma), form); }

} // namespace passdrop
