// Independent checker for experiment lists. Works only from the emitted slots
// and the stimulus set; shares no code with the builder.

#include "passdrop/lists.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include <fmt/format.h>

namespace passdrop {

namespace {

struct StimulusRef {
    std::string pair_id;
    Voice voice;
    bool operator==(const StimulusRef&) const = default;
};

std::vector<StimulusRef> stimulus_sequence(const ExperimentList& list) {
    std::vector<StimulusRef> seq;
    for (const auto& s : list.entries)
        if (s.item_type == ItemType::stimulus && s.voice) seq.push_back({s.pair_id, *s.voice});
    return seq;
}

std::vector<std::string> filler_sequence(const ExperimentList& list) {
    std::vector<std::string> seq;
    for (const auto& s : list.entries)
        if (s.item_type == ItemType::filler) seq.push_back(s.text);
    return seq;
}

} // namespace

std::vector<std::string> validate_experiment_lists(std::span<const ExperimentList> lists,
                                                   std::span<const SentencePair> pairs,
                                                   std::span<const Filler> fillers) {
    std::vector<std::string> errors;
    auto fail = [&](std::string msg) { errors.push_back(std::move(msg)); };

    std::map<std::string, const SentencePair*> pair_by_id;
    for (const auto& p : pairs) pair_by_id[p.pair_id] = &p;
    std::multiset<std::string> filler_pool;
    for (const auto& f : fillers) filler_pool.insert(f.text);

    const std::size_t stimuli_per_list = pairs.size() / 2;
    if (lists.size() != 16) fail(fmt::format("expected 16 lists, got {}", lists.size()));

    std::map<std::tuple<int, char, int>, const ExperimentList*> by_key;
    for (const auto& list : lists) {
        const auto& id = list.list_id;
        if (!by_key.emplace(std::tuple{list.bucket, list.group, list.order_variant}, &list).second)
            fail(fmt::format("{}: duplicate bucket/group/variant", id));

        std::size_t n_stim = 0, n_fill = 0;
        for (std::size_t i = 0; i < list.entries.size(); ++i) {
            const auto& s = list.entries[i];
            if (s.slot_index != i) fail(fmt::format("{}: slot {} has index {}", id, i, s.slot_index));
            if (i > 0 && s.item_type == list.entries[i - 1].item_type)
                fail(fmt::format("{}: slots {} and {} are both {}", id, i - 1, i, to_string(s.item_type)));
            if (s.item_type == ItemType::stimulus) {
                ++n_stim;
                auto it = pair_by_id.find(s.pair_id);
                if (it == pair_by_id.end() || !s.voice) {
                    fail(fmt::format("{}: slot {} names unknown pair '{}'", id, i, s.pair_id));
                } else if (it->second->text(*s.voice) != s.text) {
                    fail(fmt::format("{}: slot {} text does not match pair '{}'", id, i, s.pair_id));
                }
            } else {
                ++n_fill;
                if (!filler_pool.count(s.text)) fail(fmt::format("{}: slot {} holds an unknown filler", id, i));
            }
        }
        if (n_stim != stimuli_per_list || n_fill != stimuli_per_list)
            fail(fmt::format("{}: {} stimuli and {} fillers, expected {} of each", id, n_stim, n_fill,
                             stimuli_per_list));
        auto fill = filler_sequence(list);
        std::multiset<std::string> fill_set(fill.begin(), fill.end());
        if (fill_set != filler_pool) fail(fmt::format("{}: does not use each filler exactly once", id));

        const auto seq = stimulus_sequence(list);
        std::set<std::string> seen;
        int voice_run = 0;
        for (std::size_t i = 0; i < seq.size(); ++i) {
            if (!seen.insert(seq[i].pair_id).second)
                fail(fmt::format("{}: pair '{}' appears twice", id, seq[i].pair_id));
            voice_run = (i > 0 && seq[i].voice == seq[i - 1].voice) ? voice_run + 1 : 1;
            if (voice_run > 2)
                fail(fmt::format("{}: {} consecutive {} stimuli ending at stimulus {}", id, voice_run,
                                 to_string(seq[i].voice), i));
            if (i == 0) continue;
            auto a = pair_by_id.find(seq[i - 1].pair_id);
            auto b = pair_by_id.find(seq[i].pair_id);
            if (a != pair_by_id.end() && b != pair_by_id.end() && a->second->class_id() == b->second->class_id())
                fail(fmt::format("{}: stimuli {} and {} share class {}", id, i - 1, i,
                                 to_string(b->second->class_id())));
        }
    }
    if (!errors.empty() || by_key.size() != 16) return errors;

    // Order variants: 2 = halves of 1 swapped, 3 = 1 reversed, 4 = 2 reversed.
    for (int b = 1; b <= 2; ++b) {
        for (char g : {'A', 'B'}) {
            auto get = [&](int v) -> const ExperimentList* {
                auto it = by_key.find({b, g, v});
                return it == by_key.end() ? nullptr : it->second;
            };
            const ExperimentList* v[5] = {nullptr, get(1), get(2), get(3), get(4)};
            if (!v[1] || !v[2] || !v[3] || !v[4]) {
                fail(fmt::format("bucket {} group {}: missing order variants", b, g));
                continue;
            }
            const auto s1 = stimulus_sequence(*v[1]);
            const auto half = s1.size() / 2;
            std::vector<StimulusRef> swapped(s1.begin() + static_cast<std::ptrdiff_t>(half), s1.end());
            swapped.insert(swapped.end(), s1.begin(), s1.begin() + static_cast<std::ptrdiff_t>(half));
            if (stimulus_sequence(*v[2]) != swapped)
                fail(fmt::format("bucket {} group {}: variant 2 is not variant 1 with halves swapped", b, g));
            auto r1 = s1;
            std::reverse(r1.begin(), r1.end());
            if (stimulus_sequence(*v[3]) != r1)
                fail(fmt::format("bucket {} group {}: variant 3 is not variant 1 reversed", b, g));
            auto r2 = stimulus_sequence(*v[2]);
            std::reverse(r2.begin(), r2.end());
            if (stimulus_sequence(*v[4]) != r2)
                fail(fmt::format("bucket {} group {}: variant 4 is not variant 2 reversed", b, g));
        }
    }

    // Counterbalancing: within a bucket the groups hold the same pairs in opposite voices;
    // buckets partition the pairs with two or three frames per verb each.
    std::map<std::string, int> bucket_of;
    for (int b = 1; b <= 2; ++b) {
        std::map<std::string, Voice> in_a, in_b;
        for (const auto& r : stimulus_sequence(*by_key.at({b, 'A', 1}))) in_a[r.pair_id] = r.voice;
        for (const auto& r : stimulus_sequence(*by_key.at({b, 'B', 1}))) in_b[r.pair_id] = r.voice;
        for (const auto& [pid, voice] : in_a) {
            auto it = in_b.find(pid);
            if (it == in_b.end())
                fail(fmt::format("bucket {}: pair '{}' is in group A only", b, pid));
            else if (it->second == voice)
                fail(fmt::format("bucket {}: pair '{}' has the same voice in both groups", b, pid));
            if (!bucket_of.emplace(pid, b).second) fail(fmt::format("pair '{}' appears in both buckets", pid));
        }
        for (const auto& [pid, voice] : in_b)
            if (!in_a.count(pid)) fail(fmt::format("bucket {}: pair '{}' is in group B only", b, pid));

        std::map<std::string, int> per_verb;
        for (const auto& [pid, voice] : in_a)
            if (auto it = pair_by_id.find(pid); it != pair_by_id.end()) ++per_verb[std::string(it->second->verb.lemma)];
        for (const auto& p : pairs) {
            const int k = per_verb[std::string(p.verb.lemma)];
            if (k < 2 || k > 3)
                fail(fmt::format("bucket {}: verb '{}' has {} frames, expected 2 or 3", b, p.verb.lemma, k));
        }
    }
    if (bucket_of.size() != pairs.size())
        fail(fmt::format("{} of {} pairs are assigned to a bucket", bucket_of.size(), pairs.size()));

    std::sort(errors.begin(), errors.end());
    errors.erase(std::unique(errors.begin(), errors.end()), errors.end());
    return errors;
}

} // namespace passdrop
