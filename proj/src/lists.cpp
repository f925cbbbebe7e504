#include "passdrop/lists.hpp"

#include "passdrop/errors.hpp"
#include "passdrop/rng.hpp"
#include "passdrop/tsv.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include <fmt/format.h>

namespace passdrop {

namespace {

constexpr int kMaxVoiceRun = 2;

struct Item {
    std::size_t pair = 0;
    Voice voice = Voice::active;
    VerbClass cls = VerbClass::advantage;
};

// Adjacency constraints for appending `next` after `seq`.
bool can_follow(const std::vector<Item>& seq, const Item& next) {
    if (seq.empty()) return true;
    if (seq.back().cls == next.cls) return false;
    int run = 0;
    for (auto it = seq.rbegin(); it != seq.rend() && it->voice == next.voice; ++it) ++run;
    return run < kMaxVoiceRun;
}

bool sequence_ok(const std::vector<Item>& seq) {
    std::vector<Item> prefix;
    prefix.reserve(seq.size());
    for (const auto& it : seq) {
        if (!can_follow(prefix, it)) return false;
        prefix.push_back(it);
    }
    return true;
}

template <typename T>
std::vector<T> swap_halves(const std::vector<T>& v) {
    const auto half = static_cast<std::ptrdiff_t>(v.size() / 2);
    std::vector<T> out(v.begin() + half, v.end());
    out.insert(out.end(), v.begin(), v.begin() + half);
    return out;
}

template <typename T>
std::vector<T> reversed(std::vector<T> v) {
    std::reverse(v.begin(), v.end());
    return v;
}

// Randomized sequential construction: each step draws uniformly among the
// remaining items that satisfy the adjacency constraints; a dead end counts
// as one failed attempt.
std::optional<std::vector<Item>> try_order(std::vector<Item> pool, Engine& eng) {
    std::vector<Item> seq;
    seq.reserve(pool.size());
    std::vector<std::size_t> candidates;
    while (!pool.empty()) {
        candidates.clear();
        for (std::size_t i = 0; i < pool.size(); ++i)
            if (can_follow(seq, pool[i])) candidates.push_back(i);
        if (candidates.empty()) return std::nullopt;
        const auto pick = candidates[uniform_index(eng, candidates.size())];
        seq.push_back(pool[pick]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    // The half-swapped variant must satisfy the same constraints.
    if (!sequence_ok(swap_halves(seq))) return std::nullopt;
    return seq;
}

ExperimentList assemble(int bucket, char group, int variant, const std::vector<Item>& stimuli,
                        const std::vector<std::size_t>& filler_order, std::span<const SentencePair> pairs,
                        std::span<const Filler> fillers) {
    ExperimentList list;
    list.list_id = fmt::format("b{}-{}-v{}", bucket, group, variant);
    list.bucket = bucket;
    list.group = group;
    list.order_variant = variant;
    list.entries.reserve(stimuli.size() + filler_order.size());
    for (std::size_t i = 0; i < stimuli.size(); ++i) {
        const SentencePair& p = pairs[stimuli[i].pair];
        list.entries.push_back({list.entries.size(), ItemType::stimulus, p.text(stimuli[i].voice), p.pair_id,
                                stimuli[i].voice});
        list.entries.push_back(
            {list.entries.size(), ItemType::filler, fillers[filler_order[i]].text, std::string{}, std::nullopt});
    }
    return list;
}

} // namespace

std::vector<ExperimentList> build_experiment_lists(std::span<const SentencePair> pairs,
                                                   std::span<const Filler> fillers, std::uint64_t seed,
                                                   const ListBuildOptions& options) {
    if (pairs.size() % 4 != 0 || pairs.empty())
        throw ListBuildError(fmt::format("list building needs a multiple of 4 pairs, got {}", pairs.size()));
    const std::size_t group_size = pairs.size() / 2;
    if (fillers.size() != group_size)
        throw ListBuildError(
            fmt::format("each list alternates {} stimuli with as many fillers; got {} fillers", group_size, fillers.size()));

    // Bucket split: each verb contributes floor(k/2) or ceil(k/2) of its k pairs.
    std::map<std::string_view, std::vector<std::size_t>> by_verb;
    std::vector<std::string_view> verb_order;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        auto [it, inserted] = by_verb.try_emplace(pairs[i].verb.lemma);
        if (inserted) verb_order.push_back(pairs[i].verb.lemma);
        it->second.push_back(i);
    }
    Engine eng = substream(seed, 0);
    shuffle(verb_order.begin(), verb_order.end(), eng);
    std::size_t floor_total = 0;
    std::vector<std::string_view> odd_verbs;
    for (auto v : verb_order) {
        floor_total += by_verb[v].size() / 2;
        if (by_verb[v].size() % 2) odd_verbs.push_back(v);
    }
    if (floor_total > group_size || group_size - floor_total > odd_verbs.size())
        throw ListBuildError("bucket balance: cannot give each bucket half the pairs with half of each verb's frames");
    const std::set<std::string_view> gets_extra(odd_verbs.begin(),
                                                odd_verbs.begin() + static_cast<std::ptrdiff_t>(group_size - floor_total));

    std::array<std::vector<std::size_t>, 2> buckets;
    for (auto v : verb_order) {
        auto items = by_verb[v];
        shuffle(items.begin(), items.end(), eng);
        const std::size_t first = items.size() / 2 + (gets_extra.count(v) ? 1 : 0);
        buckets[0].insert(buckets[0].end(), items.begin(), items.begin() + static_cast<std::ptrdiff_t>(first));
        buckets[1].insert(buckets[1].end(), items.begin() + static_cast<std::ptrdiff_t>(first), items.end());
    }

    std::vector<ExperimentList> out;
    out.reserve(16);
    for (int b = 0; b < 2; ++b) {
        auto bucket = buckets[static_cast<std::size_t>(b)];
        std::sort(bucket.begin(), bucket.end());
        shuffle(bucket.begin(), bucket.end(), eng);
        // Group A sees the first half actively and the rest passively; B the reverse.
        std::array<std::vector<Item>, 2> groups;
        for (std::size_t i = 0; i < bucket.size(); ++i) {
            const bool first_half = i < bucket.size() / 2;
            const VerbClass cls = pairs[bucket[i]].class_id();
            groups[0].push_back({bucket[i], first_half ? Voice::active : Voice::passive, cls});
            groups[1].push_back({bucket[i], first_half ? Voice::passive : Voice::active, cls});
        }
        for (int g = 0; g < 2; ++g) {
            const char group = g == 0 ? 'A' : 'B';
            Engine order_eng = substream(seed, static_cast<std::uint64_t>(1 + 2 * b + g));
            std::optional<std::vector<Item>> order;
            for (int attempt = 0; attempt < options.max_attempts && !order; ++attempt)
                order = try_order(groups[static_cast<std::size_t>(g)], order_eng);
            if (!order)
                throw ListBuildError(fmt::format(
                    "bucket {} group {}: no ordering without adjacent same-class stimuli and with voice runs of at "
                    "most {} found in {} attempts",
                    b + 1, group, kMaxVoiceRun, options.max_attempts));

            std::vector<std::size_t> filler_order(fillers.size());
            for (std::size_t i = 0; i < filler_order.size(); ++i) filler_order[i] = i;
            shuffle(filler_order.begin(), filler_order.end(), order_eng);

            const auto v2 = swap_halves(*order);
            const auto f2 = swap_halves(filler_order);
            out.push_back(assemble(b + 1, group, 1, *order, filler_order, pairs, fillers));
            out.push_back(assemble(b + 1, group, 2, v2, f2, pairs, fillers));
            out.push_back(assemble(b + 1, group, 3, reversed(*order), reversed(filler_order), pairs, fillers));
            out.push_back(assemble(b + 1, group, 4, reversed(v2), reversed(f2), pairs, fillers));
        }
    }
    return out;
}

void write_experiment_list(std::ostream& os, const ExperimentList& list) {
    tsv::write_header(os, "list", 1, {"list_id", "slot_index", "item_type", "pair_id", "voice", "text"});
    for (const auto& s : list.entries) {
        os << list.list_id << '\t' << s.slot_index << '\t' << to_string(s.item_type) << '\t'
           << tsv::field(s.pair_id) << '\t' << (s.voice ? to_string(*s.voice) : "") << '\t' << tsv::field(s.text)
           << '\n';
    }
}

ExperimentList read_experiment_list(std::istream& is) {
    tsv::expect_header(is, "list", 1, {"list_id", "slot_index", "item_type", "pair_id", "voice", "text"},
                       "experiment list");
    ExperimentList list;
    std::string line;
    while (tsv::next_row(is, line)) {
        auto cols = tsv::split(line);
        if (cols.size() != 6) throw FormatError(fmt::format("experiment list: malformed row '{}'", line));
        if (list.list_id.empty()) list.list_id = std::string(cols[0]);
        if (list.list_id != cols[0]) throw FormatError("experiment list: rows from more than one list");
        ListSlot s;
        s.slot_index = static_cast<std::size_t>(tsv::parse_int(cols[1], "slot_index"));
        if (cols[2] == "stimulus") {
            s.item_type = ItemType::stimulus;
            s.voice = parse_voice(cols[4]);
        } else if (cols[2] == "filler") {
            s.item_type = ItemType::filler;
        } else {
            throw FormatError(fmt::format("experiment list: unknown item type '{}'", cols[2]));
        }
        s.pair_id = std::string(cols[3]);
        s.text = std::string(cols[5]);
        list.entries.push_back(std::move(s));
    }
    int bucket = 0, variant = 0;
    char group = 0;
    if (std::sscanf(list.list_id.c_str(), "b%d-%c-v%d", &bucket, &group, &variant) != 3)
        throw FormatError(fmt::format("experiment list: bad list id '{}'", list.list_id));
    list.bucket = bucket;
    list.group = group;
    list.order_variant = variant;
    return list;
}

} // namespace passdrop
