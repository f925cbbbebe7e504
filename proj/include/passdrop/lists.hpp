#pragma once

#include "passdrop/stimuli.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace passdrop {

struct ListSlot {
    std::size_t slot_index = 0;
    ItemType item_type = ItemType::stimulus;
    std::string text;
    std::string pair_id;        // stimuli only
    std::optional<Voice> voice; // stimuli only
};

struct ExperimentList {
    std::string list_id; // "b<bucket>-<group>-v<variant>"
    int bucket = 1;      // 1 | 2
    char group = 'A';    // 'A' | 'B'
    int order_variant = 1;
    std::vector<ListSlot> entries;
};

struct ListBuildOptions {
    int max_attempts = 10'000; // constructions tried per group before giving up
};

// Counterbalanced presentation lists: 2 buckets x 2 groups x 4 order variants.
// Throws ListBuildError naming the constraint that could not be met.
std::vector<ExperimentList> build_experiment_lists(std::span<const SentencePair> pairs,
                                                   std::span<const Filler> fillers, std::uint64_t seed,
                                                   const ListBuildOptions& options = {});

// Checks every ordering and counterbalancing constraint on a full list set.
// Returns one human-readable message per violation; empty means valid.
std::vector<std::string> validate_experiment_lists(std::span<const ExperimentList> lists,
                                                   std::span<const SentencePair> pairs,
                                                   std::span<const Filler> fillers);

void write_experiment_list(std::ostream& os, const ExperimentList& list);
ExperimentList read_experiment_list(std::istream& is);

} // namespace passdrop
