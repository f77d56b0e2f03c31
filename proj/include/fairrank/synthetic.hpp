#pragma once

// Seeded Gaussian-cluster corpora for exercising the pipeline without the
// original image collection.
//
// Every item sits at  group_mean + topic_offset + N(0, noise_scale^2 I).
// Topic offsets are mutually orthogonal (while the dimension allows) and of
// equal norm, so an item's distance to its group centroid does not depend on
// its topic. Each grouped item carries one tag from its group's vocabulary
// plus `topic_tags_per_item` tags drawn from its topic's vocabulary; items on
// the same topic therefore share enough tags to count as relevant to each
// other, items on different topics share at most the group tag. Groupless
// items sit at the centroid of the group means.

#include "fairrank/catalog.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fairrank {

struct SyntheticSpec {
    std::size_t num_groups = 2;
    std::size_t items_per_group = 240;
    std::size_t dimension = 16;
    /// Explicit group means; generated when empty (pairwise distance
    /// group_separation * noise_scale along the leading axes).
    std::vector<Vector> group_means;
    double group_separation = 10.0;
    double noise_scale = 1.0;
    /// Group identifiers; g0, g1, ... when empty.
    std::vector<GroupId> group_names;
    /// Tags mapped to each group; {group name} when empty.
    std::vector<std::vector<std::string>> group_tags;
    std::size_t num_topics = 10;
    /// Typical pairwise distance between topic offsets, in units of
    /// noise_scale.
    double topic_separation = 20.0;
    /// Orthogonal equal-norm offsets when true; isotropic Gaussian offsets
    /// (pairwise distances spread around topic_separation) when false.
    bool orthogonal_topics = true;
    std::size_t topic_vocabulary = 6;
    std::size_t topic_tags_per_item = 4;
    std::size_t groupless_items = 20;

    void validate() const;
    std::vector<GroupId> resolved_group_names() const;
};

struct SyntheticItemLog {
    std::string id;
    std::optional<std::size_t> group;  // index into the group list
    std::size_t topic = 0;
};

struct SyntheticCorpus {
    Catalog catalog;
    std::vector<SyntheticItemLog> log;  // generation order
};

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace fairrank
