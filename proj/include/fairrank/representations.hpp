#pragma once

// Fairness representations: one mean descriptor per demographic group,
// optionally averaged over a seeded random fraction of the group's members.

#include "fairrank/catalog.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace fairrank {

/// How a representation was built. Absent for representations read back from
/// a file, which stores vectors only.
struct SampleProvenance {
    std::size_t sample_size = 0;
    double sampling_fraction = 1.0;
    std::uint64_t seed = 0;

    bool operator==(const SampleProvenance&) const = default;
};

struct FairnessRepresentation {
    GroupId group;
    Vector vector;
    std::optional<SampleProvenance> provenance;

    bool operator==(const FairnessRepresentation&) const = default;
};

class RepresentationSet {
public:
    /// Throws ValidationError if empty, if dimensions disagree, if a group
    /// repeats, or if a component is non-finite.
    explicit RepresentationSet(std::vector<FairnessRepresentation> reps);

    std::span<const FairnessRepresentation> reps() const { return reps_; }
    std::size_t size() const { return reps_.size(); }
    std::size_t dimension() const { return reps_.front().vector.size(); }

    bool operator==(const RepresentationSet&) const = default;

private:
    std::vector<FairnessRepresentation> reps_;
};

/// ceil(fraction * group_size) clamped to [1, group_size].
std::size_t sample_count(std::size_t group_size, double fraction);

/// One representation per declared group, in mapping order. With fraction 1
/// every member is averaged and no random draw happens. Otherwise each group
/// draws sample_count() members uniformly without replacement from its own
/// stream derived from `seed` and the group id.
RepresentationSet build_representations(const Catalog& catalog, double fraction, std::uint64_t seed);

/// Embeddings-format serialization with `group:`-prefixed ids.
void write_representations(std::ostream& out, const RepresentationSet& reps);
RepresentationSet read_representations(std::istream& in);

}  // namespace fairrank
