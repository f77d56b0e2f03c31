#include "fairrank/representations.hpp"

#include "fairrank/error.hpp"
#include "fairrank/seed.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <random>
#include <set>

namespace fairrank {

namespace {
constexpr std::string_view kGroupPrefix = "group:";
}

RepresentationSet::RepresentationSet(std::vector<FairnessRepresentation> reps) : reps_(std::move(reps)) {
    if (reps_.empty()) throw ValidationError("representation set is empty");
    const auto dim = reps_.front().vector.size();
    if (dim == 0) throw ValidationError("representation '" + reps_.front().group + "' has no components");
    std::set<GroupId> seen;
    for (const auto& r : reps_) {
        if (r.vector.size() != dim) {
            throw ValidationError("representation '" + r.group + "' has dimension " +
                                  std::to_string(r.vector.size()) + ", expected " + std::to_string(dim));
        }
        if (!std::all_of(r.vector.begin(), r.vector.end(), [](double v) { return std::isfinite(v); })) {
            throw ValidationError("representation '" + r.group + "' has a non-finite component");
        }
        if (!seen.insert(r.group).second) throw ValidationError("duplicate representation for '" + r.group + "'");
    }
}

std::size_t sample_count(std::size_t group_size, double fraction) {
    if (group_size == 0) throw ValidationError("sample_count: empty group");
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw ValidationError("sampling fraction must lie in (0, 1]");
    }
    // Tolerance keeps products such as 0.1 * 30 = 3.0000000000000004 at 3.
    auto n = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(group_size) - 1e-9));
    return std::clamp<std::size_t>(n, 1, group_size);
}

RepresentationSet build_representations(const Catalog& catalog, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw ValidationError("sampling fraction must lie in (0, 1]");
    }
    std::vector<FairnessRepresentation> reps;
    for (const auto& group : catalog.mapping().groups) {
        auto members = catalog.items_in_group(group);
        if (members.empty()) throw DataError("group '" + group + "' has no members");

        std::vector<const EmbeddingItem*> sample;
        if (fraction == 1.0) {
            sample = members;
        } else {
            std::mt19937_64 rng(derive_seed(seed, group));
            std::sample(members.begin(), members.end(), std::back_inserter(sample),
                        sample_count(members.size(), fraction), rng);
        }

        Vector mean(catalog.dimension(), 0.0);
        for (const auto* item : sample) {
            for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += item->vector[d];
        }
        for (auto& v : mean) v /= static_cast<double>(sample.size());

        reps.push_back({group, std::move(mean), SampleProvenance{sample.size(), fraction, seed}});
    }
    return RepresentationSet(std::move(reps));
}

void write_representations(std::ostream& out, const RepresentationSet& reps) {
    std::vector<EmbeddingRecord> records;
    for (const auto& r : reps.reps()) records.push_back({std::string(kGroupPrefix) + r.group, r.vector});
    write_embeddings(out, records);
}

RepresentationSet read_representations(std::istream& in) {
    std::vector<FairnessRepresentation> reps;
    for (auto& rec : read_embeddings(in)) {
        if (!rec.id.starts_with(kGroupPrefix)) {
            throw DataError("representation id '" + rec.id + "' lacks the 'group:' prefix");
        }
        reps.push_back({rec.id.substr(kGroupPrefix.size()), std::move(rec.vector), std::nullopt});
    }
    try {
        return RepresentationSet(std::move(reps));
    } catch (const ValidationError& e) {
        throw DataError(e.what());
    }
}

}  // namespace fairrank
