#pragma once

// Greedy maximal-marginal-relevance re-ranking.
//
// At step j the candidate maximizing
//
//     lambda * rel(i) + (1 - lambda) * gain(i),   gain(i) = -max_{s in S} Sim(i, s)
//
// is appended to the selection S (gain is 0 while S is empty). Two kernels
// are available for Sim:
//
//   classic_mmr  Sim(x, y) = -d(x, y); penalizes near-duplicates.
//   fmmr         Sim(x, y) = sum_v -|d(x, v) - d(y, v)| over the fairness
//                representations v; penalizes items whose distance profile to
//                the groups matches something already selected.
//
// Ties on the objective are broken by id ascending.

#include "fairrank/catalog.hpp"
#include "fairrank/representations.hpp"
#include "fairrank/retrieval.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fairrank {

enum class Kernel { classic_mmr, fmmr };

std::string_view to_string(Kernel kernel);
/// Accepts "mmr", "classic_mmr" and "fmmr".
Kernel parse_kernel(std::string_view name);

struct RerankConfig {
    double lambda = 1.0;
    std::size_t k = 10;
    Kernel kernel = Kernel::fmmr;
    Metric metric = Metric::euclidean;
    /// Min-max scale relevance over the pool and divide the gain by the pool's
    /// largest pairwise dissimilarity, putting both terms in [0, 1].
    bool normalize_scores = false;

    void validate() const;
};

struct RankedEntry {
    std::string id;
    double objective = 0.0;       // lambda * relevance + (1 - lambda) * diversity_gain
    double relevance = 0.0;       // as used in the objective (scaled when normalizing)
    double diversity_gain = 0.0;  // as used in the objective (scaled when normalizing)
};

struct RankedResult {
    std::vector<RankedEntry> entries;
    /// Set when k exceeded the pool and the whole pool was returned.
    bool truncated_to_pool = false;

    std::vector<std::string> ids() const;
};

/// Fairness similarity between two descriptors. Always <= 0.
double fsim(std::span<const double> x, std::span<const double> y, const RepresentationSet& reps,
            Metric metric);

/// Negative distance.
double classic_sim(std::span<const double> x, std::span<const double> y, Metric metric);

/// Distances from `x` to each representation, in set order.
std::vector<double> distance_profile(std::span<const double> x, const RepresentationSet& reps, Metric metric);

/// Re-ranks `pool` (canonicalized first, so input order is irrelevant).
/// `reps` must be non-null for the fmmr kernel and is ignored otherwise.
RankedResult rerank(const CandidatePool& pool, const Catalog& catalog, const RepresentationSet* reps,
                    const RerankConfig& config);

}  // namespace fairrank
