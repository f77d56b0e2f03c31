#pragma once

// Exact k-nearest-neighbour retrieval. Relevance is the negative distance
// between the query descriptor and each item.

#include "fairrank/catalog.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fairrank {

enum class Metric { euclidean, manhattan };

std::string_view to_string(Metric metric);
/// Throws ValidationError for anything other than "euclidean" / "manhattan".
Metric parse_metric(std::string_view name);

/// L2 or L1 distance. Throws ValidationError on dimension mismatch.
double distance(std::span<const double> u, std::span<const double> v, Metric metric);

struct ScoredCandidate {
    std::string id;
    double relevance = 0.0;  // always -distance for pools built by knn()
    double distance = 0.0;

    bool operator==(const ScoredCandidate&) const = default;
};

/// Candidates sorted by relevance descending, ties by id ascending.
struct CandidatePool {
    std::optional<std::string> query_id;
    std::vector<ScoredCandidate> candidates;
    std::size_t pool_size = 0;  // requested size; candidates may be fewer

    bool operator==(const CandidatePool&) const = default;
};

/// Sorts candidates into canonical order (relevance desc, id asc).
void canonicalize(CandidatePool& pool);

inline constexpr std::size_t kDefaultPoolSize = 50;

/// The `pool_size` items nearest to `query` (ties by id), skipping `exclude`
/// when it names a catalog item.
CandidatePool knn(const Catalog& catalog, std::span<const double> query, std::size_t pool_size,
                  Metric metric, std::optional<std::string_view> exclude = std::nullopt);

/// knn() for an in-catalog query item, excluding the item itself.
CandidatePool knn_for_item(const Catalog& catalog, const EmbeddingItem& query, std::size_t pool_size,
                           Metric metric);

/// Evaluates knn_for_item for each id on a worker pool. Output order matches
/// `query_ids` and equals sequential evaluation.
std::vector<CandidatePool> knn_batch(const Catalog& catalog, std::span<const std::string> query_ids,
                                     std::size_t pool_size, Metric metric, std::size_t workers = 0);

}  // namespace fairrank
