#include "fairrank/retrieval.hpp"

#include "fairrank/error.hpp"
#include "fairrank/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace fairrank {

std::string_view to_string(Metric metric) {
    switch (metric) {
        case Metric::euclidean: return "euclidean";
        case Metric::manhattan: return "manhattan";
    }
    return "?";
}

Metric parse_metric(std::string_view name) {
    if (name == "euclidean") return Metric::euclidean;
    if (name == "manhattan") return Metric::manhattan;
    throw ValidationError("unknown metric '" + std::string(name) + "'");
}

double distance(std::span<const double> u, std::span<const double> v, Metric metric) {
    if (u.size() != v.size()) {
        throw ValidationError("distance: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                              std::to_string(v.size()) + ")");
    }
    double acc = 0.0;
    if (metric == Metric::euclidean) {
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double diff = u[i] - v[i];
            acc += diff * diff;
        }
        return std::sqrt(acc);
    }
    for (std::size_t i = 0; i < u.size(); ++i) acc += std::abs(u[i] - v[i]);
    return acc;
}

void canonicalize(CandidatePool& pool) {
    std::sort(pool.candidates.begin(), pool.candidates.end(),
              [](const ScoredCandidate& a, const ScoredCandidate& b) {
                  if (a.relevance != b.relevance) return a.relevance > b.relevance;
                  return a.id < b.id;
              });
}

CandidatePool knn(const Catalog& catalog, std::span<const double> query, std::size_t pool_size,
                  Metric metric, std::optional<std::string_view> exclude) {
    if (catalog.size() == 0) throw DataError("knn: empty catalog");
    if (query.size() != catalog.dimension()) {
        throw ValidationError("knn: query dimension " + std::to_string(query.size()) +
                              " does not match catalog dimension " + std::to_string(catalog.dimension()));
    }
    if (pool_size == 0) throw ValidationError("knn: pool size must be at least 1");

    struct Hit {
        double dist;
        const EmbeddingItem* item;
    };
    std::vector<Hit> hits;
    hits.reserve(catalog.size());
    for (const auto& item : catalog.items()) {
        if (exclude && item.id == *exclude) continue;
        hits.push_back({distance(query, item.vector, metric), &item});
    }

    const auto take = std::min(pool_size, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(take), hits.end(),
                      [](const Hit& a, const Hit& b) {
                          if (a.dist != b.dist) return a.dist < b.dist;
                          return a.item->id < b.item->id;
                      });

    CandidatePool pool;
    if (exclude && catalog.find(*exclude) != nullptr) pool.query_id = std::string(*exclude);
    pool.pool_size = pool_size;
    pool.candidates.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        pool.candidates.push_back({hits[i].item->id, -hits[i].dist, hits[i].dist});
    }
    return pool;
}

CandidatePool knn_for_item(const Catalog& catalog, const EmbeddingItem& query, std::size_t pool_size,
                           Metric metric) {
    return knn(catalog, query.vector, pool_size, metric, query.id);
}

std::vector<CandidatePool> knn_batch(const Catalog& catalog, std::span<const std::string> query_ids,
                                     std::size_t pool_size, Metric metric, std::size_t workers) {
    std::vector<CandidatePool> out(query_ids.size());
    parallel_for(
        query_ids.size(),
        [&](std::size_t i) { out[i] = knn_for_item(catalog, catalog.at(query_ids[i]), pool_size, metric); },
        workers);
    return out;
}

}  // namespace fairrank
