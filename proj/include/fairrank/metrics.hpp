#pragma once

#include "fairrank/catalog.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fairrank {

/// A metric over the top-k of a result list. `value` is empty when the metric
/// is undefined (untagged query, no grouped results). When the list is shorter
/// than the requested k, `k` holds the clamped length and `k_clamped` is set.
struct MetricValue {
    std::optional<double> value;
    std::size_t k = 0;
    bool k_clamped = false;
};

/// (reference group, counted group). fr@k counts the second group in the
/// numerator.
using GroupPair = std::pair<GroupId, GroupId>;

/// Minimum number of shared tags for a result to count as relevant to a query
/// carrying `query_tag_count` tags: ceil(count / 4).
std::size_t tag_match_threshold(std::size_t query_tag_count);

MetricValue precision_at_k(const EmbeddingItem& query, std::span<const std::string> result_ids,
                           const Catalog& catalog, std::size_t k);

/// count(second) / (count(first) + count(second)) over the top-k. Items in
/// both groups count once in each tally; groupless items are ignored.
MetricValue fairness_ratio_at_k(std::span<const std::string> result_ids, const Catalog& catalog,
                                std::size_t k, const GroupPair& groups);

/// Shannon entropy (natural log) of the group distribution over the top-k.
MetricValue entropy_at_k(std::span<const std::string> result_ids, const Catalog& catalog, std::size_t k);

/// Per-group member counts over the top-k, one entry per declared group.
std::map<GroupId, std::size_t> group_counts(std::span<const std::string> result_ids, const Catalog& catalog,
                                            std::size_t k);

/// Distance from parity used to rank fairness outcomes; smaller is better.
/// Undefined ratios rank worst (+inf).
double parity_gap(const std::optional<double>& fairness_ratio);

struct QueryEvaluation {
    std::string query_id;
    std::size_t k = 0;
    std::optional<double> p_at_k;
    std::optional<double> fr_at_k;
    std::optional<double> entropy_at_k;
    std::map<GroupId, std::size_t> group_counts;
};

QueryEvaluation evaluate_query(const EmbeddingItem& query, std::span<const std::string> result_ids,
                               const Catalog& catalog, std::size_t k, const GroupPair& groups);

/// Default fairness pair: the first two declared groups.
GroupPair default_group_pair(const Catalog& catalog);

struct ConfidenceInterval {
    double mean = 0.0;
    double half_width = 0.0;
    double confidence = 0.95;
    std::size_t n = 0;
};

/// mean +- t_{(1+c)/2, n-1} * s / sqrt(n), with s the sample standard
/// deviation. Requires n >= 2 and confidence in (0, 1).
ConfidenceInterval t_confidence_interval(std::span<const double> samples, double confidence = 0.95);

}  // namespace fairrank
