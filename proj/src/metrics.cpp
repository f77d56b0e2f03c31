#include "fairrank/metrics.hpp"

#include "fairrank/error.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fairrank {

namespace {

std::size_t effective_k(std::span<const std::string> ids, std::size_t k, MetricValue& out) {
    out.k = std::min(k, ids.size());
    out.k_clamped = ids.size() < k;
    return out.k;
}

}  // namespace

std::size_t tag_match_threshold(std::size_t query_tag_count) { return (query_tag_count + 3) / 4; }

MetricValue precision_at_k(const EmbeddingItem& query, std::span<const std::string> result_ids,
                           const Catalog& catalog, std::size_t k) {
    MetricValue out;
    const auto top = effective_k(result_ids, k, out);
    if (query.tags.empty() || top == 0) return out;

    const auto threshold = tag_match_threshold(query.tags.size());
    std::size_t relevant = 0;
    for (std::size_t i = 0; i < top; ++i) {
        const auto& tags = catalog.at(result_ids[i]).tags;
        auto shared = std::count_if(tags.begin(), tags.end(),
                                    [&](const std::string& t) { return query.tags.contains(t); });
        if (static_cast<std::size_t>(shared) >= threshold) ++relevant;
    }
    out.value = static_cast<double>(relevant) / static_cast<double>(top);
    return out;
}

MetricValue fairness_ratio_at_k(std::span<const std::string> result_ids, const Catalog& catalog,
                                std::size_t k, const GroupPair& groups) {
    const auto& mapping = catalog.mapping();
    if (!mapping.declares(groups.first) || !mapping.declares(groups.second)) {
        throw ValidationError("fairness ratio: groups '" + groups.first + "', '" + groups.second +
                              "' are not both declared");
    }
    if (groups.first == groups.second) throw ValidationError("fairness ratio: groups must differ");

    MetricValue out;
    const auto top = effective_k(result_ids, k, out);
    std::size_t first = 0, second = 0;
    for (std::size_t i = 0; i < top; ++i) {
        const auto& g = catalog.at(result_ids[i]).groups;
        if (g.contains(groups.first)) ++first;
        if (g.contains(groups.second)) ++second;
    }
    if (first + second > 0) out.value = static_cast<double>(second) / static_cast<double>(first + second);
    return out;
}

std::map<GroupId, std::size_t> group_counts(std::span<const std::string> result_ids, const Catalog& catalog,
                                            std::size_t k) {
    std::map<GroupId, std::size_t> counts;
    for (const auto& g : catalog.mapping().groups) counts[g] = 0;
    const auto top = std::min(k, result_ids.size());
    for (std::size_t i = 0; i < top; ++i) {
        for (const auto& g : catalog.at(result_ids[i]).groups) ++counts[g];
    }
    return counts;
}

MetricValue entropy_at_k(std::span<const std::string> result_ids, const Catalog& catalog, std::size_t k) {
    if (catalog.mapping().groups.size() < 2) throw ValidationError("entropy: at least two groups required");
    MetricValue out;
    const auto top = effective_k(result_ids, k, out);
    const auto counts = group_counts(result_ids, catalog, top);
    std::size_t total = 0;
    for (const auto& [g, c] : counts) total += c;
    if (total == 0) return out;

    double h = 0.0;
    for (const auto& [g, c] : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log(p);
    }
    out.value = std::max(0.0, h);
    return out;
}

double parity_gap(const std::optional<double>& fairness_ratio) {
    if (!fairness_ratio) return std::numeric_limits<double>::infinity();
    return std::abs(*fairness_ratio - 0.5);
}

QueryEvaluation evaluate_query(const EmbeddingItem& query, std::span<const std::string> result_ids,
                               const Catalog& catalog, std::size_t k, const GroupPair& groups) {
    QueryEvaluation ev;
    ev.query_id = query.id;
    auto p = precision_at_k(query, result_ids, catalog, k);
    ev.k = p.k;
    ev.p_at_k = p.value;
    ev.fr_at_k = fairness_ratio_at_k(result_ids, catalog, k, groups).value;
    if (catalog.mapping().groups.size() >= 2) ev.entropy_at_k = entropy_at_k(result_ids, catalog, k).value;
    ev.group_counts = group_counts(result_ids, catalog, k);
    return ev;
}

GroupPair default_group_pair(const Catalog& catalog) {
    const auto& groups = catalog.mapping().groups;
    if (groups.size() < 2) throw ValidationError("fairness evaluation needs at least two groups");
    return {groups[0], groups[1]};
}

ConfidenceInterval t_confidence_interval(std::span<const double> samples, double confidence) {
    if (samples.size() < 2) throw ValidationError("confidence interval needs at least two samples");
    if (!(confidence > 0.0 && confidence < 1.0)) throw ValidationError("confidence must lie in (0, 1)");

    const double n = static_cast<double>(samples.size());
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (n - 1.0));

    ConfidenceInterval ci;
    ci.mean = mean;
    ci.confidence = confidence;
    ci.n = samples.size();
    const bool constant = std::all_of(samples.begin(), samples.end(), [&](double x) { return x == samples[0]; });
    if (constant) ci.mean = samples[0];
    if (!constant && sd > 0.0) {
        boost::math::students_t dist(n - 1.0);
        ci.half_width = boost::math::quantile(dist, (1.0 + confidence) / 2.0) * sd / std::sqrt(n);
    }
    return ci;
}

}  // namespace fairrank
