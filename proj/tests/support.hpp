#pragma once

// Helpers shared by the unit tests and the acceptance runner: small catalog
// builders, random instance generation and reference implementations that
// deliberately avoid the library code they check.

#include "fairrank/catalog.hpp"
#include "fairrank/representations.hpp"
#include "fairrank/retrieval.hpp"
#include "fairrank/reranker.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace testsupport {

namespace fr = fairrank;

inline double ref_distance(std::span<const double> a, std::span<const double> b, fr::Metric metric) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += metric == fr::Metric::euclidean ? d * d : std::abs(d);
    }
    return metric == fr::Metric::euclidean ? std::sqrt(acc) : acc;
}

// Sim straight from its definition: classic is -d(x, y); the fairness kernel
// compares the two distance profiles against every representation.
inline double ref_sim(std::span<const double> x, std::span<const double> y, const fr::RepresentationSet* reps,
                      fr::Kernel kernel, fr::Metric metric) {
    if (kernel == fr::Kernel::classic_mmr) return -ref_distance(x, y, metric);
    double s = 0.0;
    for (const auto& r : reps->reps()) s -= std::abs(ref_distance(x, r.vector, metric) - ref_distance(y, r.vector, metric));
    return s;
}

// From-scratch greedy: at every step recompute the full objective for every
// remaining candidate, nothing cached between steps.
inline std::vector<std::string> naive_rerank(const fr::CandidatePool& pool, const fr::Catalog& catalog,
                                             const fr::RepresentationSet* reps, double lambda, std::size_t k,
                                             fr::Kernel kernel, fr::Metric metric) {
    std::vector<std::string> chosen;
    std::vector<bool> used(pool.candidates.size(), false);
    const std::size_t steps = std::min(k, pool.candidates.size());
    for (std::size_t step = 0; step < steps; ++step) {
        std::size_t best = pool.candidates.size();
        double best_obj = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pool.candidates.size(); ++i) {
            if (used[i]) continue;
            const auto& c = pool.candidates[i];
            double gain = 0.0;
            if (!chosen.empty()) {
                double max_sim = -std::numeric_limits<double>::infinity();
                for (const auto& s : chosen) {
                    max_sim = std::max(max_sim, ref_sim(catalog.at(c.id).vector, catalog.at(s).vector, reps, kernel, metric));
                }
                gain = -max_sim;
            }
            const double obj = lambda * c.relevance + (1.0 - lambda) * gain;
            if (best == pool.candidates.size() || obj > best_obj ||
                (obj == best_obj && c.id < pool.candidates[best].id)) {
                best = i;
                best_obj = obj;
            }
        }
        used[best] = true;
        chosen.push_back(pool.candidates[best].id);
    }
    return chosen;
}

struct RandomInstance {
    fr::Catalog catalog;
    fr::RepresentationSet reps;
    fr::Vector query;
};

// Small random catalog: `n` items in `dim` dimensions, groups g0..g{G-1}
// assigned round-robin, each group's representation the mean of its members.
inline RandomInstance random_instance(std::mt19937_64& rng, std::size_t n, std::size_t dim, std::size_t groups) {
    std::normal_distribution<double> normal(0.0, 1.0);
    fr::GroupMapping mapping;
    for (std::size_t g = 0; g < groups; ++g) {
        mapping.groups.push_back("g" + std::to_string(g));
        mapping.tag_rules["t" + std::to_string(g)] = "g" + std::to_string(g);
    }
    std::vector<fr::Catalog::Record> records;
    for (std::size_t i = 0; i < n; ++i) {
        fr::Vector v(dim);
        for (auto& x : v) x = normal(rng) * 3.0;
        char id[32];
        std::snprintf(id, sizeof id, "c%03zu", i);
        records.push_back({id, v, {"t" + std::to_string(i % groups), "topic"}});
    }
    fr::Catalog catalog(std::move(records), mapping);
    auto reps = fr::build_representations(catalog, 1.0, 0);
    fr::Vector q(dim);
    for (auto& x : q) x = normal(rng) * 3.0;
    return {std::move(catalog), std::move(reps), std::move(q)};
}

}  // namespace testsupport
