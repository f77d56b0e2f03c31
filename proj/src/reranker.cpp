#include "fairrank/reranker.hpp"

#include "fairrank/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fairrank {

namespace {

// Sum of -|a_v - b_v|, accumulated in representation order.
double profile_similarity(std::span<const double> a, std::span<const double> b) {
    double sim = 0.0;
    for (std::size_t v = 0; v < a.size(); ++v) sim += -std::abs(a[v] - b[v]);
    return sim;
}

}  // namespace

std::string_view to_string(Kernel kernel) {
    switch (kernel) {
        case Kernel::classic_mmr: return "mmr";
        case Kernel::fmmr: return "fmmr";
    }
    return "?";
}

Kernel parse_kernel(std::string_view name) {
    if (name == "mmr" || name == "classic_mmr") return Kernel::classic_mmr;
    if (name == "fmmr") return Kernel::fmmr;
    throw ValidationError("unknown kernel '" + std::string(name) + "'");
}

void RerankConfig::validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("lambda must lie in [0, 1]");
    if (k == 0) throw ValidationError("k must be at least 1");
}

std::vector<std::string> RankedResult::ids() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.id);
    return out;
}

std::vector<double> distance_profile(std::span<const double> x, const RepresentationSet& reps, Metric metric) {
    std::vector<double> profile;
    profile.reserve(reps.size());
    for (const auto& r : reps.reps()) profile.push_back(distance(x, r.vector, metric));
    return profile;
}

double fsim(std::span<const double> x, std::span<const double> y, const RepresentationSet& reps,
            Metric metric) {
    if (reps.size() == 0) throw ValidationError("fsim: empty representation set");
    if (x.size() != reps.dimension() || y.size() != reps.dimension()) {
        throw ValidationError("fsim: vector dimension does not match the representations");
    }
    return profile_similarity(distance_profile(x, reps, metric), distance_profile(y, reps, metric));
}

double classic_sim(std::span<const double> x, std::span<const double> y, Metric metric) {
    return -distance(x, y, metric);
}

RankedResult rerank(const CandidatePool& input_pool, const Catalog& catalog, const RepresentationSet* reps,
                    const RerankConfig& config) {
    config.validate();
    if (input_pool.candidates.empty()) throw ValidationError("rerank: empty candidate pool");
    if (config.kernel == Kernel::fmmr) {
        if (reps == nullptr) throw ValidationError("rerank: fmmr kernel requires fairness representations");
        if (reps->dimension() != catalog.dimension()) {
            throw ValidationError("rerank: representation dimension does not match the catalog");
        }
    }

    CandidatePool pool = input_pool;
    canonicalize(pool);
    const auto& cands = pool.candidates;
    const std::size_t n = cands.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (cands[i].id == cands[i - 1].id) {
            throw ValidationError("rerank: duplicate candidate '" + cands[i].id + "'");
        }
    }

    std::vector<const EmbeddingItem*> items(n);
    for (std::size_t i = 0; i < n; ++i) items[i] = &catalog.at(cands[i].id);

    // Per-candidate kernel features: fairness profiles, or raw vectors.
    std::vector<std::vector<double>> profiles;
    if (config.kernel == Kernel::fmmr) {
        profiles.reserve(n);
        for (const auto* item : items) profiles.push_back(distance_profile(item->vector, *reps, config.metric));
    }
    auto sim = [&](std::size_t a, std::size_t b) {
        if (config.kernel == Kernel::fmmr) return profile_similarity(profiles[a], profiles[b]);
        return classic_sim(items[a]->vector, items[b]->vector, config.metric);
    };

    std::vector<double> relevance(n);
    for (std::size_t i = 0; i < n; ++i) relevance[i] = cands[i].relevance;
    double gain_scale = 1.0;
    if (config.normalize_scores) {
        const auto [lo, hi] = std::minmax_element(relevance.begin(), relevance.end());
        const double rel_lo = *lo;
        const double rel_range = *hi - *lo;
        for (auto& r : relevance) r = rel_range > 0.0 ? (r - rel_lo) / rel_range : 0.0;

        double max_dissimilarity = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) max_dissimilarity = std::max(max_dissimilarity, -sim(a, b));
        }
        gain_scale = max_dissimilarity > 0.0 ? 1.0 / max_dissimilarity : 0.0;
    }

    const std::size_t k = std::min(config.k, n);
    const double lambda = config.lambda;

    RankedResult result;
    result.truncated_to_pool = config.k > n;
    result.entries.reserve(k);

    // max_sim[i] = max over the current selection of Sim(i, s); -inf while empty.
    std::vector<double> max_sim(n, -std::numeric_limits<double>::infinity());
    std::vector<bool> selected(n, false);

    for (std::size_t step = 0; step < k; ++step) {
        std::size_t best = n;
        double best_objective = 0.0;
        double best_gain = 0.0;
        // Candidates are in id-ascending order among equal relevance only, so
        // the id tie-break is applied explicitly.
        for (std::size_t i = 0; i < n; ++i) {
            if (selected[i]) continue;
            const double gain = step == 0 ? 0.0 : -max_sim[i] * gain_scale;
            const double objective = lambda * relevance[i] + (1.0 - lambda) * gain;
            if (best == n || objective > best_objective ||
                (objective == best_objective && cands[i].id < cands[best].id)) {
                best = i;
                best_objective = objective;
                best_gain = gain;
            }
        }

        selected[best] = true;
        result.entries.push_back({cands[best].id, best_objective, relevance[best], best_gain});
        for (std::size_t i = 0; i < n; ++i) {
            if (!selected[i]) max_sim[i] = std::max(max_sim[i], sim(i, best));
        }
    }
    return result;
}

}  // namespace fairrank
