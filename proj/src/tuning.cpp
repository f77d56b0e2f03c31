#include "fairrank/tuning.hpp"

#include "fairrank/error.hpp"
#include "fairrank/parallel.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace fairrank {

namespace {

GroupPair resolve_groups(const TuningConfig& tuning, const Catalog& catalog) {
    return tuning.groups ? *tuning.groups : default_group_pair(catalog);
}

CurvePoint evaluate_point(const EmbeddingItem& query, const CandidatePool& pool, const Catalog& catalog,
                          const RepresentationSet* reps, const TuningConfig& tuning, Kernel kernel,
                          const GroupPair& groups, double lambda) {
    const auto ids = rerank(pool, catalog, reps, tuning.rerank_config(lambda, kernel)).ids();
    return {lambda, precision_at_k(query, ids, catalog, tuning.k).value,
            fairness_ratio_at_k(ids, catalog, tuning.k, groups).value};
}

std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

}  // namespace

void TuningConfig::validate() const {
    if (grid_size == 0) throw ValidationError("grid size must be at least 1");
    if (!(degradation >= 0.0 && degradation <= 1.0)) throw ValidationError("degradation ratio must lie in [0, 1]");
    if (k == 0) throw ValidationError("k must be at least 1");
    if (pool_size == 0) throw ValidationError("pool size must be at least 1");
}

std::vector<double> TuningConfig::grid() const {
    std::vector<double> out(grid_size);
    for (std::size_t i = 0; i < grid_size; ++i) out[i] = static_cast<double>(i) / static_cast<double>(grid_size);
    return out;
}

RerankConfig TuningConfig::rerank_config(double lambda, Kernel kernel) const {
    RerankConfig cfg;
    cfg.lambda = lambda;
    cfg.k = k;
    cfg.kernel = kernel;
    cfg.metric = metric;
    cfg.normalize_scores = normalize_scores;
    return cfg;
}

bool satisfies_degradation(double p, double baseline, double degradation) {
    return p + 1e-12 >= (1.0 - degradation) * baseline;
}

QueryTuning best_lambda_for_query(const EmbeddingItem& query, const Catalog& catalog,
                                  const RepresentationSet* reps, const TuningConfig& tuning, Kernel kernel) {
    tuning.validate();
    if (query.tags.empty()) {
        throw ValidationError("query '" + query.id + "' has no tags; precision is undefined");
    }
    const auto groups = resolve_groups(tuning, catalog);
    const auto pool = knn_for_item(catalog, query, tuning.pool_size, tuning.metric);

    QueryTuning out;
    out.query_id = query.id;
    out.baseline = evaluate_point(query, pool, catalog, reps, tuning, kernel, groups, 1.0);
    const double baseline_p = out.baseline.p_at_k.value_or(0.0);

    const CurvePoint* best = nullptr;
    for (double lambda : tuning.grid()) {
        out.curve.push_back(evaluate_point(query, pool, catalog, reps, tuning, kernel, groups, lambda));
    }
    for (const auto& point : out.curve) {
        if (!point.p_at_k || !satisfies_degradation(*point.p_at_k, baseline_p, tuning.degradation)) continue;
        // Grid ascends in lambda, so <= keeps the larger lambda on ties.
        if (best == nullptr || parity_gap(point.fr_at_k) <= parity_gap(best->fr_at_k)) best = &point;
    }

    if (best == nullptr) {
        out.best_lambda = 1.0;
        out.constraint_binding = true;
        out.chosen = out.baseline;
    } else {
        out.best_lambda = best->lambda;
        out.chosen = *best;
    }
    return out;
}

TuningResult tune(std::span<const std::string> query_ids, const Catalog& catalog, const RepresentationSet* reps,
                  const TuningConfig& tuning, Kernel kernel) {
    tuning.validate();
    std::vector<std::optional<QueryTuning>> results(query_ids.size());
    parallel_for(
        query_ids.size(),
        [&](std::size_t i) {
            const auto& query = catalog.at(query_ids[i]);
            if (query.tags.empty()) return;
            results[i] = best_lambda_for_query(query, catalog, reps, tuning, kernel);
        },
        tuning.workers);

    TuningResult out;
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < query_ids.size(); ++i) {
        if (!results[i]) {
            out.skipped.push_back(query_ids[i]);
            continue;
        }
        sum += results[i]->best_lambda;
        ++used;
        out.per_query_best_lambda[query_ids[i]] = results[i]->best_lambda;
        out.per_query[query_ids[i]] = std::move(*results[i]);
    }
    if (used == 0) throw ValidationError("tune: every query was skipped (no tagged queries)");
    out.overall_lambda = sum / static_cast<double>(used);
    return out;
}

std::vector<QueryEvaluation> evaluate_at_lambda(std::span<const std::string> query_ids, const Catalog& catalog,
                                                const RepresentationSet* reps, const TuningConfig& tuning,
                                                Kernel kernel, double lambda) {
    tuning.validate();
    const auto groups = resolve_groups(tuning, catalog);
    std::vector<QueryEvaluation> out(query_ids.size());
    parallel_for(
        query_ids.size(),
        [&](std::size_t i) {
            const auto& query = catalog.at(query_ids[i]);
            const auto pool = knn_for_item(catalog, query, tuning.pool_size, tuning.metric);
            const auto ids = rerank(pool, catalog, reps, tuning.rerank_config(lambda, kernel)).ids();
            out[i] = evaluate_query(query, ids, catalog, tuning.k, groups);
        },
        tuning.workers);
    return out;
}

MatchedLambda matched_fairness_lambda(std::span<const std::string> query_ids, const Catalog& catalog,
                                      const TuningConfig& tuning, double target_fr) {
    tuning.validate();
    if (!(target_fr >= 0.0 && target_fr <= 1.0)) throw ValidationError("target fairness ratio must lie in [0, 1]");
    const auto groups = resolve_groups(tuning, catalog);
    const auto grid = tuning.grid();

    // fr[i][g]: fairness ratio of query i at grid point g.
    std::vector<std::vector<std::optional<double>>> fr(query_ids.size());
    parallel_for(
        query_ids.size(),
        [&](std::size_t i) {
            const auto& query = catalog.at(query_ids[i]);
            const auto pool = knn_for_item(catalog, query, tuning.pool_size, tuning.metric);
            for (double lambda : grid) {
                const auto ids = rerank(pool, catalog, nullptr, tuning.rerank_config(lambda, Kernel::classic_mmr)).ids();
                fr[i].push_back(fairness_ratio_at_k(ids, catalog, tuning.k, groups).value);
            }
        },
        tuning.workers);

    MatchedLambda best;
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& row : fr) {
            if (row[g]) {
                sum += *row[g];
                ++n;
            }
        }
        if (n == 0) continue;
        const double mean = sum / static_cast<double>(n);
        const double gap = std::abs(mean - target_fr);
        if (gap <= best_gap) {
            best_gap = gap;
            best = {grid[g], mean};
        }
    }
    return best;
}

void write_curve(std::ostream& out, const QueryTuning& tuning) {
    out << "lambda\tp_at_k\tfr_at_k\n";
    auto row = [&](const CurvePoint& p) {
        out << format_double(p.lambda) << '\t' << format_optional(p.p_at_k) << '\t' << format_optional(p.fr_at_k)
            << '\n';
    };
    for (const auto& p : tuning.curve) row(p);
    row(tuning.baseline);
}

}  // namespace fairrank
