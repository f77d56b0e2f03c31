#pragma once

// Lambda selection by grid search: among grid values whose precision stays
// within a relative degradation d of the un-reranked (lambda = 1) precision,
// take the one whose fairness ratio is closest to parity.

#include "fairrank/catalog.hpp"
#include "fairrank/metrics.hpp"
#include "fairrank/representations.hpp"
#include "fairrank/reranker.hpp"
#include "fairrank/retrieval.hpp"

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fairrank {

struct TuningConfig {
    std::size_t grid_size = 50;
    double degradation = 0.25;
    std::size_t k = 10;
    std::size_t pool_size = kDefaultPoolSize;
    Metric metric = Metric::euclidean;
    bool normalize_scores = false;
    /// Fairness pair; the first two declared groups when unset.
    std::optional<GroupPair> groups;
    /// Worker threads for per-query fan-out (0 = hardware concurrency).
    std::size_t workers = 0;

    void validate() const;
    /// grid_size evenly spaced values i / grid_size, i = 0 .. grid_size-1.
    /// Contains 0 and excludes 1.
    std::vector<double> grid() const;
    RerankConfig rerank_config(double lambda, Kernel kernel) const;
};

struct CurvePoint {
    double lambda = 0.0;
    std::optional<double> p_at_k;
    std::optional<double> fr_at_k;
};

struct QueryTuning {
    std::string query_id;
    double best_lambda = 1.0;
    /// No grid value met the precision constraint; best_lambda fell back to 1.
    bool constraint_binding = false;
    CurvePoint baseline;  // lambda = 1
    CurvePoint chosen;
    std::vector<CurvePoint> curve;  // one point per grid value
};

struct TuningResult {
    std::map<std::string, double> per_query_best_lambda;
    double overall_lambda = 1.0;
    std::map<std::string, QueryTuning> per_query;
    /// Queries without tags; precision is undefined for them.
    std::vector<std::string> skipped;
};

/// True when `p` keeps at least (1 - d) of `baseline` (with a 1e-12 slack for
/// rounding in the product).
bool satisfies_degradation(double p, double baseline, double degradation);

QueryTuning best_lambda_for_query(const EmbeddingItem& query, const Catalog& catalog,
                                  const RepresentationSet* reps, const TuningConfig& tuning, Kernel kernel);

/// Per-query search over `query_ids`, then the arithmetic mean of the
/// per-query optima. Throws ValidationError when every query is skipped.
TuningResult tune(std::span<const std::string> query_ids, const Catalog& catalog, const RepresentationSet* reps,
                  const TuningConfig& tuning, Kernel kernel);

/// Evaluates every query at a fixed lambda. Output order matches `query_ids`.
std::vector<QueryEvaluation> evaluate_at_lambda(std::span<const std::string> query_ids, const Catalog& catalog,
                                                const RepresentationSet* reps, const TuningConfig& tuning,
                                                Kernel kernel, double lambda);

struct MatchedLambda {
    double lambda = 1.0;
    std::optional<double> mean_fr_at_k;
};

/// The classic-MMR grid value whose mean fr@k over `query_ids` is closest to
/// `target_fr` (ties toward the larger lambda).
MatchedLambda matched_fairness_lambda(std::span<const std::string> query_ids, const Catalog& catalog,
                                      const TuningConfig& tuning, double target_fr);

/// Tab-separated `lambda p_at_k fr_at_k` rows with a header; the lambda = 1
/// baseline is the last row. Undefined values print as NA.
void write_curve(std::ostream& out, const QueryTuning& tuning);

}  // namespace fairrank
