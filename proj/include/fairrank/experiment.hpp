#pragma once

// End-to-end evaluation: select human-subject queries, split them into a
// tuning sample and a held-out test set, tune lambda per method on the sample,
// then evaluate the averaged lambda on the test queries against the full
// catalog and summarize with t-based confidence intervals.

#include "fairrank/catalog.hpp"
#include "fairrank/metrics.hpp"
#include "fairrank/tuning.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fairrank {

using QueryPredicate = std::function<bool(const EmbeddingItem&)>;

/// Items carrying at least one group-mapped tag.
QueryPredicate has_any_group();
/// Items carrying `tag` (normalized).
QueryPredicate has_tag(std::string tag);

/// Sorted ids of items matching `predicate`. Throws ValidationError when
/// nothing matches.
std::vector<std::string> select_queries(const Catalog& catalog, const QueryPredicate& predicate);

struct QuerySplit {
    std::vector<std::string> train;
    std::vector<std::string> test;
};

/// Seeded uniform sample of `train_size` ids for tuning; the remainder is held
/// out, subsampled to `test_size` when that is non-zero. Both lists are
/// sorted.
QuerySplit split_queries(std::span<const std::string> query_ids, std::size_t train_size, std::size_t test_size,
                         std::uint64_t seed);

enum class Method { knn_only, classic_mmr, fmmr };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

struct ExperimentSpec {
    QueryPredicate query_filter = has_any_group();
    std::size_t train_size = 100;
    std::size_t test_size = 0;  // 0 = every non-training query
    TuningConfig tuning;
    std::vector<Method> methods{Method::knn_only, Method::classic_mmr, Method::fmmr};
    std::vector<double> sampling_fractions{1.0};
    std::uint64_t seed = 0;
    double confidence = 0.95;
};

/// One evaluated test query under one configuration.
struct QueryRecord {
    Method method = Method::knn_only;
    std::optional<double> fraction;  // fmmr only
    double lambda = 1.0;
    QueryEvaluation eval;
    std::optional<double> baseline_p_at_k;
    /// p@k stays within the degradation ratio of the baseline; empty when
    /// precision is undefined.
    std::optional<bool> within_degradation;
};

struct MethodSummary {
    Method method = Method::knn_only;
    std::optional<double> fraction;
    double lambda = 1.0;
    std::size_t queries = 0;
    std::optional<ConfidenceInterval> p_at_k;
    std::optional<ConfidenceInterval> fr_at_k;
    std::optional<double> mean_p_at_k;
    std::optional<double> mean_fr_at_k;
    std::optional<double> mean_entropy_at_k;
    std::size_t constraint_violations = 0;
};

struct MethodTuning {
    Method method = Method::knn_only;
    std::optional<double> fraction;
    TuningResult result;
};

struct EvalReport {
    std::size_t k = 10;
    double confidence = 0.95;
    QuerySplit split;
    std::vector<MethodTuning> tuning;
    std::vector<QueryRecord> records;
    std::vector<MethodSummary> summaries;
};

EvalReport run_experiment(const ExperimentSpec& spec, const Catalog& catalog);

/// Groups records by (method, fraction, lambda) in first-appearance order.
std::vector<MethodSummary> summarize(std::span<const QueryRecord> records, double confidence);

void write_query_records(std::ostream& out, std::span<const QueryRecord> records);
std::vector<QueryRecord> read_query_records(std::istream& in);

/// Aligned text table: method, fraction, lambda, n, p@k and fr@k with CI
/// half-widths, mean entropy, degradation violations.
void write_summary_table(std::ostream& out, std::span<const MethodSummary> summaries, std::size_t k);

/// Writes queries.tsv, report.txt and one curve file per tuned query under
/// curves/<method>[_<fraction>]/.
void write_report_files(const EvalReport& report, const std::filesystem::path& dir);

}  // namespace fairrank
