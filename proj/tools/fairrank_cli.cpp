// fairrank: command-line front end for retrieval, fairness-aware re-ranking,
// lambda tuning and evaluation.
//
// Exit codes: 0 success, 2 validation error, 3 runtime/data error.

#include "fairrank/catalog.hpp"
#include "fairrank/error.hpp"
#include "fairrank/experiment.hpp"
#include "fairrank/metrics.hpp"
#include "fairrank/representations.hpp"
#include "fairrank/reranker.hpp"
#include "fairrank/retrieval.hpp"
#include "fairrank/seed.hpp"
#include "fairrank/synthetic.hpp"
#include "fairrank/tuning.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fr = fairrank;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitData = 3;

struct CatalogArgs {
    std::string embeddings;
    std::string tags;
    std::string mapping;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--embeddings", embeddings, "Embeddings file (id<TAB>v1,...,vD)")->required();
        cmd->add_option("--tags", tags, "Tags file (id<TAB>tag1,tag2,...)")->required();
        cmd->add_option("--mapping", mapping, "Group mapping YAML")->required();
    }
    fr::Catalog load() const { return fr::load_catalog(embeddings, tags, mapping); }
};

struct RepsArgs {
    std::string path;
    double fraction = 1.0;
    std::uint64_t seed = 0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--reps", path, "Fairness representations file (group:-prefixed embeddings)");
        cmd->add_option("--fraction", fraction, "Sampling fraction when building representations")
            ->check(CLI::Range(0.0, 1.0));
        cmd->add_option("--seed", seed, "Root seed");
    }
    fr::RepresentationSet resolve(const fr::Catalog& catalog) const {
        if (path.empty()) return fr::build_representations(catalog, fraction, seed);
        std::ifstream in(path);
        if (!in) throw fr::DataError("cannot open " + path);
        return fr::read_representations(in);
    }
};

std::optional<fr::GroupPair> parse_group_pair(const std::vector<std::string>& names) {
    if (names.empty()) return std::nullopt;
    if (names.size() != 2) throw fr::ValidationError("--groups takes exactly two group names");
    return fr::GroupPair{names[0], names[1]};
}

std::vector<double> parse_vector(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(',', start);
        if (end == std::string::npos) end = text.size();
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(text.data() + start, text.data() + end, v);
        if (ec != std::errc() || ptr != text.data() + end) {
            throw fr::ValidationError("cannot parse query vector component '" + text.substr(start, end - start) + "'");
        }
        out.push_back(v);
        start = end + 1;
    }
    return out;
}

std::string na_or(const std::optional<double>& v) { return v ? fr::format_double(*v) : "NA"; }

void print_summary(const fr::Catalog& catalog) {
    std::cout << "items\t" << catalog.size() << "\n";
    std::cout << "dimension\t" << catalog.dimension() << "\n";
    std::size_t groupless = 0;
    for (const auto& item : catalog.items()) groupless += item.groups.empty() ? 1 : 0;
    for (const auto& g : catalog.mapping().groups) {
        std::cout << "group\t" << g << "\t" << catalog.items_in_group(g).size() << "\n";
    }
    std::cout << "groupless\t" << groupless << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fairness-aware re-ranking toolkit"};
    app.require_subcommand(1);

    // ingest -----------------------------------------------------------------
    auto* ingest = app.add_subcommand("ingest", "Validate a catalog, print a summary, optionally re-serialize it");
    CatalogArgs ingest_catalog;
    ingest_catalog.add_to(ingest);
    std::string ingest_out;
    std::string ingest_reps_out;
    double ingest_fraction = 1.0;
    std::uint64_t ingest_seed = 0;
    ingest->add_option("--out-dir", ingest_out, "Write canonical embeddings.tsv/tags.tsv/mapping.yaml here");
    ingest->add_option("--reps-out", ingest_reps_out, "Write fairness representations to this file");
    ingest->add_option("--fraction", ingest_fraction, "Sampling fraction for --reps-out")->check(CLI::Range(0.0, 1.0));
    ingest->add_option("--seed", ingest_seed, "Sampling seed for --reps-out");

    // synth ------------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "Generate a synthetic Gaussian-cluster catalog");
    fr::SyntheticSpec synth_spec;
    std::string synth_out;
    std::uint64_t synth_seed = 0;
    bool synth_random_topics = false;
    synth->add_option("--out-dir", synth_out, "Output directory")->required();
    synth->add_option("--seed", synth_seed, "Generator seed");
    synth->add_option("--groups", synth_spec.num_groups, "Number of groups");
    synth->add_option("--items-per-group", synth_spec.items_per_group, "Items per group");
    synth->add_option("--dim", synth_spec.dimension, "Descriptor dimension");
    synth->add_option("--separation", synth_spec.group_separation, "Distance between group means (noise units)");
    synth->add_option("--noise", synth_spec.noise_scale, "Within-group noise scale");
    synth->add_option("--topics", synth_spec.num_topics, "Number of topics");
    synth->add_option("--topic-separation", synth_spec.topic_separation, "Distance between topics (noise units)");
    synth->add_option("--groupless", synth_spec.groupless_items, "Items without a group");
    synth->add_option("--group-names", synth_spec.group_names, "Group identifiers")->delimiter(',');
    synth->add_flag("--random-topics", synth_random_topics, "Gaussian topic offsets instead of orthogonal ones");

    // knn --------------------------------------------------------------------
    auto* knn = app.add_subcommand("knn", "Nearest neighbours of a query item or vector");
    CatalogArgs knn_catalog;
    knn_catalog.add_to(knn);
    std::string knn_query, knn_vector, knn_metric = "euclidean";
    std::size_t knn_pool = fr::kDefaultPoolSize;
    auto* knn_query_opt = knn->add_option("--query", knn_query, "Query item id (excluded from results)");
    knn->add_option("--query-vector", knn_vector, "Comma-separated query vector")->excludes(knn_query_opt);
    knn->add_option("--pool-size", knn_pool, "Number of neighbours")->check(CLI::PositiveNumber);
    knn->add_option("--metric", knn_metric, "euclidean or manhattan");

    // rerank -----------------------------------------------------------------
    auto* rerank_cmd = app.add_subcommand("rerank", "Retrieve and re-rank results for one query item");
    CatalogArgs rerank_catalog;
    rerank_catalog.add_to(rerank_cmd);
    RepsArgs rerank_reps;
    rerank_reps.add_to(rerank_cmd);
    std::string rerank_query, rerank_kernel = "fmmr", rerank_metric = "euclidean";
    std::vector<std::string> rerank_groups;
    fr::RerankConfig rerank_cfg;
    std::size_t rerank_pool = fr::kDefaultPoolSize;
    rerank_cmd->add_option("--query", rerank_query, "Query item id")->required();
    rerank_cmd->add_option("--lambda", rerank_cfg.lambda, "Relevance weight in [0, 1]")->check(CLI::Range(0.0, 1.0));
    rerank_cmd->add_option("--k", rerank_cfg.k, "Result size")->check(CLI::PositiveNumber);
    rerank_cmd->add_option("--kernel", rerank_kernel, "mmr or fmmr");
    rerank_cmd->add_option("--metric", rerank_metric, "euclidean or manhattan");
    rerank_cmd->add_option("--pool-size", rerank_pool, "Candidate pool size")->check(CLI::PositiveNumber);
    rerank_cmd->add_option("--groups", rerank_groups, "Fairness group pair a,b (fr counts b)")->delimiter(',');
    rerank_cmd->add_flag("--normalize", rerank_cfg.normalize_scores, "Min-max normalize relevance and gain");

    // tune -------------------------------------------------------------------
    auto* tune_cmd = app.add_subcommand("tune", "Grid-search lambda on a sample of queries");
    CatalogArgs tune_catalog;
    tune_catalog.add_to(tune_cmd);
    RepsArgs tune_reps;
    tune_reps.add_to(tune_cmd);
    fr::TuningConfig tune_cfg;
    std::string tune_kernel = "fmmr", tune_metric = "euclidean", tune_query_tag, tune_curves;
    std::vector<std::string> tune_groups;
    std::size_t tune_train = 100;
    std::optional<double> tune_match;
    tune_cmd->add_option("--kernel", tune_kernel, "mmr or fmmr");
    tune_cmd->add_option("--metric", tune_metric, "euclidean or manhattan");
    tune_cmd->add_option("--d", tune_cfg.degradation, "Allowable degradation ratio")->check(CLI::Range(0.0, 1.0));
    tune_cmd->add_option("--k", tune_cfg.k, "Result size")->check(CLI::PositiveNumber);
    tune_cmd->add_option("--pool-size", tune_cfg.pool_size, "Candidate pool size")->check(CLI::PositiveNumber);
    tune_cmd->add_option("--grid-size", tune_cfg.grid_size, "Number of lambda grid points in [0, 1)")
        ->check(CLI::PositiveNumber);
    tune_cmd->add_option("--train-size", tune_train, "Number of sampled queries")->check(CLI::PositiveNumber);
    tune_cmd->add_option("--query-tag", tune_query_tag, "Only items with this tag are queries (default: any group)");
    tune_cmd->add_option("--groups", tune_groups, "Fairness group pair a,b (fr counts b)")->delimiter(',');
    tune_cmd->add_option("--curves-dir", tune_curves, "Write one curve file per query here");
    tune_cmd->add_option("--match-fr", tune_match, "Instead of tuning, find the MMR lambda matching this mean fr@k");
    tune_cmd->add_flag("--normalize", tune_cfg.normalize_scores, "Min-max normalize relevance and gain");

    // eval -------------------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval", "Train/test experiment with per-method reports");
    CatalogArgs eval_catalog;
    eval_catalog.add_to(eval_cmd);
    fr::ExperimentSpec eval_spec;
    std::vector<std::string> eval_methods{"knn_only", "mmr", "fmmr"};
    std::vector<std::string> eval_groups;
    std::string eval_metric = "euclidean", eval_query_tag, eval_out;
    eval_cmd->add_option("--out-dir", eval_out, "Report directory")->required();
    eval_cmd->add_option("--methods", eval_methods, "knn_only,mmr,fmmr")->delimiter(',');
    eval_cmd->add_option("--fraction", eval_spec.sampling_fractions, "FMMR sampling fractions")->delimiter(',');
    eval_cmd->add_option("--train-size", eval_spec.train_size, "Tuning sample size")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--test-size", eval_spec.test_size, "Cap on held-out queries (0 = all)");
    eval_cmd->add_option("--d", eval_spec.tuning.degradation, "Allowable degradation ratio")->check(CLI::Range(0.0, 1.0));
    eval_cmd->add_option("--k", eval_spec.tuning.k, "Result size")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--pool-size", eval_spec.tuning.pool_size, "Candidate pool size")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--grid-size", eval_spec.tuning.grid_size, "Lambda grid points")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--metric", eval_metric, "euclidean or manhattan");
    eval_cmd->add_option("--seed", eval_spec.seed, "Root seed");
    eval_cmd->add_option("--query-tag", eval_query_tag, "Only items with this tag are queries (default: any group)");
    eval_cmd->add_option("--groups", eval_groups, "Fairness group pair a,b (fr counts b)")->delimiter(',');
    eval_cmd->add_option("--confidence", eval_spec.confidence, "Confidence level")->check(CLI::Range(0.0, 1.0));

    // report -----------------------------------------------------------------
    auto* report_cmd = app.add_subcommand("report", "Aggregate a queries.tsv file into a summary table");
    std::string report_input;
    double report_confidence = 0.95;
    report_cmd->add_option("--input", report_input, "Per-query records (queries.tsv)")->required();
    report_cmd->add_option("--confidence", report_confidence, "Confidence level")->check(CLI::Range(0.0, 1.0));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*ingest) {
            const auto catalog = ingest_catalog.load();
            print_summary(catalog);
            if (!ingest_out.empty()) {
                std::filesystem::create_directories(ingest_out);
                const std::filesystem::path dir(ingest_out);
                fr::save_catalog(catalog, dir / "embeddings.tsv", dir / "tags.tsv", dir / "mapping.yaml");
            }
            if (!ingest_reps_out.empty()) {
                const auto reps = fr::build_representations(catalog, ingest_fraction, ingest_seed);
                std::ofstream out(ingest_reps_out, std::ios::binary | std::ios::trunc);
                if (!out) throw fr::DataError("cannot write " + ingest_reps_out);
                fr::write_representations(out, reps);
            }
        } else if (*synth) {
            synth_spec.orthogonal_topics = !synth_random_topics;
            const auto corpus = fr::generate_synthetic(synth_spec, synth_seed);
            std::filesystem::create_directories(synth_out);
            const std::filesystem::path dir(synth_out);
            fr::save_catalog(corpus.catalog, dir / "embeddings.tsv", dir / "tags.tsv", dir / "mapping.yaml");
            print_summary(corpus.catalog);
        } else if (*knn) {
            const auto catalog = knn_catalog.load();
            const auto metric = fr::parse_metric(knn_metric);
            fr::CandidatePool pool;
            if (!knn_query.empty()) {
                pool = fr::knn_for_item(catalog, catalog.at(knn_query), knn_pool, metric);
            } else if (!knn_vector.empty()) {
                pool = fr::knn(catalog, parse_vector(knn_vector), knn_pool, metric);
            } else {
                throw fr::ValidationError("knn needs --query or --query-vector");
            }
            std::cout << "rank\tid\tdistance\trelevance\n";
            for (std::size_t i = 0; i < pool.candidates.size(); ++i) {
                const auto& c = pool.candidates[i];
                std::cout << i + 1 << '\t' << c.id << '\t' << fr::format_double(c.distance) << '\t'
                          << fr::format_double(c.relevance) << '\n';
            }
        } else if (*rerank_cmd) {
            const auto catalog = rerank_catalog.load();
            rerank_cfg.kernel = fr::parse_kernel(rerank_kernel);
            rerank_cfg.metric = fr::parse_metric(rerank_metric);
            const auto& query = catalog.at(rerank_query);
            std::optional<fr::RepresentationSet> reps;
            if (rerank_cfg.kernel == fr::Kernel::fmmr) reps = rerank_reps.resolve(catalog);
            const auto pool = fr::knn_for_item(catalog, query, rerank_pool, rerank_cfg.metric);
            const auto result = fr::rerank(pool, catalog, reps ? &*reps : nullptr, rerank_cfg);
            const auto ids = result.ids();

            std::cout << "rank\tid\tobjective\trelevance\tdiversity_gain\n";
            for (std::size_t i = 0; i < result.entries.size(); ++i) {
                const auto& e = result.entries[i];
                std::cout << i + 1 << '\t' << e.id << '\t' << fr::format_double(e.objective) << '\t'
                          << fr::format_double(e.relevance) << '\t' << fr::format_double(e.diversity_gain) << '\n';
            }
            auto groups = parse_group_pair(rerank_groups);
            const auto eval = fr::evaluate_query(query, ids, catalog, rerank_cfg.k,
                                                 groups ? *groups : fr::default_group_pair(catalog));
            std::cout << "# p@" << eval.k << "=" << na_or(eval.p_at_k) << " fr@" << eval.k << "=" << na_or(eval.fr_at_k)
                      << " entropy@" << eval.k << "=" << na_or(eval.entropy_at_k)
                      << (result.truncated_to_pool ? " (k exceeds pool; whole pool returned)" : "") << '\n';
        } else if (*tune_cmd) {
            const auto catalog = tune_catalog.load();
            tune_cfg.metric = fr::parse_metric(tune_metric);
            tune_cfg.groups = parse_group_pair(tune_groups);
            const auto kernel = fr::parse_kernel(tune_kernel);
            const auto queries = fr::select_queries(
                catalog, tune_query_tag.empty() ? fr::has_any_group() : fr::has_tag(tune_query_tag));

            std::vector<std::string> sample = queries;
            if (tune_train < queries.size()) {
                sample = fr::split_queries(queries, tune_train, 0, fr::derive_seed(tune_reps.seed, "split")).train;
            }

            if (tune_match) {
                const auto matched = fr::matched_fairness_lambda(sample, catalog, tune_cfg, *tune_match);
                std::cout << "matched_lambda\t" << fr::format_double(matched.lambda) << "\nmean_fr_at_k\t"
                          << na_or(matched.mean_fr_at_k) << '\n';
                return 0;
            }

            std::optional<fr::RepresentationSet> reps;
            if (kernel == fr::Kernel::fmmr) reps = tune_reps.resolve(catalog);
            const auto result = fr::tune(sample, catalog, reps ? &*reps : nullptr, tune_cfg, kernel);
            std::cout << "query_id\tbest_lambda\tp_at_k\tfr_at_k\tconstraint_binding\n";
            for (const auto& [id, q] : result.per_query) {
                std::cout << id << '\t' << fr::format_double(q.best_lambda) << '\t' << na_or(q.chosen.p_at_k) << '\t'
                          << na_or(q.chosen.fr_at_k) << '\t' << (q.constraint_binding ? 1 : 0) << '\n';
            }
            std::cout << "# overall_lambda=" << fr::format_double(result.overall_lambda)
                      << " queries=" << result.per_query.size() << " skipped=" << result.skipped.size() << '\n';
            if (!tune_curves.empty()) {
                std::filesystem::create_directories(tune_curves);
                for (const auto& [id, q] : result.per_query) {
                    std::ofstream out(std::filesystem::path(tune_curves) / (id + ".tsv"), std::ios::binary);
                    if (!out) throw fr::DataError("cannot write curve for " + id);
                    fr::write_curve(out, q);
                }
            }
        } else if (*eval_cmd) {
            const auto catalog = eval_catalog.load();
            eval_spec.methods.clear();
            for (const auto& m : eval_methods) eval_spec.methods.push_back(fr::parse_method(m));
            eval_spec.tuning.metric = fr::parse_metric(eval_metric);
            eval_spec.tuning.groups = parse_group_pair(eval_groups);
            if (!eval_query_tag.empty()) eval_spec.query_filter = fr::has_tag(eval_query_tag);
            const auto report = fr::run_experiment(eval_spec, catalog);
            fr::write_report_files(report, eval_out);
            fr::write_summary_table(std::cout, report.summaries, report.k);
        } else if (*report_cmd) {
            std::ifstream in(report_input);
            if (!in) throw fr::DataError("cannot open " + report_input);
            const auto records = fr::read_query_records(in);
            const std::size_t k = records.empty() ? 0 : records.front().eval.k;
            fr::write_summary_table(std::cout, fr::summarize(records, report_confidence), k);
        }
    } catch (const fr::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return 0;
}
