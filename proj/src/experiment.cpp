#include "fairrank/experiment.hpp"

#include "fairrank/error.hpp"
#include "fairrank/representations.hpp"
#include "fairrank/seed.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace fairrank {

namespace {

std::string na_or(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

std::optional<double> parse_optional(std::string_view field, std::size_t line_no) {
    if (field == "NA") return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw DataError("query records line " + std::to_string(line_no) + ": bad number '" + std::string(field) + "'");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::optional<double> mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return std::nullopt;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string ci_cell(const std::optional<ConfidenceInterval>& ci, const std::optional<double>& mean) {
    if (ci) return fixed4(ci->mean) + " +- " + fixed4(ci->half_width);
    if (mean) return fixed4(*mean);
    return "NA";
}

std::string safe_file_name(std::string_view id) {
    std::string out;
    for (char c : id) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
        out.push_back(ok ? c : '_');
    }
    return out;
}

std::string config_label(Method method, const std::optional<double>& fraction) {
    std::string label(to_string(method));
    if (fraction) label += "_" + format_double(*fraction);
    return label;
}

}  // namespace

QueryPredicate has_any_group() {
    return [](const EmbeddingItem& item) { return !item.groups.empty(); };
}

QueryPredicate has_tag(std::string tag) {
    return [t = normalize_tag(tag)](const EmbeddingItem& item) { return item.tags.contains(t); };
}

std::vector<std::string> select_queries(const Catalog& catalog, const QueryPredicate& predicate) {
    std::vector<std::string> out;
    for (const auto& item : catalog.items()) {
        if (predicate(item)) out.push_back(item.id);
    }
    if (out.empty()) throw ValidationError("query selection matched no items");
    return out;
}

QuerySplit split_queries(std::span<const std::string> query_ids, std::size_t train_size, std::size_t test_size,
                         std::uint64_t seed) {
    if (train_size == 0) throw ValidationError("training sample must be non-empty");
    if (train_size >= query_ids.size()) {
        throw ValidationError("training sample of " + std::to_string(train_size) + " leaves no test queries out of " +
                              std::to_string(query_ids.size()));
    }
    std::vector<std::string> sorted(query_ids.begin(), query_ids.end());
    std::sort(sorted.begin(), sorted.end());

    QuerySplit split;
    std::mt19937_64 rng(seed);
    std::sample(sorted.begin(), sorted.end(), std::back_inserter(split.train), train_size, rng);
    std::sort(split.train.begin(), split.train.end());
    std::set_difference(sorted.begin(), sorted.end(), split.train.begin(), split.train.end(),
                        std::back_inserter(split.test));
    if (test_size != 0 && split.test.size() > test_size) {
        std::vector<std::string> held_out;
        std::sample(split.test.begin(), split.test.end(), std::back_inserter(held_out), test_size, rng);
        std::sort(held_out.begin(), held_out.end());
        split.test = std::move(held_out);
    }
    return split;
}

std::string_view to_string(Method method) {
    switch (method) {
        case Method::knn_only: return "knn_only";
        case Method::classic_mmr: return "mmr";
        case Method::fmmr: return "fmmr";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    if (name == "knn_only" || name == "knn") return Method::knn_only;
    if (name == "mmr" || name == "classic_mmr") return Method::classic_mmr;
    if (name == "fmmr") return Method::fmmr;
    throw ValidationError("unknown method '" + std::string(name) + "'");
}

EvalReport run_experiment(const ExperimentSpec& spec, const Catalog& catalog) {
    spec.tuning.validate();
    if (spec.methods.empty()) throw ValidationError("experiment: no methods requested");

    EvalReport report;
    report.k = spec.tuning.k;
    report.confidence = spec.confidence;
    const auto queries = select_queries(catalog, spec.query_filter);
    report.split = split_queries(queries, spec.train_size, spec.test_size, derive_seed(spec.seed, "split"));
    const auto& test = report.split.test;

    // At lambda = 1 both kernels reduce to the relevance order.
    const auto baseline = evaluate_at_lambda(test, catalog, nullptr, spec.tuning, Kernel::classic_mmr, 1.0);

    auto evaluate = [&](Method method, std::optional<double> fraction, const RepresentationSet* reps, Kernel kernel,
                        double lambda) {
        const auto evals = evaluate_at_lambda(test, catalog, reps, spec.tuning, kernel, lambda);
        for (std::size_t i = 0; i < evals.size(); ++i) {
            QueryRecord rec;
            rec.method = method;
            rec.fraction = fraction;
            rec.lambda = lambda;
            rec.eval = evals[i];
            rec.baseline_p_at_k = baseline[i].p_at_k;
            if (rec.eval.p_at_k && rec.baseline_p_at_k) {
                rec.within_degradation =
                    satisfies_degradation(*rec.eval.p_at_k, *rec.baseline_p_at_k, spec.tuning.degradation);
            }
            report.records.push_back(std::move(rec));
        }
    };

    for (const auto method : spec.methods) {
        switch (method) {
            case Method::knn_only:
                evaluate(method, std::nullopt, nullptr, Kernel::classic_mmr, 1.0);
                break;
            case Method::classic_mmr: {
                auto tuned = tune(report.split.train, catalog, nullptr, spec.tuning, Kernel::classic_mmr);
                const double lambda = tuned.overall_lambda;
                report.tuning.push_back({method, std::nullopt, std::move(tuned)});
                evaluate(method, std::nullopt, nullptr, Kernel::classic_mmr, lambda);
                break;
            }
            case Method::fmmr:
                if (spec.sampling_fractions.empty()) throw ValidationError("experiment: fmmr needs a sampling fraction");
                for (const double fraction : spec.sampling_fractions) {
                    const auto reps = build_representations(
                        catalog, fraction, derive_seed(spec.seed, "representations/" + format_double(fraction)));
                    auto tuned = tune(report.split.train, catalog, &reps, spec.tuning, Kernel::fmmr);
                    const double lambda = tuned.overall_lambda;
                    report.tuning.push_back({method, fraction, std::move(tuned)});
                    evaluate(method, fraction, &reps, Kernel::fmmr, lambda);
                }
                break;
        }
    }
    report.summaries = summarize(report.records, spec.confidence);
    return report;
}

std::vector<MethodSummary> summarize(std::span<const QueryRecord> records, double confidence) {
    struct Acc {
        MethodSummary summary;
        std::vector<double> p, fr, entropy;
    };
    std::vector<Acc> groups;
    for (const auto& rec : records) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Acc& a) {
            return a.summary.method == rec.method && a.summary.fraction == rec.fraction &&
                   a.summary.lambda == rec.lambda;
        });
        if (it == groups.end()) {
            Acc acc;
            acc.summary.method = rec.method;
            acc.summary.fraction = rec.fraction;
            acc.summary.lambda = rec.lambda;
            groups.push_back(std::move(acc));
            it = std::prev(groups.end());
        }
        ++it->summary.queries;
        if (rec.eval.p_at_k) it->p.push_back(*rec.eval.p_at_k);
        if (rec.eval.fr_at_k) it->fr.push_back(*rec.eval.fr_at_k);
        if (rec.eval.entropy_at_k) it->entropy.push_back(*rec.eval.entropy_at_k);
        if (rec.within_degradation && !*rec.within_degradation) ++it->summary.constraint_violations;
    }

    std::vector<MethodSummary> out;
    for (auto& acc : groups) {
        auto& s = acc.summary;
        s.mean_p_at_k = mean_of(acc.p);
        s.mean_fr_at_k = mean_of(acc.fr);
        s.mean_entropy_at_k = mean_of(acc.entropy);
        if (acc.p.size() >= 2) s.p_at_k = t_confidence_interval(acc.p, confidence);
        if (acc.fr.size() >= 2) s.fr_at_k = t_confidence_interval(acc.fr, confidence);
        out.push_back(std::move(s));
    }
    return out;
}

void write_query_records(std::ostream& out, std::span<const QueryRecord> records) {
    out << "method\tfraction\tlambda\tquery_id\tk\tp_at_k\tfr_at_k\tentropy_at_k\tbaseline_p_at_k\t"
           "within_degradation\tgroup_counts\n";
    for (const auto& r : records) {
        out << to_string(r.method) << '\t' << na_or(r.fraction) << '\t' << format_double(r.lambda) << '\t'
            << r.eval.query_id << '\t' << r.eval.k << '\t' << na_or(r.eval.p_at_k) << '\t' << na_or(r.eval.fr_at_k)
            << '\t' << na_or(r.eval.entropy_at_k) << '\t' << na_or(r.baseline_p_at_k) << '\t'
            << (r.within_degradation ? (*r.within_degradation ? "1" : "0") : "NA") << '\t';
        bool first = true;
        for (const auto& [g, c] : r.eval.group_counts) {
            if (!first) out << ';';
            out << g << '=' << c;
            first = false;
        }
        out << '\n';
    }
}

std::vector<QueryRecord> read_query_records(std::istream& in) {
    std::vector<QueryRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line_no == 1) continue;  // header
        const auto f = split(line, '\t');
        if (f.size() != 11) {
            throw DataError("query records line " + std::to_string(line_no) + ": expected 11 fields, got " +
                            std::to_string(f.size()));
        }
        QueryRecord r;
        try {
            r.method = parse_method(f[0]);
        } catch (const ValidationError& e) {
            throw DataError("query records line " + std::to_string(line_no) + ": " + e.what());
        }
        r.fraction = parse_optional(f[1], line_no);
        auto lambda = parse_optional(f[2], line_no);
        if (!lambda) throw DataError("query records line " + std::to_string(line_no) + ": missing lambda");
        r.lambda = *lambda;
        r.eval.query_id = std::string(f[3]);
        auto k = parse_optional(f[4], line_no);
        r.eval.k = k ? static_cast<std::size_t>(*k) : 0;
        r.eval.p_at_k = parse_optional(f[5], line_no);
        r.eval.fr_at_k = parse_optional(f[6], line_no);
        r.eval.entropy_at_k = parse_optional(f[7], line_no);
        r.baseline_p_at_k = parse_optional(f[8], line_no);
        if (f[9] == "1") r.within_degradation = true;
        else if (f[9] == "0") r.within_degradation = false;
        if (!f[10].empty()) {
            for (auto kv : split(f[10], ';')) {
                auto eq = kv.rfind('=');
                if (eq == std::string_view::npos) {
                    throw DataError("query records line " + std::to_string(line_no) + ": bad group count");
                }
                auto count = parse_optional(kv.substr(eq + 1), line_no);
                r.eval.group_counts[std::string(kv.substr(0, eq))] = count ? static_cast<std::size_t>(*count) : 0;
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

void write_summary_table(std::ostream& out, std::span<const MethodSummary> summaries, std::size_t k) {
    const std::string ks = std::to_string(k);
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"method", "fraction", "lambda", "n", "p@" + ks, "fr@" + ks, "entropy@" + ks, "violations"});
    for (const auto& s : summaries) {
        rows.push_back({std::string(to_string(s.method)), s.fraction ? format_double(*s.fraction) : "N/A",
                        fixed4(s.lambda), std::to_string(s.queries), ci_cell(s.p_at_k, s.mean_p_at_k),
                        ci_cell(s.fr_at_k, s.mean_fr_at_k), s.mean_entropy_at_k ? fixed4(*s.mean_entropy_at_k) : "NA",
                        std::to_string(s.constraint_violations)});
    }
    std::vector<std::size_t> width(rows.front().size(), 0);
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    for (const auto& row : rows) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            line += row[c];
            if (c + 1 < row.size()) line += std::string(width[c] - row[c].size() + 2, ' ');
        }
        out << line << '\n';
    }
}

void write_report_files(const EvalReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [](const std::filesystem::path& p) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + p.string());
        return out;
    };

    {
        auto out = open(dir / "queries.tsv");
        write_query_records(out, report.records);
    }
    {
        auto out = open(dir / "report.txt");
        out << "# train=" << report.split.train.size() << " test=" << report.split.test.size()
            << " confidence=" << format_double(report.confidence) << '\n';
        for (const auto& t : report.tuning) {
            out << "# tuned " << config_label(t.method, t.fraction) << " lambda=" << format_double(t.result.overall_lambda)
                << " skipped=" << t.result.skipped.size() << '\n';
        }
        write_summary_table(out, report.summaries, report.k);
    }
    for (const auto& t : report.tuning) {
        const auto curve_dir = dir / "curves" / config_label(t.method, t.fraction);
        std::filesystem::create_directories(curve_dir);
        for (const auto& [id, q] : t.result.per_query) {
            auto out = open(curve_dir / (safe_file_name(id) + ".tsv"));
            write_curve(out, q);
        }
    }
}

}  // namespace fairrank
