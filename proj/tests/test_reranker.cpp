#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fairrank/catalog.hpp"
#include "fairrank/error.hpp"
#include "fairrank/representations.hpp"
#include "fairrank/reranker.hpp"
#include "fairrank/retrieval.hpp"
#include "fairrank/synthetic.hpp"

#include "support.hpp"

#include <algorithm>
#include <random>

namespace fr = fairrank;
using testsupport::naive_rerank;
using testsupport::random_instance;

namespace {

fr::RepresentationSet reps_of(std::vector<fr::Vector> vs) {
    std::vector<fr::FairnessRepresentation> out;
    for (std::size_t i = 0; i < vs.size(); ++i) out.push_back({"g" + std::to_string(i), vs[i], {}});
    return fr::RepresentationSet(std::move(out));
}

std::vector<std::string> pool_ids(const fr::CandidatePool& pool, std::size_t k) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(k, pool.candidates.size()); ++i) out.push_back(pool.candidates[i].id);
    return out;
}

}  // namespace

TEST_CASE("fsim by hand") {
    const fr::Vector x{0, 0}, y{1, 0};
    CHECK(fr::fsim(x, y, reps_of({{0, 0}, {2, 0}}), fr::Metric::euclidean) == -2.0);
    CHECK(fr::fsim(fr::Vector{1, 0}, fr::Vector{-1, 0}, reps_of({{0, 0}}), fr::Metric::euclidean) == 0.0);
    CHECK(fr::fsim(x, x, reps_of({{3, -1}, {7, 2}}), fr::Metric::manhattan) == 0.0);
    CHECK_THROWS_AS(fr::fsim(fr::Vector{1, 2, 3}, fr::Vector{1, 2, 3}, reps_of({{0, 0}}), fr::Metric::euclidean),
                    fr::ValidationError);
}

TEST_CASE("classic similarity") {
    const fr::Vector o{0, 0}, p{3, 4};
    CHECK(fr::classic_sim(o, p, fr::Metric::euclidean) == -5.0);
    CHECK(fr::classic_sim(p, p, fr::Metric::euclidean) == 0.0);
    const fr::Vector near{1, 0}, far{9, 0};
    CHECK(fr::classic_sim(near, o, fr::Metric::euclidean) > fr::classic_sim(far, o, fr::Metric::euclidean));
}

TEST_CASE("distance profile") {
    CHECK(fr::distance_profile(fr::Vector{0, 0}, reps_of({{3, 4}, {0, 1}}), fr::Metric::euclidean) ==
          std::vector<double>{5, 1});
}

TEST_CASE("lambda 1 keeps the pool order") {
    const auto corpus = fr::generate_synthetic(fr::SyntheticSpec{}, 3);
    const auto reps = fr::build_representations(corpus.catalog, 1.0, 0);
    for (std::size_t i = 0; i < corpus.catalog.size(); i += 25) {
        const auto pool = fr::knn_for_item(corpus.catalog, corpus.catalog.items()[i], 50, fr::Metric::euclidean);
        for (auto kernel : {fr::Kernel::classic_mmr, fr::Kernel::fmmr}) {
            for (bool normalize : {false, true}) {
                fr::RerankConfig cfg{1.0, 10, kernel, fr::Metric::euclidean, normalize};
                CHECK(fr::rerank(pool, corpus.catalog, &reps, cfg).ids() == pool_ids(pool, 10));
            }
        }
    }
}

TEST_CASE("optimized greedy equals the naive evaluator") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 60; ++t) {
        auto inst = random_instance(rng, 14, 1 + t % 8, 2 + t % 2);
        for (auto metric : {fr::Metric::euclidean, fr::Metric::manhattan}) {
            const auto pool = fr::knn(inst.catalog, inst.query, 3 + t % 10, metric);
            for (auto kernel : {fr::Kernel::classic_mmr, fr::Kernel::fmmr}) {
                for (double lambda : {0.0, 0.14, 0.5, 0.9}) {
                    const std::size_t k = 1 + t % 5;
                    fr::RerankConfig cfg{lambda, k, kernel, metric};
                    CHECK(fr::rerank(pool, inst.catalog, &inst.reps, cfg).ids() ==
                          naive_rerank(pool, inst.catalog, &inst.reps, lambda, k, kernel, metric));
                }
            }
        }
    }
}

TEST_CASE("objective entries are consistent") {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 20; ++t) {
        auto inst = random_instance(rng, 30, 4, 2);
        const auto pool = fr::knn(inst.catalog, inst.query, 20, fr::Metric::euclidean);
        for (bool normalize : {false, true}) {
            fr::RerankConfig cfg{0.3, 8, fr::Kernel::fmmr, fr::Metric::euclidean, normalize};
            const auto res = fr::rerank(pool, inst.catalog, &inst.reps, cfg);
            REQUIRE(res.entries.size() == 8);
            CHECK(res.entries[0].diversity_gain == 0.0);
            for (const auto& e : res.entries) {
                CHECK(e.objective == doctest::Approx(0.3 * e.relevance + 0.7 * e.diversity_gain).epsilon(1e-12));
                CHECK(e.diversity_gain >= 0.0);
                if (normalize) {
                    CHECK(e.relevance >= 0.0);
                    CHECK(e.relevance <= 1.0);
                    CHECK(e.diversity_gain <= 1.0 + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("invariant to pool order and to a constant relevance shift") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 30; ++t) {
        auto inst = random_instance(rng, 25, 5, 3);
        const auto pool = fr::knn(inst.catalog, inst.query, 20, fr::Metric::euclidean);
        fr::RerankConfig cfg{0.5, 6, t % 2 ? fr::Kernel::fmmr : fr::Kernel::classic_mmr};
        const auto base = fr::rerank(pool, inst.catalog, &inst.reps, cfg).ids();

        auto shuffled = pool;
        std::shuffle(shuffled.candidates.begin(), shuffled.candidates.end(), rng);
        CHECK(fr::rerank(shuffled, inst.catalog, &inst.reps, cfg).ids() == base);

        auto shifted = pool;
        for (auto& c : shifted.candidates) c.relevance += 8.0;
        CHECK(fr::rerank(shifted, inst.catalog, &inst.reps, cfg).ids() == base);
    }
}

TEST_CASE("four mirrored candidates, lambda 0: second pick maximizes profile difference") {
    // Group A members left of the axis, group B mirrored to the right.
    fr::Catalog cat({{"a1", {-1, 1}, {"a"}}, {"a2", {-1.5, -1}, {"a"}}, {"b1", {1, 1}, {"b"}}, {"b2", {1.5, -1}, {"b"}}},
                    fr::GroupMapping{{"A", "B"}, {{"a", "A"}, {"b", "B"}}});
    const auto reps = fr::build_representations(cat, 1.0, 0);
    const auto pool = fr::knn(cat, fr::Vector{0, 3}, 4, fr::Metric::euclidean);
    const auto res = fr::rerank(pool, cat, &reps, fr::RerankConfig{0.0, 2, fr::Kernel::fmmr});
    REQUIRE(res.entries.size() == 2);

    // Brute force over all 12 ordered pairs. At lambda 0 the first objective is
    // 0 for everyone, so the first pick is the smallest id; the pair's value is
    // then the second step's objective.
    const std::vector<std::string> ids{"a1", "a2", "b1", "b2"};
    std::string best_first, best_second;
    double best = -1e300;
    for (const auto& f : ids) {
        for (const auto& s : ids) {
            if (f == s) continue;
            if (f != *std::min_element(ids.begin(), ids.end())) continue;
            const double v = -testsupport::ref_sim(cat.at(s).vector, cat.at(f).vector, &reps, fr::Kernel::fmmr,
                                                   fr::Metric::euclidean);
            if (v > best || (v == best && s < best_second)) {
                best = v;
                best_first = f;
                best_second = s;
            }
        }
    }
    CHECK(res.entries[0].id == best_first);
    CHECK(res.entries[1].id == best_second);
    CHECK(cat.at(res.entries[1].id).groups.contains("B"));
    CHECK(res.entries[1].diversity_gain == doctest::Approx(best));
}

TEST_CASE("k beyond the pool returns the whole pool, flagged") {
    std::mt19937_64 rng(2);
    auto inst = random_instance(rng, 6, 3, 2);
    const auto pool = fr::knn(inst.catalog, inst.query, 4, fr::Metric::euclidean);
    const auto res = fr::rerank(pool, inst.catalog, &inst.reps, fr::RerankConfig{0.5, 10, fr::Kernel::fmmr});
    CHECK(res.entries.size() == 4);
    CHECK(res.truncated_to_pool);
    CHECK_FALSE(fr::rerank(pool, inst.catalog, &inst.reps, fr::RerankConfig{0.5, 4}).truncated_to_pool);
}

TEST_CASE("configuration errors") {
    std::mt19937_64 rng(3);
    auto inst = random_instance(rng, 6, 3, 2);
    const auto pool = fr::knn(inst.catalog, inst.query, 4, fr::Metric::euclidean);
    CHECK_THROWS_AS(fr::rerank(pool, inst.catalog, nullptr, fr::RerankConfig{0.5, 3, fr::Kernel::fmmr}),
                    fr::ValidationError);
    CHECK_NOTHROW(fr::rerank(pool, inst.catalog, nullptr, fr::RerankConfig{0.5, 3, fr::Kernel::classic_mmr}));
    CHECK_THROWS_AS(fr::rerank(pool, inst.catalog, &inst.reps, fr::RerankConfig{1.5, 3}), fr::ValidationError);
    CHECK_THROWS_AS(fr::rerank(pool, inst.catalog, &inst.reps, fr::RerankConfig{0.5, 0}), fr::ValidationError);
    auto dup = pool;
    dup.candidates.push_back(dup.candidates.front());
    CHECK_THROWS_AS(fr::rerank(dup, inst.catalog, &inst.reps, fr::RerankConfig{0.5, 3}), fr::ValidationError);
    CHECK(fr::parse_kernel("mmr") == fr::Kernel::classic_mmr);
    CHECK_THROWS_AS(fr::parse_kernel("xquad"), fr::ValidationError);
}
