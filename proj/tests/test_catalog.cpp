#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fairrank/catalog.hpp"
#include "fairrank/error.hpp"
#include "fairrank/synthetic.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace fr = fairrank;

namespace {

fr::GroupMapping man_mapping() { return fr::GroupMapping{{"M"}, {{"man", "M"}}}; }

fr::Catalog three_items() {
    return fr::Catalog({{"a", {1, 2, 3, 4}, {"man"}}, {"b", {0, 0, 0, 0}, {}}, {"c", {4, 3, 2, 1}, {"dog"}}},
                       man_mapping());
}

std::string what_of(auto&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("three records with one mapped tag") {
    const auto cat = three_items();
    CHECK(cat.size() == 3);
    CHECK(cat.dimension() == 4);
    CHECK(cat.at("a").groups == std::set<std::string>{"M"});
    CHECK(cat.at("b").groups.empty());
    CHECK(cat.at("c").groups.empty());

    const auto members = cat.items_in_group("M");
    REQUIRE(members.size() == 1);
    CHECK(members[0]->id == "a");
    CHECK_THROWS_AS(cat.items_in_group("W"), fr::ValidationError);
}

TEST_CASE("group with no members") {
    fr::Catalog cat({{"a", {0.0}, {"cat"}}}, fr::GroupMapping{{"M", "W"}, {{"man", "M"}, {"woman", "W"}}});
    CHECK(cat.items_in_group("W").empty());
}

TEST_CASE("dimension mismatch names the record") {
    const auto msg = what_of([] {
        fr::Catalog({{"a", {1, 2, 3, 4}, {}}, {"short", {1, 2, 3}, {}}, {"c", {0, 0, 0, 0}, {}}}, man_mapping());
    });
    CHECK(msg.find("short") != std::string::npos);
    CHECK_THROWS_AS(fr::Catalog({{"a", {1, 2}, {}}, {"b", {1}, {}}}, man_mapping()), fr::DataError);
}

TEST_CASE("rejects duplicates, non-finite values, empty input") {
    CHECK_THROWS_AS(fr::Catalog({{"a", {1.0}, {}}, {"a", {2.0}, {}}}, man_mapping()), fr::DataError);
    CHECK_THROWS_AS(fr::Catalog({{"a", {std::nan("")}, {}}}, man_mapping()), fr::DataError);
    CHECK_THROWS_AS(fr::Catalog({{"a", {std::numeric_limits<double>::infinity()}, {}}}, man_mapping()), fr::DataError);
    CHECK_THROWS_AS(fr::Catalog({}, man_mapping()), fr::DataError);
}

TEST_CASE("mapping validation") {
    CHECK_THROWS_AS((fr::GroupMapping{{"M", "M"}, {}}.validate()), fr::ValidationError);
    CHECK_THROWS_AS((fr::GroupMapping{{"M"}, {{"woman", "W"}}}.validate()), fr::ValidationError);
    CHECK(fr::normalize_tag("  Business Woman ") == "business woman");
}

TEST_CASE("tags are normalized before group rules apply") {
    fr::Catalog cat({{"a", {0.0}, {"MAN"}}}, man_mapping());
    CHECK(cat.at("a").groups.contains("M"));
}

TEST_CASE("3249-item corpus with 291 and 458 group members") {
    // 3249 items; 280 only "man", 447 only "woman", 11 both, the rest untagged.
    std::vector<fr::Catalog::Record> records;
    for (int i = 0; i < 3249; ++i) {
        std::set<std::string> tags{"stock"};
        if (i < 280) tags.insert("man");
        else if (i < 727) tags.insert("woman");
        else if (i < 738) tags.insert({"man", "woman"});
        records.push_back({"img" + std::to_string(i), {double(i), 0.0}, tags});
    }
    fr::Catalog cat(std::move(records), fr::GroupMapping{{"man", "woman"}, {{"man", "man"}, {"woman", "woman"}}});
    CHECK(cat.items_in_group("man").size() == 291);
    CHECK(cat.items_in_group("woman").size() == 458);
}

TEST_CASE("items_in_group agrees with the generator log") {
    fr::SyntheticSpec spec;
    spec.items_per_group = 40;
    spec.groupless_items = 20;
    spec.dimension = 8;
    const auto corpus = fr::generate_synthetic(spec, 7);
    CHECK(corpus.catalog.size() == 100);
    std::set<std::string> logged;
    for (const auto& e : corpus.log) {
        if (e.group == 1u) logged.insert(e.id);
    }
    std::set<std::string> listed;
    for (const auto* item : corpus.catalog.items_in_group("g1")) listed.insert(item->id);
    CHECK(listed.size() == 40);
    CHECK(listed == logged);
}

TEST_CASE("embeddings text format") {
    std::istringstream in("a\t1,2.5,-3\n\nb\t0,1e-05,4\r\n");
    const auto recs = fr::read_embeddings(in);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].id == "a");
    CHECK(recs[0].vector == fr::Vector{1, 2.5, -3});
    CHECK(recs[1].vector == fr::Vector{0, 1e-05, 4});

    std::istringstream bad("a\t1,2\nb\t1,x\n");
    const auto msg = what_of([&] { fr::read_embeddings(bad); });
    CHECK(msg.find("line 2") != std::string::npos);

    std::istringstream no_tab("a 1,2\n");
    CHECK_THROWS_AS(fr::read_embeddings(no_tab), fr::DataError);
}

TEST_CASE("dimension mismatch in a file names the record") {
    std::istringstream emb("a\t1,2,3\nb\t1,2\n");
    std::istringstream tags("");
    const auto msg = what_of([&] { fr::assemble_catalog(fr::read_embeddings(emb), fr::read_tags(tags), man_mapping()); });
    CHECK(msg.find("'b'") != std::string::npos);
}

TEST_CASE("tags text format") {
    std::istringstream in("a\tMan, fitness ,,coffee\nb\t\n");
    const auto tags = fr::read_tags(in);
    CHECK(tags.at("a") == std::set<std::string>{"man", "fitness", "coffee"});
    CHECK(tags.at("b").empty());
    std::istringstream dup("a\tx\na\ty\n");
    CHECK_THROWS_AS(fr::read_tags(dup), fr::DataError);
}

TEST_CASE("tag records for unknown ids are ignored") {
    std::istringstream emb("a\t1\n");
    std::istringstream tags("a\tman\nghost\tman\n");
    const auto cat = fr::assemble_catalog(fr::read_embeddings(emb), fr::read_tags(tags), man_mapping());
    CHECK(cat.size() == 1);
    CHECK(cat.items_in_group("M").size() == 1);
}

TEST_CASE("mapping YAML") {
    std::istringstream in("groups: [man, woman]\nrules:\n  Men's Fashion: man\n  business woman: woman\n");
    const auto m = fr::read_mapping(in);
    CHECK(m.groups == std::vector<std::string>{"man", "woman"});
    CHECK(m.tag_rules.at("men's fashion") == "man");

    std::ostringstream out;
    fr::write_mapping(out, m);
    std::istringstream back(out.str());
    CHECK(fr::read_mapping(back) == m);

    std::istringstream bad_rule("groups: [man]\nrules:\n  girls: woman\n");
    CHECK_THROWS_AS(fr::read_mapping(bad_rule), fr::DataError);
    std::istringstream no_groups("rules: {}\n");
    CHECK_THROWS_AS(fr::read_mapping(no_groups), fr::DataError);
    std::istringstream broken("groups: [man\n");
    CHECK_THROWS_AS(fr::read_mapping(broken), fr::DataError);
}

TEST_CASE("write then read is the identity, and writing is idempotent") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    std::vector<fr::EmbeddingRecord> recs;
    for (int i = 0; i < 20; ++i) {
        fr::Vector v(7);
        for (auto& x : v) x = u(rng) * std::pow(10.0, double(i % 9) - 4);
        recs.push_back({"r" + std::to_string(i), v});
    }
    std::ostringstream first;
    fr::write_embeddings(first, recs);
    std::istringstream in(first.str());
    const auto back = fr::read_embeddings(in);
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(back[i].id == recs[i].id);
        CHECK(back[i].vector == recs[i].vector);  // bit-exact
    }
    std::ostringstream second;
    fr::write_embeddings(second, back);
    CHECK(first.str() == second.str());
}

TEST_CASE("extractor-style file: 2048-dim records written with shortest float repr") {
    // Ten records in the shape the image extractor emits: repr()-style floats,
    // exponent forms included.
    const char* samples[] = {"0.0", "0.1", "1e-05", "2.5e+16", "-0.3333333333333333", "123.456", "7.0", "-1e-300"};
    std::ostringstream text;
    for (int r = 0; r < 10; ++r) {
        text << "photo_" << r << '\t';
        for (int j = 0; j < 2048; ++j) text << (j ? "," : "") << samples[(r + j) % 8];
        text << '\n';
    }
    std::istringstream in(text.str());
    std::istringstream tags("photo_0\tman,gym\n");
    const auto cat = fr::assemble_catalog(fr::read_embeddings(in), fr::read_tags(tags), man_mapping());
    CHECK(cat.size() == 10);
    CHECK(cat.dimension() == 2048);
    for (const auto& item : cat.items()) {
        for (double v : item.vector) CHECK_MESSAGE(std::isfinite(v), item.id);
    }
    CHECK(cat.at("photo_1").vector[0] == 0.1);
    CHECK(cat.at("photo_1").vector[1] == 1e-05);

    std::ostringstream mixed;
    for (int r = 0; r < 3; ++r) {
        mixed << "photo_" << r << '\t';
        const int dim = r == 2 ? 2047 : 2048;
        for (int j = 0; j < dim; ++j) mixed << (j ? "," : "") << "0.5";
        mixed << '\n';
    }
    std::istringstream mixed_in(mixed.str());
    std::istringstream no_tags("");
    const auto msg = what_of(
        [&] { fr::assemble_catalog(fr::read_embeddings(mixed_in), fr::read_tags(no_tags), man_mapping()); });
    CHECK(msg.find("photo_2") != std::string::npos);
}

TEST_CASE("format_double round trips") {
    for (double v : {0.1, -2.0, 1e-300, 6.02214076e23, 1.0 / 3.0}) {
        const auto s = fr::format_double(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(fr::format_double(0.5) == "0.5");
}
