#include "fairrank/synthetic.hpp"

#include "fairrank/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <numeric>
#include <random>

namespace fairrank {

namespace {

double norm(const Vector& v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); }

std::string item_id(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "item%05zu", index);
    return buf;
}

std::string topic_tag(std::size_t topic, std::size_t word) {
    return "topic" + std::to_string(topic) + "_" + std::to_string(word);
}

std::vector<Vector> make_group_means(const SyntheticSpec& spec) {
    if (!spec.group_means.empty()) return spec.group_means;
    // Scaled basis vectors are pairwise sqrt(2) * scale apart.
    const double scale = spec.group_separation * spec.noise_scale / std::sqrt(2.0);
    std::vector<Vector> means(spec.num_groups, Vector(spec.dimension, 0.0));
    for (std::size_t g = 0; g < spec.num_groups; ++g) means[g][g] = scale;
    return means;
}

// Equal-norm topic offsets, orthonormalized against the group axes and each
// other for as long as the dimension leaves room.
std::vector<Vector> make_topic_offsets(const SyntheticSpec& spec, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const bool generated_means = spec.group_means.empty();
    std::vector<Vector> basis;
    if (generated_means) {
        for (std::size_t g = 0; g < spec.num_groups; ++g) {
            Vector e(spec.dimension, 0.0);
            e[g] = 1.0;
            basis.push_back(std::move(e));
        }
    }

    const double length = spec.topic_separation * spec.noise_scale / std::sqrt(2.0);
    std::vector<Vector> offsets;
    if (!spec.orthogonal_topics) {
        const double sd = length / std::sqrt(static_cast<double>(spec.dimension));
        for (std::size_t t = 0; t < spec.num_topics; ++t) {
            Vector v(spec.dimension);
            for (auto& x : v) x = sd * gauss(rng);
            offsets.push_back(std::move(v));
        }
        return offsets;
    }
    for (std::size_t t = 0; t < spec.num_topics; ++t) {
        Vector v(spec.dimension);
        for (auto& x : v) x = gauss(rng);
        if (basis.size() < spec.dimension) {
            for (const auto& b : basis) {
                const double dot = std::inner_product(v.begin(), v.end(), b.begin(), 0.0);
                for (std::size_t d = 0; d < v.size(); ++d) v[d] -= dot * b[d];
            }
        }
        const double n = norm(v);
        for (auto& x : v) x /= n;
        if (basis.size() < spec.dimension) basis.push_back(v);
        for (auto& x : v) x *= length;
        offsets.push_back(std::move(v));
    }
    return offsets;
}

}  // namespace

void SyntheticSpec::validate() const {
    if (num_groups == 0) throw ValidationError("synthetic: at least one group required");
    if (items_per_group == 0) throw ValidationError("synthetic: items_per_group must be positive");
    if (dimension == 0) throw ValidationError("synthetic: dimension must be positive");
    if (!(noise_scale > 0.0)) throw ValidationError("synthetic: noise scale must be positive");
    if (num_topics == 0) throw ValidationError("synthetic: at least one topic required");
    if (topic_tags_per_item == 0 || topic_tags_per_item > topic_vocabulary) {
        throw ValidationError("synthetic: topic_tags_per_item must lie in [1, topic_vocabulary]");
    }
    if (group_means.empty()) {
        if (num_groups > dimension) throw ValidationError("synthetic: more groups than dimensions");
        if (!(group_separation > 0.0)) throw ValidationError("synthetic: group separation must be positive");
    } else {
        if (group_means.size() != num_groups) throw ValidationError("synthetic: one mean per group required");
        for (std::size_t a = 0; a < group_means.size(); ++a) {
            if (group_means[a].size() != dimension) throw ValidationError("synthetic: mean dimension mismatch");
            for (std::size_t b = 0; b < a; ++b) {
                if (group_means[a] == group_means[b]) throw ValidationError("synthetic: group means must differ");
            }
        }
    }
    if (!group_names.empty() && group_names.size() != num_groups) {
        throw ValidationError("synthetic: one name per group required");
    }
    if (!group_tags.empty()) {
        if (group_tags.size() != num_groups) throw ValidationError("synthetic: one tag vocabulary per group required");
        for (const auto& vocab : group_tags) {
            if (vocab.empty()) throw ValidationError("synthetic: empty group tag vocabulary");
        }
    }
}

std::vector<GroupId> SyntheticSpec::resolved_group_names() const {
    if (!group_names.empty()) return group_names;
    std::vector<GroupId> names;
    for (std::size_t g = 0; g < num_groups; ++g) names.push_back("g" + std::to_string(g));
    return names;
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, spec.noise_scale);

    const auto names = spec.resolved_group_names();
    std::vector<std::vector<std::string>> vocab = spec.group_tags;
    if (vocab.empty()) {
        for (const auto& n : names) vocab.push_back({n});
    }

    GroupMapping mapping;
    mapping.groups = names;
    for (std::size_t g = 0; g < names.size(); ++g) {
        for (const auto& tag : vocab[g]) mapping.tag_rules[normalize_tag(tag)] = names[g];
    }

    const auto means = make_group_means(spec);
    const auto topics = make_topic_offsets(spec, rng);
    Vector centroid(spec.dimension, 0.0);
    for (const auto& m : means) {
        for (std::size_t d = 0; d < spec.dimension; ++d) centroid[d] += m[d] / static_cast<double>(means.size());
    }

    std::vector<std::size_t> words(spec.topic_vocabulary);
    std::iota(words.begin(), words.end(), std::size_t{0});

    std::vector<Catalog::Record> records;
    std::vector<SyntheticItemLog> log;
    auto emit = [&](std::optional<std::size_t> group, std::size_t topic) {
        const Vector& base = group ? means[*group] : centroid;
        Catalog::Record rec;
        rec.id = item_id(records.size());
        rec.vector.resize(spec.dimension);
        for (std::size_t d = 0; d < spec.dimension; ++d) rec.vector[d] = base[d] + topics[topic][d] + noise(rng);

        if (group) {
            std::uniform_int_distribution<std::size_t> pick(0, vocab[*group].size() - 1);
            rec.tags.insert(normalize_tag(vocab[*group][pick(rng)]));
        }
        std::vector<std::size_t> chosen;
        std::sample(words.begin(), words.end(), std::back_inserter(chosen), spec.topic_tags_per_item, rng);
        for (auto w : chosen) rec.tags.insert(topic_tag(topic, w));

        log.push_back({rec.id, group, topic});
        records.push_back(std::move(rec));
    };

    for (std::size_t g = 0; g < spec.num_groups; ++g) {
        for (std::size_t i = 0; i < spec.items_per_group; ++i) emit(g, i % spec.num_topics);
    }
    for (std::size_t i = 0; i < spec.groupless_items; ++i) emit(std::nullopt, i % spec.num_topics);

    return {Catalog(std::move(records), std::move(mapping)), std::move(log)};
}

}  // namespace fairrank
