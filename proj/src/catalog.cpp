#include "fairrank/catalog.hpp"

#include "fairrank/error.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

namespace fairrank {

namespace {

std::string_view trim(std::string_view s) {
    auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

template <typename Fn>
void for_each_field(std::string_view s, char sep, Fn&& fn) {
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        fn(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
}

// Splits `id<TAB>payload`. Returns false for blank lines.
bool split_record(std::string& line, std::size_t line_no, std::string_view& id,
                  std::string_view& payload) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) return false;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
        throw DataError("line " + std::to_string(line_no) + ": expected id<TAB>fields");
    }
    id = std::string_view(line).substr(0, tab);
    payload = std::string_view(line).substr(tab + 1);
    if (id.empty()) throw DataError("line " + std::to_string(line_no) + ": empty id");
    return true;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

}  // namespace

std::string normalize_tag(std::string_view tag) {
    auto t = trim(tag);
    std::string out(t);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// GroupMapping
// ---------------------------------------------------------------------------

void GroupMapping::validate() const {
    std::set<GroupId> seen;
    for (const auto& g : groups) {
        if (g.empty()) throw ValidationError("group mapping: empty group identifier");
        if (!seen.insert(g).second) throw ValidationError("group mapping: duplicate group '" + g + "'");
    }
    for (const auto& [tag, group] : tag_rules) {
        if (!seen.contains(group)) {
            throw ValidationError("group mapping: rule '" + tag + "' targets undeclared group '" +
                                  group + "'");
        }
    }
}

bool GroupMapping::declares(std::string_view group) const {
    return std::find(groups.begin(), groups.end(), group) != groups.end();
}

std::set<GroupId> GroupMapping::groups_for(const std::set<std::string>& tags) const {
    std::set<GroupId> out;
    for (const auto& tag : tags) {
        if (auto it = tag_rules.find(tag); it != tag_rules.end()) out.insert(it->second);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

Catalog::Catalog(std::vector<Record> records, GroupMapping mapping) : mapping_(std::move(mapping)) {
    mapping_.validate();
    if (records.empty()) throw DataError("catalog is empty");

    dimension_ = records.front().vector.size();
    if (dimension_ == 0) throw DataError("item '" + records.front().id + "' has an empty vector");

    items_.reserve(records.size());
    for (auto& r : records) {
        if (r.vector.size() != dimension_) {
            throw DataError("dimension mismatch for item '" + r.id + "': expected " +
                            std::to_string(dimension_) + ", got " + std::to_string(r.vector.size()));
        }
        if (!std::all_of(r.vector.begin(), r.vector.end(), [](double v) { return std::isfinite(v); })) {
            throw DataError("non-finite component in item '" + r.id + "'");
        }
        EmbeddingItem item;
        item.id = std::move(r.id);
        item.vector = std::move(r.vector);
        for (const auto& t : r.tags) {
            auto norm = normalize_tag(t);
            if (!norm.empty()) item.tags.insert(std::move(norm));
        }
        item.groups = mapping_.groups_for(item.tags);
        items_.push_back(std::move(item));
    }

    std::sort(items_.begin(), items_.end(),
              [](const EmbeddingItem& a, const EmbeddingItem& b) { return a.id < b.id; });
    auto dup = std::adjacent_find(items_.begin(), items_.end(),
                                  [](const EmbeddingItem& a, const EmbeddingItem& b) { return a.id == b.id; });
    if (dup != items_.end()) throw DataError("duplicate item id '" + dup->id + "'");
}

const EmbeddingItem* Catalog::find(std::string_view id) const {
    auto it = std::lower_bound(items_.begin(), items_.end(), id,
                               [](const EmbeddingItem& item, std::string_view key) { return item.id < key; });
    if (it == items_.end() || it->id != id) return nullptr;
    return &*it;
}

const EmbeddingItem& Catalog::at(std::string_view id) const {
    const auto* item = find(id);
    if (item == nullptr) throw DataError("unknown item id '" + std::string(id) + "'");
    return *item;
}

std::vector<const EmbeddingItem*> Catalog::items_in_group(std::string_view group) const {
    if (!mapping_.declares(group)) {
        throw ValidationError("unknown group '" + std::string(group) + "'");
    }
    std::vector<const EmbeddingItem*> out;
    for (const auto& item : items_) {
        if (item.groups.contains(std::string(group))) out.push_back(&item);
    }
    return out;
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

std::vector<EmbeddingRecord> read_embeddings(std::istream& in) {
    std::vector<EmbeddingRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view id, payload;
        if (!split_record(line, line_no, id, payload)) continue;

        EmbeddingRecord rec;
        rec.id = std::string(id);
        for_each_field(payload, ',', [&](std::string_view field) {
            field = trim(field);
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
                throw DataError("line " + std::to_string(line_no) + ": item '" + rec.id +
                                "': cannot parse component '" + std::string(field) + "'");
            }
            rec.vector.push_back(v);
        });
        out.push_back(std::move(rec));
    }
    return out;
}

void write_embeddings(std::ostream& out, std::span<const EmbeddingRecord> records) {
    for (const auto& rec : records) {
        out << rec.id << '\t';
        for (std::size_t i = 0; i < rec.vector.size(); ++i) {
            if (i != 0) out << ',';
            out << format_double(rec.vector[i]);
        }
        out << '\n';
    }
}

std::map<std::string, std::set<std::string>> read_tags(std::istream& in) {
    std::map<std::string, std::set<std::string>> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view id, payload;
        if (!split_record(line, line_no, id, payload)) continue;
        auto [it, inserted] = out.try_emplace(std::string(id));
        if (!inserted) {
            throw DataError("line " + std::to_string(line_no) + ": duplicate tag record for '" +
                            it->first + "'");
        }
        for_each_field(payload, ',', [&](std::string_view field) {
            auto tag = normalize_tag(field);
            if (!tag.empty()) it->second.insert(std::move(tag));
        });
    }
    return out;
}

void write_tags(std::ostream& out, const std::map<std::string, std::set<std::string>>& tags) {
    for (const auto& [id, set] : tags) {
        out << id << '\t';
        bool first = true;
        for (const auto& t : set) {
            if (!first) out << ',';
            out << t;
            first = false;
        }
        out << '\n';
    }
}

GroupMapping read_mapping(std::istream& in) {
    GroupMapping mapping;
    try {
        YAML::Node root = YAML::Load(in);
        if (!root.IsMap()) throw DataError("group mapping: top level must be a map");
        const auto groups = root["groups"];
        if (!groups || !groups.IsSequence()) throw DataError("group mapping: missing `groups:` list");
        for (const auto& g : groups) mapping.groups.push_back(g.as<std::string>());
        if (const auto rules = root["rules"]) {
            if (!rules.IsMap()) throw DataError("group mapping: `rules:` must be a map");
            for (const auto& kv : rules) {
                auto tag = normalize_tag(kv.first.as<std::string>());
                mapping.tag_rules[tag] = kv.second.as<std::string>();
            }
        }
    } catch (const YAML::Exception& e) {
        throw DataError(std::string("group mapping: ") + e.what());
    }
    try {
        mapping.validate();
    } catch (const ValidationError& e) {
        throw DataError(e.what());
    }
    return mapping;
}

void write_mapping(std::ostream& out, const GroupMapping& mapping) {
    YAML::Emitter em;
    em << YAML::BeginMap;
    em << YAML::Key << "groups" << YAML::Value << YAML::BeginSeq;
    for (const auto& g : mapping.groups) em << YAML::DoubleQuoted << g;
    em << YAML::EndSeq;
    em << YAML::Key << "rules" << YAML::Value << YAML::BeginMap;
    for (const auto& [tag, group] : mapping.tag_rules) {
        em << YAML::Key << YAML::DoubleQuoted << tag << YAML::Value << YAML::DoubleQuoted << group;
    }
    em << YAML::EndMap << YAML::EndMap;
    out << em.c_str() << '\n';
}

Catalog assemble_catalog(std::vector<EmbeddingRecord> embeddings,
                         std::map<std::string, std::set<std::string>> tags, GroupMapping mapping) {
    std::vector<Catalog::Record> records;
    records.reserve(embeddings.size());
    for (auto& e : embeddings) {
        Catalog::Record r{std::move(e.id), std::move(e.vector), {}};
        if (auto it = tags.find(r.id); it != tags.end()) r.tags = std::move(it->second);
        records.push_back(std::move(r));
    }
    return Catalog(std::move(records), std::move(mapping));
}

Catalog load_catalog(const std::filesystem::path& embeddings_path,
                     const std::filesystem::path& tags_path,
                     const std::filesystem::path& mapping_path) {
    auto emb_in = open_input(embeddings_path);
    auto tags_in = open_input(tags_path);
    auto map_in = open_input(mapping_path);
    return assemble_catalog(read_embeddings(emb_in), read_tags(tags_in), read_mapping(map_in));
}

void save_catalog(const Catalog& catalog, const std::filesystem::path& embeddings_path,
                  const std::filesystem::path& tags_path, const std::filesystem::path& mapping_path) {
    std::vector<EmbeddingRecord> records;
    std::map<std::string, std::set<std::string>> tags;
    for (const auto& item : catalog.items()) {
        records.push_back({item.id, item.vector});
        tags[item.id] = item.tags;
    }
    auto emb_out = open_output(embeddings_path);
    write_embeddings(emb_out, records);
    auto tags_out = open_output(tags_path);
    write_tags(tags_out, tags);
    auto map_out = open_output(mapping_path);
    write_mapping(map_out, catalog.mapping());
}

}  // namespace fairrank
