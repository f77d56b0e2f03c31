#pragma once

// Item corpus: dense descriptors, curated tags and the demographic groups
// derived from those tags. A Catalog is immutable once constructed and may be
// shared across threads without synchronization.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fairrank {

using Vector = std::vector<double>;
using GroupId = std::string;

struct EmbeddingItem {
    std::string id;
    Vector vector;
    std::set<std::string> tags;
    std::set<GroupId> groups;

    bool operator==(const EmbeddingItem&) const = default;
};

/// Ordered group declarations plus the tag -> group rules used to derive
/// memberships.
struct GroupMapping {
    std::vector<GroupId> groups;
    std::map<std::string, GroupId> tag_rules;

    /// Throws ValidationError if a rule targets an undeclared group or a group
    /// is declared twice.
    void validate() const;
    bool declares(std::string_view group) const;
    std::set<GroupId> groups_for(const std::set<std::string>& tags) const;

    bool operator==(const GroupMapping&) const = default;
};

/// Lowercase and trim a tag the way the loader does.
std::string normalize_tag(std::string_view tag);

class Catalog {
public:
    struct Record {
        std::string id;
        Vector vector;
        std::set<std::string> tags;
    };

    /// Validates every record (uniform dimension, finite components, unique
    /// ids), normalizes tags and derives group memberships from `mapping`.
    /// Throws DataError on the first offending record.
    Catalog(std::vector<Record> records, GroupMapping mapping);

    /// Items sorted by id.
    std::span<const EmbeddingItem> items() const { return items_; }
    std::size_t size() const { return items_.size(); }
    std::size_t dimension() const { return dimension_; }
    const GroupMapping& mapping() const { return mapping_; }

    /// nullptr when absent.
    const EmbeddingItem* find(std::string_view id) const;
    /// Throws DataError when absent.
    const EmbeddingItem& at(std::string_view id) const;

    /// Members of `group` in id order. Throws ValidationError for a group the
    /// mapping does not declare.
    std::vector<const EmbeddingItem*> items_in_group(std::string_view group) const;

private:
    std::vector<EmbeddingItem> items_;
    std::size_t dimension_ = 0;
    GroupMapping mapping_;
};

// ---------------------------------------------------------------------------
// Line-delimited file formats
//
//   embeddings:  id<TAB>v1,v2,...,vD
//   tags:        id<TAB>tag1,tag2,...
//   mapping:     YAML with a `groups:` sequence and a `rules:` tag -> group map
//
// Floats are written in shortest round-trip form, so write/read reproduces
// every component bit for bit.
// ---------------------------------------------------------------------------

struct EmbeddingRecord {
    std::string id;
    Vector vector;
};

std::vector<EmbeddingRecord> read_embeddings(std::istream& in);
void write_embeddings(std::ostream& out, std::span<const EmbeddingRecord> records);

std::map<std::string, std::set<std::string>> read_tags(std::istream& in);
void write_tags(std::ostream& out, const std::map<std::string, std::set<std::string>>& tags);

GroupMapping read_mapping(std::istream& in);
void write_mapping(std::ostream& out, const GroupMapping& mapping);

/// Tag records whose id has no embedding are ignored; embeddings without a tag
/// record get an empty tag set.
Catalog assemble_catalog(std::vector<EmbeddingRecord> embeddings,
                         std::map<std::string, std::set<std::string>> tags,
                         GroupMapping mapping);

Catalog load_catalog(const std::filesystem::path& embeddings_path,
                     const std::filesystem::path& tags_path,
                     const std::filesystem::path& mapping_path);

void save_catalog(const Catalog& catalog,
                  const std::filesystem::path& embeddings_path,
                  const std::filesystem::path& tags_path,
                  const std::filesystem::path& mapping_path);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace fairrank
