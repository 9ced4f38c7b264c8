#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace diachron::ingest {

// One source document in the header-plus-body markup:
//
//   #TITLE: ...
//   #AUTHOR: ...
//   #DOD_H: 748
//   #GENRE: ...
//   <blank line>
//   body...
struct RawRecord {
    std::string source_path;
    std::string title;
    std::string author;
    std::optional<int> dod_hijri;
    std::optional<std::string> genre;
    std::string body;
    std::map<std::string, std::string> extra;  // unknown header keys, verbatim

    // title, author, dod_hijri and genre that are present and non-empty.
    int filled_fields() const;
};

// Throws ParseError (with a 1-based line number) on a missing header
// terminator, a malformed header line, a non-integer DOD_H or an empty body.
RawRecord parse_document(std::string_view markup);

// Parses every regular file in `dir`, sorted by file name.
std::vector<RawRecord> parse_directory(const std::filesystem::path& dir);

enum class LinkReason { TitleAuthorMatch, BodySimilarity, Both };

std::string to_string(LinkReason r);
LinkReason link_reason_from_string(const std::string& s);

struct DuplicateGroup {
    std::vector<std::size_t> members;  // sorted record indices, size >= 2
    std::size_t canonical = 0;
    LinkReason reason = LinkReason::TitleAuthorMatch;
};

struct GroupingOptions {
    double title_author_threshold = 0.2;  // max normalized edit distance
    double body_threshold = 0.8;          // min Jaccard over word 5-gram shingles
    std::size_t shingle_size = 5;
    unsigned workers = 1;
};

// Levenshtein distance over code points divided by the longer length.
double normalized_edit_distance(std::string_view a, std::string_view b);

// Hashed word shingles of the normalized body, sorted and unique. Texts
// shorter than `k` tokens yield a single shingle of the whole text.
std::vector<std::uint64_t> body_shingles(std::string_view body, std::size_t k = 5);

double jaccard(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);

// Groups are connected components of the link graph, sorted by their
// smallest member.
std::vector<DuplicateGroup> group_duplicates(std::span<const RawRecord> records,
                                             const GroupingOptions& options = {});

struct Conflict {
    std::size_t group_id = 0;
    std::string field;
    std::vector<std::pair<std::size_t, int>> values;  // (record index, value)
};

struct FillResult {
    std::vector<RawRecord> records;
    std::vector<Conflict> conflicts;
};

// Copies empty fields from each group's canonical record. Non-empty fields
// are never touched; a group whose members disagree on dod_hijri is reported
// and its dod_hijri values are left as they are.
FillResult fill_missing_metadata(std::vector<RawRecord> records, std::span<const DuplicateGroup> groups);

nlohmann::json to_json(const DuplicateGroup& g, std::size_t group_id, std::span<const RawRecord> records);
nlohmann::json to_json(const Conflict& c, std::span<const RawRecord> records);

// Reads an operator-edited duplicates.jsonl back into groups. Members are
// named by source file name.
std::vector<DuplicateGroup> groups_from_jsonl(std::span<const nlohmann::json> rows,
                                              std::span<const RawRecord> records);

// Document id for a record: the source file name without extension.
std::string doc_id_for(const RawRecord& r);

}  // namespace diachron::ingest
