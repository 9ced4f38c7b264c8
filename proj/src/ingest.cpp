#include "diachron/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <unordered_map>

#include "diachron/corpus_io.hpp"
#include "diachron/error.hpp"
#include "diachron/normalize.hpp"
#include "diachron/parallel.hpp"
#include "diachron/utf8.hpp"

namespace diachron::ingest {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
    }

private:
    std::vector<std::size_t> parent_;
};

struct Link {
    std::size_t a;
    std::size_t b;
    bool title;
    bool body;
};

}  // namespace

int RawRecord::filled_fields() const {
    return int(!title.empty()) + int(!author.empty()) + int(dod_hijri.has_value()) +
           int(genre.has_value() && !genre->empty());
}

RawRecord parse_document(std::string_view markup) {
    RawRecord rec;
    std::size_t pos = 0;
    std::size_t lineno = 0;
    bool terminated = false;
    while (pos < markup.size()) {
        auto nl = markup.find('\n', pos);
        const bool last = nl == std::string_view::npos;
        std::string_view line = markup.substr(pos, last ? std::string_view::npos : nl - pos);
        ++lineno;
        pos = last ? markup.size() : nl + 1;
        if (trim(line).empty()) {
            terminated = true;
            break;
        }
        if (line.front() != '#') throw ParseError("malformed header line (expected '#KEY: value')", lineno);
        const auto colon = line.find(':');
        if (colon == std::string_view::npos) throw ParseError("header line without ':'", lineno);
        const std::string key(trim(line.substr(1, colon - 1)));
        const std::string value(trim(line.substr(colon + 1)));
        if (key == "TITLE") {
            rec.title = value;
        } else if (key == "AUTHOR") {
            rec.author = value;
        } else if (key == "DOD_H") {
            if (!value.empty()) {
                int year = 0;
                auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), year);
                if (ec != std::errc{} || p != value.data() + value.size())
                    throw ParseError("DOD_H is not an integer: '" + value + "'", lineno);
                rec.dod_hijri = year;
            }
        } else if (key == "GENRE") {
            if (!value.empty()) rec.genre = value;
        } else {
            rec.extra[key] = value;
        }
    }
    if (!terminated)
        throw ParseError("missing blank line terminating the header", std::max<std::size_t>(lineno, 1));
    rec.body = std::string(markup.substr(pos));
    if (rec.body.find_first_not_of(" \t\r\n") == std::string::npos)
        throw ParseError("empty document body", lineno + 1);
    return rec;
}

std::vector<RawRecord> parse_directory(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<RawRecord> out;
    out.reserve(files.size());
    for (const auto& f : files) {
        try {
            auto rec = parse_document(read_text_file(f));
            rec.source_path = f.string();
            out.push_back(std::move(rec));
        } catch (const ParseError& e) {
            throw ParseError(f.filename().string() + ": " + e.what(), e.line());
        }
    }
    return out;
}

std::string to_string(LinkReason r) {
    switch (r) {
        case LinkReason::TitleAuthorMatch: return "TitleAuthorMatch";
        case LinkReason::BodySimilarity: return "BodySimilarity";
        case LinkReason::Both: return "Both";
    }
    return "Both";
}

LinkReason link_reason_from_string(const std::string& s) {
    if (s == "TitleAuthorMatch") return LinkReason::TitleAuthorMatch;
    if (s == "BodySimilarity") return LinkReason::BodySimilarity;
    if (s == "Both") return LinkReason::Both;
    throw DomainError("unknown duplicate reason '" + s + "'");
}

double normalized_edit_distance(std::string_view a, std::string_view b) {
    const auto ua = utf8::to_u32(a);
    const auto ub = utf8::to_u32(b);
    const std::size_t longest = std::max(ua.size(), ub.size());
    if (longest == 0) return 0.0;
    std::vector<std::size_t> row(ub.size() + 1);
    std::iota(row.begin(), row.end(), 0);
    for (std::size_t i = 1; i <= ua.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= ub.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (ua[i - 1] == ub[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return double(row[ub.size()]) / double(longest);
}

std::vector<std::uint64_t> body_shingles(std::string_view body, std::size_t k) {
    const auto tokens = tokenize(normalize_text(body));
    std::vector<std::uint64_t> out;
    if (tokens.empty()) return out;
    const std::size_t width = std::min(k, tokens.size());
    for (std::size_t i = 0; i + width <= tokens.size(); ++i) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (std::size_t j = i; j < i + width; ++j) {
            h = fnv1a(tokens[j].surface, h);
            h = fnv1a("\x1f", h);
        }
        out.push_back(mix64(h));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double jaccard(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t i = 0, j = 0, inter = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (b[j] < a[i]) ++j;
        else {
            ++inter;
            ++i;
            ++j;
        }
    }
    return double(inter) / double(a.size() + b.size() - inter);
}

std::vector<DuplicateGroup> group_duplicates(std::span<const RawRecord> records, const GroupingOptions& options) {
    const std::size_t n = records.size();
    std::vector<std::u32string> keys(n);
    std::vector<std::vector<std::uint64_t>> shingles(n);
    parallel_for(n, options.workers, [&](std::size_t i) {
        keys[i] = utf8::to_u32(normalize_text(records[i].title + " " + records[i].author));
        shingles[i] = body_shingles(records[i].body, options.shingle_size);
    });

    // Body candidates: only pairs sharing at least one shingle can clear a
    // positive Jaccard threshold.
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> postings;
    for (std::size_t i = 0; i < n; ++i)
        for (auto s : shingles[i]) postings[s].push_back(static_cast<std::uint32_t>(i));

    std::vector<std::vector<Link>> per_row(n);
    parallel_for(n, options.workers, [&](std::size_t i) {
        std::unordered_map<std::size_t, std::size_t> overlap;
        for (auto s : shingles[i])
            for (auto j : postings.at(s))
                if (j > i) ++overlap[j];
        std::vector<Link>& links = per_row[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            bool title = false;
            if (!keys[i].empty() && !keys[j].empty()) {
                const double longest = double(std::max(keys[i].size(), keys[j].size()));
                const double diff = double(keys[i].size() > keys[j].size() ? keys[i].size() - keys[j].size()
                                                                           : keys[j].size() - keys[i].size());
                if (diff / longest <= options.title_author_threshold)
                    title = normalized_edit_distance(utf8::from_u32(keys[i]), utf8::from_u32(keys[j])) <=
                            options.title_author_threshold;
            }
            bool body = false;
            if (auto it = overlap.find(j); it != overlap.end()) {
                const double inter = double(it->second);
                const double uni = double(shingles[i].size() + shingles[j].size()) - inter;
                body = inter / uni >= options.body_threshold;
            }
            if (title || body) links.push_back({i, j, title, body});
        }
    });

    DisjointSets sets(n);
    for (const auto& row : per_row)
        for (const auto& l : row) sets.unite(l.a, l.b);

    std::map<std::size_t, DuplicateGroup> by_root;
    std::map<std::size_t, std::pair<bool, bool>> kinds;  // (any title-only, any body-only)
    std::map<std::size_t, bool> any_both;
    for (const auto& row : per_row) {
        for (const auto& l : row) {
            const auto root = sets.find(l.a);
            auto& k = kinds[root];
            k.first |= l.title;
            k.second |= l.body;
            any_both[root] = any_both[root] || (l.title && l.body);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto root = sets.find(i);
        if (kinds.count(root)) by_root[root].members.push_back(i);
    }

    std::vector<DuplicateGroup> groups;
    for (auto& [root, g] : by_root) {
        g.canonical = g.members.front();
        for (auto m : g.members)
            if (records[m].filled_fields() > records[g.canonical].filled_fields()) g.canonical = m;
        const auto [title, body] = kinds[root];
        g.reason = (any_both[root] || (title && body)) ? LinkReason::Both
                   : title                              ? LinkReason::TitleAuthorMatch
                                                        : LinkReason::BodySimilarity;
        groups.push_back(std::move(g));
    }
    return groups;
}

FillResult fill_missing_metadata(std::vector<RawRecord> records, std::span<const DuplicateGroup> groups) {
    FillResult result;
    for (std::size_t gid = 0; gid < groups.size(); ++gid) {
        const auto& g = groups[gid];
        std::vector<std::pair<std::size_t, int>> dods;
        for (auto m : g.members)
            if (records[m].dod_hijri) dods.emplace_back(m, *records[m].dod_hijri);
        bool conflict = false;
        for (const auto& [m, v] : dods) conflict |= v != dods.front().second;
        if (conflict) result.conflicts.push_back({gid, "dod_hijri", dods});

        const RawRecord canon = records[g.canonical];
        for (auto m : g.members) {
            if (m == g.canonical) continue;
            auto& r = records[m];
            if (r.title.empty()) r.title = canon.title;
            if (r.author.empty()) r.author = canon.author;
            if ((!r.genre || r.genre->empty()) && canon.genre) r.genre = canon.genre;
            if (!r.dod_hijri && !conflict) r.dod_hijri = canon.dod_hijri;
            for (const auto& [k, v] : canon.extra) {
                auto it = r.extra.find(k);
                if (it == r.extra.end() || it->second.empty()) r.extra[k] = v;
            }
        }
    }
    result.records = std::move(records);
    return result;
}

std::string doc_id_for(const RawRecord& r) {
    return std::filesystem::path(r.source_path).stem().string();
}

json to_json(const DuplicateGroup& g, std::size_t group_id, std::span<const RawRecord> records) {
    json members = json::array();
    for (auto m : g.members) members.push_back(doc_id_for(records[m]));
    return {{"group_id", group_id},
            {"members", members},
            {"canonical", doc_id_for(records[g.canonical])},
            {"reason", to_string(g.reason)}};
}

json to_json(const Conflict& c, std::span<const RawRecord> records) {
    json values = json::array();
    for (const auto& [m, v] : c.values) values.push_back({{"doc_id", doc_id_for(records[m])}, {"value", v}});
    return {{"group_id", c.group_id}, {"field", c.field}, {"values", values}};
}

std::vector<DuplicateGroup> groups_from_jsonl(std::span<const json> rows, std::span<const RawRecord> records) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < records.size(); ++i) index[doc_id_for(records[i])] = i;
    auto lookup = [&](const std::string& id) {
        auto it = index.find(id);
        if (it == index.end()) throw DomainError("resolution file names unknown document '" + id + "'");
        return it->second;
    };
    std::vector<DuplicateGroup> groups;
    std::vector<bool> seen(records.size(), false);
    for (const auto& row : rows) {
        DuplicateGroup g;
        for (const auto& m : row.at("members")) g.members.push_back(lookup(m.get<std::string>()));
        std::sort(g.members.begin(), g.members.end());
        g.members.erase(std::unique(g.members.begin(), g.members.end()), g.members.end());
        if (g.members.size() < 2) continue;  // operator dissolved the group
        g.canonical = lookup(row.at("canonical").get<std::string>());
        if (!std::binary_search(g.members.begin(), g.members.end(), g.canonical))
            throw DomainError("canonical document is not a member of its group");
        for (auto m : g.members) {
            if (seen[m]) throw DomainError("document '" + doc_id_for(records[m]) + "' appears in two groups");
            seen[m] = true;
        }
        g.reason = link_reason_from_string(row.value("reason", "Both"));
        groups.push_back(std::move(g));
    }
    std::sort(groups.begin(), groups.end(),
              [](const DuplicateGroup& a, const DuplicateGroup& b) { return a.members.front() < b.members.front(); });
    return groups;
}

}  // namespace diachron::ingest
