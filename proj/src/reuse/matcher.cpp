#include "diachron/reuse/matcher.hpp"

#include <algorithm>
#include <numeric>

#include "diachron/parallel.hpp"

namespace diachron::reuse {

std::uint32_t TokenSpan::overlap(const TokenSpan& o) const {
    const auto lo = std::max(start, o.start);
    const auto hi = std::min(end, o.end);
    return hi > lo ? hi - lo : 0;
}

PassageMatch PassageMatch::swapped() const {
    return PassageMatch{doc_b, doc_a, span_b, span_a, length, seed_count};
}

namespace {

// Document indices are replaced by their rank in id order so that seeds,
// orientation and output order all follow DocumentId ordering.
struct Seed {
    std::uint32_t doc_a;
    std::uint32_t doc_b;
    std::uint32_t a;
    std::uint32_t b;

    friend auto operator<=>(const Seed&, const Seed&) = default;
};

struct Region {
    TokenSpan a;
    TokenSpan b;
    std::size_t seeds = 0;
};

struct Chain {
    std::uint32_t a_min, a_last, a_max;
    std::uint32_t b_min, b_last, b_max;
    std::size_t seeds;

    Region region() const {
        return {{a_min, a_max + static_cast<std::uint32_t>(kWindow)},
                {b_min, b_max + static_cast<std::uint32_t>(kWindow)},
                seeds};
    }
};

// Seeds of one document pair, sorted by (a, b), with multiplicities.
std::vector<Region> chain_seeds(std::span<const Seed> seeds, std::span<const std::uint32_t> multiplicity,
                                std::size_t max_gap) {
    std::vector<Region> done;
    std::vector<Chain> active;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        const auto a = seeds[s].a;
        const auto b = seeds[s].b;
        std::size_t keep = 0;
        for (auto& c : active) {
            if (a - c.a_last > max_gap) done.push_back(c.region());
            else active[keep++] = c;
        }
        active.resize(keep);

        std::size_t best = active.size();
        std::size_t best_cost = 0;
        for (std::size_t i = 0; i < active.size(); ++i) {
            const auto& c = active[i];
            if (b < c.b_last || b - c.b_last > max_gap) continue;
            const std::size_t cost = (a - c.a_last) + (b - c.b_last);
            if (best == active.size() || cost < best_cost) {
                best = i;
                best_cost = cost;
            }
        }
        if (best == active.size()) {
            active.push_back({a, a, a, b, b, b, multiplicity[s]});
        } else {
            auto& c = active[best];
            c.a_last = a;
            c.a_max = std::max(c.a_max, a);
            c.b_last = b;
            c.b_min = std::min(c.b_min, b);
            c.b_max = std::max(c.b_max, b);
            c.seeds += multiplicity[s];
        }
    }
    for (const auto& c : active) done.push_back(c.region());
    return done;
}

// Merges regions that overlap on both sides until none do.
void merge_regions(std::vector<Region>& regions) {
    bool changed = true;
    while (changed) {
        changed = false;
        std::sort(regions.begin(), regions.end(), [](const Region& x, const Region& y) {
            if (x.a.start != y.a.start) return x.a.start < y.a.start;
            return x.b.start < y.b.start;
        });
        std::vector<Region> out;
        std::vector<bool> used(regions.size(), false);
        for (std::size_t i = 0; i < regions.size(); ++i) {
            if (used[i]) continue;
            Region r = regions[i];
            for (std::size_t j = i + 1; j < regions.size() && regions[j].a.start < r.a.end; ++j) {
                if (used[j] || !regions[j].b.overlaps(r.b) || !regions[j].a.overlaps(r.a)) continue;
                r.a = {std::min(r.a.start, regions[j].a.start), std::max(r.a.end, regions[j].a.end)};
                r.b = {std::min(r.b.start, regions[j].b.start), std::max(r.b.end, regions[j].b.end)};
                r.seeds += regions[j].seeds;
                used[j] = true;
                changed = true;
            }
            out.push_back(r);
        }
        regions = std::move(out);
    }
}

bool match_less(const PassageMatch& x, const PassageMatch& y) {
    if (x.doc_a != y.doc_a) return x.doc_a < y.doc_a;
    if (x.doc_b != y.doc_b) return x.doc_b < y.doc_b;
    if (x.span_a.start != y.span_a.start) return x.span_a.start < y.span_a.start;
    if (x.span_b.start != y.span_b.start) return x.span_b.start < y.span_b.start;
    if (x.span_a.end != y.span_a.end) return x.span_a.end < y.span_a.end;
    return x.span_b.end < y.span_b.end;
}

}  // namespace

std::vector<PassageMatch> find_matches(const SkipGramIndex& index, const MatchOptions& options) {
    const std::size_t n_docs = index.doc_ids.size();
    std::vector<std::uint32_t> by_rank(n_docs);
    std::iota(by_rank.begin(), by_rank.end(), 0);
    std::sort(by_rank.begin(), by_rank.end(),
              [&](std::uint32_t x, std::uint32_t y) { return index.doc_ids[x] < index.doc_ids[y]; });
    std::vector<std::uint32_t> rank(n_docs);
    for (std::uint32_t r = 0; r < n_docs; ++r) rank[by_rank[r]] = r;

    const unsigned workers = std::max(1u, options.workers);
    const std::size_t n_buckets = std::max<std::size_t>(16, std::size_t{workers} * 4);
    const std::size_t n_parts = index.partitions.size();

    // Seeds per partition, already split into document-pair buckets.
    std::vector<std::vector<std::vector<Seed>>> per_part(n_parts, std::vector<std::vector<Seed>>(n_buckets));
    parallel_for(n_parts, workers, [&](std::size_t p) {
        const auto& part = index.partitions[p];
        auto& buckets = per_part[p];
        for (std::size_t i = 0; i < part.size();) {
            std::size_t j = i;
            while (j < part.size() && part[j].key == part[i].key) ++j;
            for (std::size_t x = i; x < j; ++x) {
                for (std::size_t y = x + 1; y < j; ++y) {
                    Posting px = part[x].posting;
                    Posting py = part[y].posting;
                    std::uint32_t rx = rank[px.doc];
                    std::uint32_t ry = rank[py.doc];
                    if (rx == ry) {
                        if (px.pos > py.pos) std::swap(px, py);
                        if (py.pos - px.pos < kWindow) continue;
                    } else if (rx > ry) {
                        std::swap(px, py);
                        std::swap(rx, ry);
                    }
                    const std::size_t bucket = mix64((std::uint64_t{rx} << 32) | ry) % n_buckets;
                    buckets[bucket].push_back({rx, ry, px.pos, py.pos});
                }
            }
            i = j;
        }
    });

    std::vector<std::vector<PassageMatch>> results(n_buckets);
    parallel_for(n_buckets, workers, [&](std::size_t bkt) {
        std::vector<Seed> seeds;
        std::size_t total = 0;
        for (std::size_t p = 0; p < n_parts; ++p) total += per_part[p][bkt].size();
        seeds.reserve(total);
        for (std::size_t p = 0; p < n_parts; ++p) {
            auto& v = per_part[p][bkt];
            seeds.insert(seeds.end(), v.begin(), v.end());
            std::vector<Seed>().swap(v);
        }
        std::sort(seeds.begin(), seeds.end());

        std::vector<Seed> unique;
        std::vector<std::uint32_t> mult;
        for (const auto& s : seeds) {
            if (!unique.empty() && unique.back() == s) ++mult.back();
            else {
                unique.push_back(s);
                mult.push_back(1);
            }
        }
        std::vector<Seed>().swap(seeds);

        auto& out = results[bkt];
        for (std::size_t i = 0; i < unique.size();) {
            std::size_t j = i;
            while (j < unique.size() && unique[j].doc_a == unique[i].doc_a && unique[j].doc_b == unique[i].doc_b) ++j;
            auto regions = chain_seeds(std::span(unique).subspan(i, j - i), std::span(mult).subspan(i, j - i),
                                       options.max_gap);
            merge_regions(regions);
            const bool same_doc = unique[i].doc_a == unique[i].doc_b;
            for (const auto& r : regions) {
                if (r.a.length() < options.min_match_len || r.b.length() < options.min_match_len) continue;
                if (same_doc && r.a.overlaps(r.b)) continue;
                out.push_back(PassageMatch{index.doc_ids[by_rank[unique[i].doc_a]],
                                           index.doc_ids[by_rank[unique[i].doc_b]], r.a, r.b,
                                           std::min(r.a.length(), r.b.length()), r.seeds});
            }
            i = j;
        }
    });

    std::vector<PassageMatch> matches;
    for (auto& r : results)
        for (auto& m : r) matches.push_back(std::move(m));
    std::sort(matches.begin(), matches.end(), match_less);
    return matches;
}

std::vector<PassageMatch> matches_for(std::span<const PassageMatch> matches, const DocumentId& doc) {
    std::vector<PassageMatch> out;
    for (const auto& m : matches) {
        if (m.doc_a == doc) out.push_back(m);
        if (m.doc_b == doc) out.push_back(m.swapped());
    }
    std::sort(out.begin(), out.end(), match_less);
    return out;
}

std::vector<PassageMatch> with_both_orientations(std::span<const PassageMatch> matches) {
    std::vector<PassageMatch> out;
    out.reserve(matches.size() * 2);
    for (const auto& m : matches) {
        out.push_back(m);
        out.push_back(m.swapped());
    }
    std::sort(out.begin(), out.end(), match_less);
    return out;
}

MatchSummary summarize(std::span<const PassageMatch> matches, const SkipGramIndex& index) {
    MatchSummary s;
    s.matches = matches.size();
    double total = 0;
    for (std::size_t i = 0; i < matches.size(); ++i) {
        total += double(matches[i].length);
        if (i == 0 || !(matches[i].doc_a == matches[i - 1].doc_a) || !(matches[i].doc_b == matches[i - 1].doc_b))
            ++s.document_pairs;
    }
    s.mean_length = matches.empty() ? 0.0 : total / double(matches.size());
    s.marked_tokens = index.marked_tokens;
    s.total_tokens = index.total_tokens;
    s.marked_fraction = index.total_tokens ? double(index.marked_tokens) / double(index.total_tokens) : 0.0;
    s.total_postings = index.total_postings();
    s.dropped_keys = index.dropped_keys;
    return s;
}

nlohmann::json to_json(const PassageMatch& m) {
    return {{"doc_a", m.doc_a.str()},       {"doc_b", m.doc_b.str()},     {"start_a", m.span_a.start},
            {"end_a", m.span_a.end},        {"start_b", m.span_b.start},  {"end_b", m.span_b.end},
            {"length", m.length},           {"seed_count", m.seed_count}};
}

nlohmann::json to_json(const MatchSummary& s) {
    return {{"matches", s.matches},
            {"document_pairs", s.document_pairs},
            {"mean_match_length", s.mean_length},
            {"marked_tokens", s.marked_tokens},
            {"total_tokens", s.total_tokens},
            {"marked_fraction", s.marked_fraction},
            {"index_postings", s.total_postings},
            {"dropped_keys", s.dropped_keys}};
}

}  // namespace diachron::reuse
