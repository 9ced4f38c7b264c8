#include "diachron/reuse/boilerplate.hpp"

#include <algorithm>

#include "diachron/error.hpp"
#include "diachron/parallel.hpp"

namespace diachron::reuse {

std::size_t BoilerplateMask::marked_count() const {
    return static_cast<std::size_t>(std::count(marked.begin(), marked.end(), true));
}

std::vector<std::pair<std::size_t, std::size_t>> BoilerplateMask::ranges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t i = 0;
    while (i < marked.size()) {
        if (!marked[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < marked.size() && marked[j]) ++j;
        out.emplace_back(i, j);
        i = j;
    }
    return out;
}

namespace {

std::uint64_t sequence_fingerprint(const std::uint32_t* codes, std::size_t len) {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (std::size_t j = 0; j < len; ++j) h = mix64(h ^ (codes[j] + 0x9e3779b97f4a7c15ULL * (j + 1)));
    return h;
}

}  // namespace

BoilerplateResult mark_boilerplate(const HashedCorpus& corpus, const BoilerplateOptions& options) {
    if (options.passage_len == 0) throw DomainError("boilerplate passage_len must be positive");
    const std::size_t n_docs = corpus.codes.size();
    const std::size_t len = options.passage_len;

    std::vector<std::vector<std::uint64_t>> fps(n_docs);
    parallel_for(
        n_docs, options.workers,
        [&](std::size_t d) {
            const auto& c = corpus.codes[d];
            if (c.size() < len) return;
            fps[d].resize(c.size() - len + 1);
            for (std::size_t i = 0; i + len <= c.size(); ++i) fps[d][i] = sequence_fingerprint(c.data() + i, len);
        },
        4);

    std::size_t total_windows = 0;
    for (const auto& f : fps) total_windows += f.size();
    std::vector<std::uint64_t> all;
    all.reserve(total_windows);
    for (const auto& f : fps) all.insert(all.end(), f.begin(), f.end());
    std::sort(all.begin(), all.end());

    std::vector<std::uint64_t> frequent;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j] == all[i]) ++j;
        if (j - i >= options.recurrence_threshold) frequent.push_back(all[i]);
        i = j;
    }
    std::vector<std::uint64_t>().swap(all);

    BoilerplateResult result;
    result.frequent_sequences = frequent.size();
    result.masks.reserve(n_docs);
    for (std::size_t d = 0; d < n_docs; ++d)
        result.masks.push_back({corpus.ids[d], std::vector<bool>(corpus.codes[d].size(), false)});
    parallel_for(
        n_docs, options.workers,
        [&](std::size_t d) {
            auto& marked = result.masks[d].marked;
            for (std::size_t i = 0; i < fps[d].size(); ++i)
                if (std::binary_search(frequent.begin(), frequent.end(), fps[d][i]))
                    std::fill(marked.begin() + static_cast<std::ptrdiff_t>(i),
                              marked.begin() + static_cast<std::ptrdiff_t>(i + len), true);
        },
        4);
    for (const auto& m : result.masks) {
        result.marked_tokens += m.marked_count();
        result.total_tokens += m.marked.size();
    }
    return result;
}

BoilerplateResult mark_boilerplate(std::span<const Document> corpus, const LetterFrequencyTable& table,
                                   const BoilerplateOptions& options) {
    return mark_boilerplate(hash_corpus(corpus, table, false, options.workers), options);
}

std::vector<BoilerplateMask> empty_masks(const HashedCorpus& corpus) {
    std::vector<BoilerplateMask> masks;
    masks.reserve(corpus.ids.size());
    for (std::size_t d = 0; d < corpus.ids.size(); ++d)
        masks.push_back({corpus.ids[d], std::vector<bool>(corpus.codes[d].size(), false)});
    return masks;
}

nlohmann::json to_json(const BoilerplateMask& mask) {
    nlohmann::json ranges = nlohmann::json::array();
    for (const auto& [s, e] : mask.ranges()) ranges.push_back({s, e});
    return {{"doc_id", mask.doc_id.str()},
            {"token_count", mask.marked.size()},
            {"marked_tokens", mask.marked_count()},
            {"ranges", ranges}};
}

BoilerplateMask mask_from_json(const nlohmann::json& j) {
    BoilerplateMask m{DocumentId(j.at("doc_id").get<std::string>()),
                      std::vector<bool>(j.at("token_count").get<std::size_t>(), false)};
    for (const auto& r : j.at("ranges")) {
        const auto s = r.at(0).get<std::size_t>();
        const auto e = r.at(1).get<std::size_t>();
        if (s > e || e > m.marked.size()) throw DomainError("boilerplate range out of bounds for " + m.doc_id.str());
        std::fill(m.marked.begin() + static_cast<std::ptrdiff_t>(s), m.marked.begin() + static_cast<std::ptrdiff_t>(e),
                  true);
    }
    return m;
}

}  // namespace diachron::reuse
