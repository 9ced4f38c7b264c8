#include "diachron/reuse/index.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "diachron/error.hpp"
#include "diachron/parallel.hpp"

namespace diachron::reuse {

namespace {

constexpr char kMagic[8] = {'D', 'C', 'H', 'S', 'G', 'I', '0', '1'};

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw std::runtime_error("truncated skip-gram index file");
    return v;
}

bool entry_less(const IndexEntry& a, const IndexEntry& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.posting < b.posting;
}

}  // namespace

std::size_t SkipGramIndex::total_postings() const {
    std::size_t n = 0;
    for (const auto& p : partitions) n += p.size();
    return n;
}

std::size_t SkipGramIndex::key_count() const {
    std::size_t n = 0;
    for (const auto& p : partitions)
        for (std::size_t i = 0; i < p.size(); ++i)
            if (i == 0 || p[i].key != p[i - 1].key) ++n;
    return n;
}

std::size_t SkipGramIndex::partition_of(std::uint64_t key) const {
    return partitions.empty() ? 0 : static_cast<std::size_t>(mix64(key) % partitions.size());
}

std::vector<Posting> SkipGramIndex::postings(std::uint64_t key) const {
    std::vector<Posting> out;
    if (partitions.empty()) return out;
    const auto& part = partitions[partition_of(key)];
    auto lo = std::lower_bound(part.begin(), part.end(), key,
                               [](const IndexEntry& e, std::uint64_t k) { return e.key < k; });
    for (; lo != part.end() && lo->key == key; ++lo) out.push_back(lo->posting);
    return out;
}

void SkipGramIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(kMagic, sizeof kMagic);
    put<std::uint64_t>(out, doc_ids.size());
    for (std::size_t d = 0; d < doc_ids.size(); ++d) {
        const auto& id = doc_ids[d].str();
        put<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
        out.write(id.data(), static_cast<std::streamsize>(id.size()));
        put<std::uint32_t>(out, doc_lengths[d]);
    }
    put<std::uint64_t>(out, dropped_keys);
    put<std::uint64_t>(out, dropped_postings);
    put<std::uint64_t>(out, posting_cap);
    put<std::uint64_t>(out, marked_tokens);
    put<std::uint64_t>(out, total_tokens);
    put<std::uint64_t>(out, partitions.size());
    for (const auto& p : partitions) {
        put<std::uint64_t>(out, p.size());
        for (const auto& e : p) {
            put(out, e.key);
            put(out, e.posting.doc);
            put(out, e.posting.pos);
        }
    }
}

SkipGramIndex SkipGramIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError(path.string());
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error(path.string() + " is not a skip-gram index");
    SkipGramIndex idx;
    const auto n_docs = get<std::uint64_t>(in);
    for (std::uint64_t d = 0; d < n_docs; ++d) {
        std::string id(get<std::uint32_t>(in), '\0');
        in.read(id.data(), static_cast<std::streamsize>(id.size()));
        idx.doc_ids.emplace_back(std::move(id));
        idx.doc_lengths.push_back(get<std::uint32_t>(in));
    }
    idx.dropped_keys = get<std::uint64_t>(in);
    idx.dropped_postings = get<std::uint64_t>(in);
    idx.posting_cap = get<std::uint64_t>(in);
    idx.marked_tokens = get<std::uint64_t>(in);
    idx.total_tokens = get<std::uint64_t>(in);
    idx.partitions.resize(get<std::uint64_t>(in));
    for (auto& p : idx.partitions) {
        p.resize(get<std::uint64_t>(in));
        for (auto& e : p) {
            e.key = get<std::uint64_t>(in);
            e.posting.doc = get<std::uint32_t>(in);
            e.posting.pos = get<std::uint32_t>(in);
        }
    }
    return idx;
}

SkipGramIndex build_index(const HashedCorpus& corpus, std::span<const BoilerplateMask> masks,
                          const IndexOptions& options) {
    const std::size_t n_docs = corpus.codes.size();
    if (masks.size() != n_docs) throw DomainError("boilerplate masks do not match the corpus");
    for (std::size_t d = 0; d < n_docs; ++d)
        if (masks[d].marked.size() != corpus.codes[d].size() || !(masks[d].doc_id == corpus.ids[d]))
            throw DomainError("boilerplate mask does not match document " + corpus.ids[d].str());

    SkipGramIndex idx;
    idx.doc_ids = corpus.ids;
    idx.posting_cap = options.posting_cap;
    for (std::size_t d = 0; d < n_docs; ++d) {
        idx.doc_lengths.push_back(static_cast<std::uint32_t>(corpus.codes[d].size()));
        idx.marked_tokens += masks[d].marked_count();
        idx.total_tokens += corpus.codes[d].size();
    }
    const std::size_t n_parts = std::max(1u, options.partitions);
    idx.partitions.resize(n_parts);

    // Pass 1 counts entries per (document, partition) so pass 2 can write each
    // document's keys straight into its final slots.
    std::vector<std::uint32_t> counts(n_docs * n_parts, 0);
    auto for_each_key = [&](std::size_t d, auto&& emit) {
        const auto& codes = corpus.codes[d];
        std::array<std::uint64_t, 4> keys{};
        for (std::size_t i = 0; i + kWindow <= codes.size(); ++i) {
            const std::size_t k = skipgram_keys_at(codes, i, &masks[d].marked, corpus.exact_keys, keys);
            for (std::size_t j = 0; j < k; ++j) emit(keys[j], static_cast<std::uint32_t>(i));
        }
    };
    parallel_for(
        n_docs, options.workers,
        [&](std::size_t d) {
            for_each_key(d, [&](std::uint64_t key, std::uint32_t) { ++counts[d * n_parts + idx.partition_of(key)]; });
        },
        4);

    std::vector<std::size_t> offsets(n_docs * n_parts, 0);
    for (std::size_t p = 0; p < n_parts; ++p) {
        std::size_t running = 0;
        for (std::size_t d = 0; d < n_docs; ++d) {
            offsets[d * n_parts + p] = running;
            running += counts[d * n_parts + p];
        }
        idx.partitions[p].resize(running);
    }
    std::vector<std::uint32_t>().swap(counts);

    parallel_for(
        n_docs, options.workers,
        [&](std::size_t d) {
            for_each_key(d, [&](std::uint64_t key, std::uint32_t pos) {
                const std::size_t p = idx.partition_of(key);
                idx.partitions[p][offsets[d * n_parts + p]++] = {key, {static_cast<std::uint32_t>(d), pos}};
            });
        },
        4);
    std::vector<std::size_t>().swap(offsets);

    std::vector<std::size_t> dropped_keys(n_parts, 0), dropped_postings(n_parts, 0);
    parallel_for(n_parts, options.workers, [&](std::size_t p) {
        auto& part = idx.partitions[p];
        std::sort(part.begin(), part.end(), entry_less);
        // A window whose hashes repeat can emit the same key twice.
        part.erase(std::unique(part.begin(), part.end(),
                               [](const IndexEntry& a, const IndexEntry& b) {
                                   return a.key == b.key && a.posting == b.posting;
                               }),
                   part.end());
        std::size_t write = 0;
        for (std::size_t i = 0; i < part.size();) {
            std::size_t j = i;
            while (j < part.size() && part[j].key == part[i].key) ++j;
            if (j - i > options.posting_cap) {
                ++dropped_keys[p];
                dropped_postings[p] += j - i;
            } else {
                for (std::size_t k = i; k < j; ++k) part[write++] = part[k];
            }
            i = j;
        }
        part.resize(write);
        part.shrink_to_fit();
    });
    for (std::size_t p = 0; p < n_parts; ++p) {
        idx.dropped_keys += dropped_keys[p];
        idx.dropped_postings += dropped_postings[p];
    }
    return idx;
}

SkipGramIndex build_index(std::span<const Document> corpus, const LetterFrequencyTable& table,
                          std::span<const BoilerplateMask> masks, const IndexOptions& options) {
    return build_index(hash_corpus(corpus, table, false, options.workers), masks, options);
}

}  // namespace diachron::reuse
