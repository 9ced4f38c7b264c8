#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace diachron::lm {

using WordId = std::uint32_t;
using Sentence = std::vector<std::string>;

inline constexpr int kMaxOrder = 10;
inline constexpr std::string_view kUnk = "<unk>";
inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";

enum class Smoothing {
    KneserNey,  // interpolated modified Kneser-Ney
    None,       // maximum likelihood, no backoff mass; for hand-checkable cases
};

struct TrainOptions {
    int order = 5;
    Smoothing smoothing = Smoothing::KneserNey;
    // Words seen fewer times are mapped to <unk>.
    std::size_t min_count = 2;
    // Pad each sentence with <s> ... </s>.
    bool sentence_boundaries = true;
    double fallback_discount = 0.75;
    // Closed vocabulary. When non-empty it replaces the min_count cutoff;
    // other words map to <unk>. Models that will be compared by perplexity
    // need the same vocabulary, or OOV rates differ between them.
    std::vector<std::string> vocabulary;
};

// Words occurring at least `min_count` times, sorted.
std::vector<std::string> vocabulary_cutoff(std::span<const Sentence> sentences, std::size_t min_count);

// Fixed-capacity n-gram key, oldest word first.
struct NgramKey {
    std::array<WordId, kMaxOrder> ids{};
    std::uint8_t size = 0;

    std::span<const WordId> view() const { return {ids.data(), size}; }
    friend bool operator==(const NgramKey& a, const NgramKey& b) {
        return a.size == b.size && std::equal(a.ids.begin(), a.ids.begin() + a.size, b.ids.begin());
    }
};

struct NgramKeyHash {
    std::size_t operator()(const NgramKey& k) const noexcept;
};

NgramKey make_key(std::span<const WordId> ids);

struct LogProbs {
    double log10_sum = 0.0;
    std::size_t count = 0;  // scored events, including </s>

    LogProbs& operator+=(const LogProbs& o) {
        log10_sum += o.log10_sum;
        count += o.count;
        return *this;
    }
    // Throws DomainError when nothing was scored.
    double perplexity() const;
};

// Backoff n-gram model. Interpolated Kneser-Ney estimates are stored in
// backoff form (ARPA semantics), so scoring and the ARPA file agree exactly.
class NgramModel {
public:
    struct Entry {
        double log10_prob = 0.0;
        double log10_bow = 0.0;
        bool has_bow = false;
    };

    int order() const noexcept { return order_; }
    bool sentence_boundaries() const noexcept { return boundaries_; }
    bool has_unk() const noexcept { return has_unk_; }

    // All ids 0..vocab_size()-1; <unk> (when present), <s> and </s> come first.
    std::size_t vocab_size() const noexcept { return words_.size(); }
    const std::string& word(WordId id) const { return words_.at(id); }
    // Unknown words map to <unk>, or to npos without one.
    WordId id_of(std::string_view word) const;
    static constexpr WordId npos = static_cast<WordId>(-1);

    // Ids a sentence can produce: everything except <s>.
    std::vector<WordId> predictable() const;

    // log10 P(w | context), context oldest first (only the last order-1 ids
    // are used). -infinity when the model gives the word no mass.
    double log10_prob(std::span<const WordId> context, WordId w) const;

    LogProbs score_sentence(std::span<const std::string> sentence) const;
    LogProbs score(std::span<const Sentence> sentences) const;

    // n-grams of one order (1-based), unordered.
    const std::unordered_map<NgramKey, Entry, NgramKeyHash>& table(int n) const { return tables_.at(n - 1); }
    std::size_t ngram_count(int n) const { return tables_.at(n - 1).size(); }

    // Discounts (D1, D2, D3+) used per order; empty for unsmoothed models.
    const std::vector<std::array<double, 3>>& discounts() const noexcept { return discounts_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    void write_arpa(std::ostream& out) const;
    void save_arpa(const std::filesystem::path& path) const;
    static NgramModel read_arpa(std::istream& in);
    static NgramModel load_arpa(const std::filesystem::path& path);

private:
    friend NgramModel train_lm(std::span<const Sentence> sentences, const TrainOptions& options);

    void index_words();
    std::vector<WordId> to_ids(std::span<const std::string> sentence) const;

    int order_ = 0;
    bool boundaries_ = true;
    bool has_unk_ = false;
    std::vector<std::string> words_;
    std::unordered_map<std::string, WordId> ids_;
    std::vector<std::unordered_map<NgramKey, Entry, NgramKeyHash>> tables_;
    std::vector<std::array<double, 3>> discounts_;
    std::vector<std::string> warnings_;
};

// Throws DomainError on empty training text. When no sentence is long enough
// for the requested order, the order drops to the longest estimable one and
// a warning is recorded on the model.
NgramModel train_lm(std::span<const Sentence> sentences, const TrainOptions& options = {});

// exp of the mean negative log-probability per scored event. Throws
// DomainError for an empty token sequence or a zero-probability event.
double perplexity(const NgramModel& model, std::span<const Sentence> sentences);

}  // namespace diachron::lm
