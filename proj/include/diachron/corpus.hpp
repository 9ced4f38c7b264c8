#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace diachron {

// Opaque, non-empty document identifier. Ordered lexicographically, which is
// the ordering every sorted output in the toolkit uses.
class DocumentId {
public:
    explicit DocumentId(std::string id);

    const std::string& str() const noexcept { return id_; }

    friend auto operator<=>(const DocumentId&, const DocumentId&) = default;
    friend bool operator==(const DocumentId&, const DocumentId&) = default;

private:
    std::string id_;
};

enum class DatingStatus { Dated, Undated, AutoDated };

std::string to_string(DatingStatus s);
DatingStatus dating_status_from_string(const std::string& s);

// Inclusive range of Hijri years used as a dating class.
struct PeriodBin {
    std::string label;
    int start_h = 0;
    int end_h = 0;

    bool contains(int year_h) const noexcept { return year_h >= start_h && year_h <= end_h; }
    int midpoint() const noexcept { return start_h + (end_h - start_h) / 2; }

    friend bool operator==(const PeriodBin&, const PeriodBin&) = default;
};

struct Metadata {
    DocumentId doc_id;
    std::string title;
    std::string author;
    std::optional<std::int64_t> author_code;
    std::optional<int> dod_hijri;
    std::optional<int> dod_ce;
    std::optional<std::string> genre;
    std::size_t word_count = 0;
    DatingStatus dating_status = DatingStatus::Undated;
    // Set together with DatingStatus::AutoDated.
    std::optional<PeriodBin> auto_bin;

    explicit Metadata(DocumentId id) : doc_id(std::move(id)) {}

    // Sets dod_hijri, derives dod_ce and marks the record Dated.
    void set_death_year(int year_h);
};

struct Token {
    std::string surface;
    // Byte offset into the normalized text.
    std::size_t char_offset = 0;
    // Followed by sentence-final punctuation in the source text.
    bool sentence_final = false;
};

struct Document {
    Metadata meta;
    std::string raw_text;
    std::vector<Token> tokens;
    std::optional<std::vector<std::string>> lemmas;

    // Normalizes and tokenizes `raw`; word_count is set to the token count.
    static Document from_text(Metadata meta, std::string raw);

    // The year used for chronological analyses: the Hijri death year for
    // Dated documents, the auto-assigned bin midpoint for AutoDated ones when
    // `include_auto` is set, otherwise nothing.
    std::optional<int> effective_year(bool include_auto = false) const;

    // Lemma at position i when `use_lemmas` and lemmas are present, otherwise
    // the surface form.
    const std::string& unit(std::size_t i, bool use_lemmas) const;

    // Token units split into sentences at sentence-final punctuation.
    std::vector<std::vector<std::string>> sentences(bool use_lemmas = false) const;
};

}  // namespace diachron
