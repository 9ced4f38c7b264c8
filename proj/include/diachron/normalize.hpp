#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "diachron/corpus.hpp"

namespace diachron {

// Letter classes folded by normalize_text. All rules are on by default.
struct NormalizationTable {
    bool unify_alif = true;          // U+0622 U+0623 U+0625 U+0671 -> U+0627
    bool alif_maqsura_to_ya = true;  // U+0649 -> U+064A
    bool ta_marbuta_to_ha = true;    // U+0629 -> U+0647
    bool strip_diacritics = true;    // harakat, tanwin, shadda, sukun, dagger alif, Quranic marks
    bool strip_tatweel = true;       // U+0640
};

bool is_space(char32_t cp) noexcept;
bool is_punctuation(char32_t cp) noexcept;
bool is_sentence_final(char32_t cp) noexcept;
bool is_arabic_diacritic(char32_t cp) noexcept;

// Deterministic and idempotent. Whitespace runs collapse to one ASCII space
// and leading/trailing whitespace is dropped.
std::string normalize_text(std::string_view raw, const NormalizationTable& table = {});

// Splits on whitespace and punctuation, discarding punctuation. Offsets are
// byte offsets into `normalized`.
std::vector<Token> tokenize(std::string_view normalized);

}  // namespace diachron
