#include "diachron/normalize.hpp"

#include "diachron/utf8.hpp"

namespace diachron {
namespace {

constexpr char32_t kAlif = 0x0627;
constexpr char32_t kYa = 0x064A;
constexpr char32_t kHa = 0x0647;
constexpr char32_t kTatweel = 0x0640;

bool in(char32_t cp, char32_t lo, char32_t hi) noexcept { return cp >= lo && cp <= hi; }

}  // namespace

bool is_space(char32_t cp) noexcept {
    return in(cp, 0x09, 0x0D) || cp == 0x20 || cp == 0x85 || cp == 0xA0 || cp == 0x1680 ||
           in(cp, 0x2000, 0x200A) || cp == 0x2028 || cp == 0x2029 || cp == 0x202F ||
           cp == 0x205F || cp == 0x3000;
}

bool is_punctuation(char32_t cp) noexcept {
    if (cp < 0x80) {
        return in(cp, 0x21, 0x2F) || in(cp, 0x3A, 0x40) || in(cp, 0x5B, 0x60) || in(cp, 0x7B, 0x7E);
    }
    switch (cp) {
        case 0x00A1: case 0x00A7: case 0x00AB: case 0x00B6: case 0x00B7: case 0x00BB: case 0x00BF:
        case 0x060C: case 0x060D: case 0x061B: case 0x061E: case 0x061F: case 0x06D4:
        case 0xFD3E: case 0xFD3F:
            return true;
        default:
            break;
    }
    return in(cp, 0x066A, 0x066D) || in(cp, 0x2010, 0x2027) || in(cp, 0x2030, 0x205E) ||
           in(cp, 0x3001, 0x3003) || in(cp, 0x3008, 0x3011) || in(cp, 0xFE10, 0xFE19) ||
           in(cp, 0xFE30, 0xFE4F) || in(cp, 0xFE50, 0xFE6B) || in(cp, 0xFF01, 0xFF0F) ||
           in(cp, 0xFF1A, 0xFF20);
}

bool is_sentence_final(char32_t cp) noexcept {
    switch (cp) {
        case '.': case '!': case '?':
        case 0x061F: case 0x06D4: case 0x2026: case 0x203C: case 0x2047: case 0x2048:
        case 0x2049: case 0x3002: case 0xFF01: case 0xFF0E: case 0xFF1F:
            return true;
        default:
            return false;
    }
}

bool is_arabic_diacritic(char32_t cp) noexcept {
    return in(cp, 0x0610, 0x061A) || in(cp, 0x064B, 0x065F) || cp == 0x0670 ||
           in(cp, 0x06D6, 0x06DC) || in(cp, 0x06DF, 0x06E4) || cp == 0x06E7 || cp == 0x06E8 ||
           in(cp, 0x06EA, 0x06ED);
}

std::string normalize_text(std::string_view raw, const NormalizationTable& table) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    std::size_t pos = 0;
    while (pos < raw.size()) {
        char32_t cp = utf8::decode(raw, pos);
        if (is_space(cp)) {
            pending_space = true;
            continue;
        }
        if (table.strip_diacritics && is_arabic_diacritic(cp)) continue;
        if (table.strip_tatweel && cp == kTatweel) continue;
        if (table.unify_alif && (cp == 0x0622 || cp == 0x0623 || cp == 0x0625 || cp == 0x0671))
            cp = kAlif;
        else if (table.alif_maqsura_to_ya && cp == 0x0649)
            cp = kYa;
        else if (table.ta_marbuta_to_ha && cp == 0x0629)
            cp = kHa;
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        utf8::append(out, cp);
    }
    return out;
}

std::vector<Token> tokenize(std::string_view normalized) {
    std::vector<Token> tokens;
    std::size_t pos = 0;
    std::size_t start = 0;
    bool in_token = false;
    auto flush = [&](std::size_t end) {
        if (in_token) tokens.push_back(Token{std::string(normalized.substr(start, end - start)), start});
        in_token = false;
    };
    while (pos < normalized.size()) {
        const std::size_t here = pos;
        const char32_t cp = utf8::decode(normalized, pos);
        if (is_space(cp) || is_punctuation(cp)) {
            flush(here);
            if (is_sentence_final(cp) && !tokens.empty()) tokens.back().sentence_final = true;
            continue;
        }
        if (!in_token) {
            in_token = true;
            start = here;
        }
    }
    flush(normalized.size());
    return tokens;
}

}  // namespace diachron
