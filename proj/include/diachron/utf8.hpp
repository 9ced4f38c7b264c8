#pragma once

#include <string>
#include <string_view>

namespace diachron::utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

// Decodes one code point starting at `pos` and advances `pos`. Malformed
// sequences decode to U+FFFD and consume a single byte.
char32_t decode(std::string_view s, std::size_t& pos) noexcept;

void append(std::string& out, char32_t cp);

std::u32string to_u32(std::string_view s);
std::string from_u32(std::u32string_view s);

std::size_t length(std::string_view s) noexcept;

}  // namespace diachron::utf8
