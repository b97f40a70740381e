#pragma once

#include <cstdint>
#include <string>
#include <string_view>

// Minimal UTF-8 / codepoint utilities. No locale dependency: everything here
// is table-driven so results are identical across machines.

namespace vitd::unicode {

inline constexpr char32_t kReplacement = 0xFFFD;

// Decodes the codepoint starting at `pos`; advances `pos` past it.
// Malformed sequences consume one byte and decode as U+FFFD.
inline char32_t decode(std::string_view s, std::size_t& pos) {
    const auto byte = [&](std::size_t i) -> std::uint8_t {
        return static_cast<std::uint8_t>(s[i]);
    };
    const std::uint8_t b0 = byte(pos);
    if (b0 < 0x80) {
        ++pos;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++pos;
        return kReplacement;
    }
    if (pos + len > s.size()) {
        ++pos;
        return kReplacement;
    }
    for (int i = 1; i < len; ++i) {
        const std::uint8_t bi = byte(pos + i);
        if ((bi & 0xC0) != 0x80) {
            ++pos;
            return kReplacement;
        }
        cp = (cp << 6) | (bi & 0x3F);
    }
    // Reject overlong encodings and surrogates.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && cp < 0x10000) || (cp >= 0xD800 && cp <= 0xDFFF) ||
        cp > 0x10FFFF) {
        ++pos;
        return kReplacement;
    }
    pos += len;
    return cp;
}

inline void encode(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Unicode White_Space property (current table, excluding deprecated U+180E).
inline bool is_whitespace(char32_t cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
        case 0x20: case 0x85: case 0xA0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

namespace detail {

struct Range {
    char32_t lo;
    char32_t hi;
};

// Letters, digits, and combining marks for the scripts this pipeline meets in
// practice (Latin incl. extensions, Greek, Cyrillic, Hebrew, Arabic incl.
// the supplement used by Pashto, the Indic blocks incl. Bangla and Tamil,
// kana, CJK). Ranges carve out the punctuation and currency/symbol
// codepoints embedded in those blocks. Everything unlisted is a separator.
inline constexpr Range kWordRanges[] = {
    {0x0030, 0x0039},  // ASCII digits
    {0x0041, 0x005A},  // A-Z
    {0x0061, 0x007A},  // a-z
    {0x00AA, 0x00AA}, {0x00B5, 0x00B5}, {0x00BA, 0x00BA},
    {0x00C0, 0x00D6}, {0x00D8, 0x00F6}, {0x00F8, 0x02C1},  // Latin-1..IPA
    {0x02C6, 0x02D1}, {0x02E0, 0x02E4},                     // modifier letters
    {0x0300, 0x036F},  // combining diacritical marks
    {0x0386, 0x0386}, {0x0388, 0x03FF},                     // Greek
    {0x0400, 0x0481}, {0x048A, 0x052F},                     // Cyrillic
    {0x0591, 0x05BD}, {0x05D0, 0x05EA},                     // Hebrew
    {0x0620, 0x065F}, {0x0660, 0x0669},                     // Arabic letters, digits
    {0x066E, 0x06D3}, {0x06D5, 0x06DC}, {0x06DF, 0x06E8},
    {0x06EA, 0x06FF},                                       // Arabic extras
    {0x0750, 0x077F},  // Arabic supplement (Pashto)
    {0x0900, 0x0963}, {0x0966, 0x096F}, {0x0971, 0x097F},   // Devanagari
    {0x0980, 0x09F1}, {0x09F4, 0x09F9}, {0x09FC, 0x09FC},   // Bangla
    {0x0A00, 0x0B7F},  // Gurmukhi, Gujarati, Oriya
    {0x0B80, 0x0BF2},  // Tamil (letters, marks, numerals)
    {0x0C00, 0x0DFF},  // Telugu, Kannada, Malayalam, Sinhala
    {0x10A0, 0x10FF},  // Georgian
    {0x1E00, 0x1FFF},  // Latin extended additional, Greek extended
    {0x3040, 0x30FF},  // kana
    {0x4E00, 0x9FFF},  // CJK unified
    {0xA870, 0xA8FF},  // Devanagari extended
    {0xAC00, 0xD7A3},  // Hangul syllables
};

}  // namespace detail

// True for codepoints that belong inside a token: letters, digits,
// combining marks. Punctuation, symbols, and whitespace separate tokens.
inline bool is_word_char(char32_t cp) {
    for (const auto& r : detail::kWordRanges) {
        if (cp < r.lo) return false;
        if (cp <= r.hi) return true;
    }
    return false;
}

// Compact simple-lowercase mapping: ASCII, Latin-1, Latin Extended-A/B pairs,
// Greek, Cyrillic. Caseless scripts (Bangla, Arabic, Tamil...) pass through.
inline char32_t to_lower(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
    if (cp == 0x0130) return 'i';   // dotted capital I
    if (cp == 0x0178) return 0xFF;  // Y with diaeresis
    if (cp == 0x018F) return 0x259; // schwa (Azerbaijani)
    if ((cp >= 0x0100 && cp <= 0x0137) || (cp >= 0x014A && cp <= 0x0177)) {
        return (cp % 2 == 0) ? cp + 1 : cp;
    }
    if ((cp >= 0x0139 && cp <= 0x0148) || (cp >= 0x0179 && cp <= 0x017E)) {
        return (cp % 2 == 1) ? cp + 1 : cp;
    }
    if (cp >= 0x0391 && cp <= 0x03A9 && cp != 0x03A2) return cp + 0x20;  // Greek
    if (cp >= 0x0410 && cp <= 0x042F) return cp + 0x20;                  // Cyrillic
    if (cp >= 0x0400 && cp <= 0x040F) return cp + 0x50;
    return cp;
}

// Strips leading/trailing Unicode whitespace.
inline std::string_view trim(std::string_view s) {
    std::size_t begin = 0;
    std::size_t last_end = 0;
    std::size_t pos = 0;
    bool seen_content = false;
    while (pos < s.size()) {
        const std::size_t start = pos;
        const char32_t cp = decode(s, pos);
        if (!is_whitespace(cp)) {
            if (!seen_content) begin = start;
            seen_content = true;
            last_end = pos;
        }
    }
    if (!seen_content) return {};
    return s.substr(begin, last_end - begin);
}

}  // namespace vitd::unicode
