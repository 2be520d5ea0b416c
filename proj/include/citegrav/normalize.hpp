#pragma once

#include <string>
#include <string_view>

namespace citegrav {

namespace detail {

// Folds one Latin-1 Supplement / Latin Extended-A codepoint to bare ASCII.
// Returns an empty view for codepoints we do not fold.
inline std::string_view fold_latin(char32_t cp) {
    switch (cp) {
        case U'Æ': case U'æ': return "ae";
        case U'ß': return "ss";
        case U'Œ': case U'œ': return "oe";
        case U'Ð': case U'ð': case U'Đ': case U'đ': return "d";
        case U'Þ': case U'þ': return "th";
        default: break;
    }
    if ((cp >= U'À' && cp <= U'Å') || (cp >= U'à' && cp <= U'å') ||
        (cp >= U'Ā' && cp <= U'ą'))
        return "a";
    if (cp == U'Ç' || cp == U'ç' || (cp >= U'Ć' && cp <= U'č')) return "c";
    if (cp >= U'Ď' && cp <= U'đ') return "d";
    if ((cp >= U'È' && cp <= U'Ë') || (cp >= U'è' && cp <= U'ë') ||
        (cp >= U'Ē' && cp <= U'ě'))
        return "e";
    if (cp >= U'Ĝ' && cp <= U'ģ') return "g";
    if (cp >= U'Ĥ' && cp <= U'ħ') return "h";
    if ((cp >= U'Ì' && cp <= U'Ï') || (cp >= U'ì' && cp <= U'ï') ||
        (cp >= U'Ĩ' && cp <= U'ı'))
        return "i";
    if (cp == U'Ĵ' || cp == U'ĵ') return "j";
    if (cp >= U'Ķ' && cp <= U'ĸ') return "k";
    if (cp >= U'Ĺ' && cp <= U'ł') return "l";
    if (cp == U'Ñ' || cp == U'ñ' || (cp >= U'Ń' && cp <= U'ŋ')) return "n";
    if ((cp >= U'Ò' && cp <= U'Ö') || cp == U'Ø' ||
        (cp >= U'ò' && cp <= U'ö') || cp == U'ø' ||
        (cp >= U'Ō' && cp <= U'ő'))
        return "o";
    if (cp >= U'Ŕ' && cp <= U'ř') return "r";
    if (cp >= U'Ś' && cp <= U'š') return "s";
    if (cp >= U'Ţ' && cp <= U'ŧ') return "t";
    if ((cp >= U'Ù' && cp <= U'Ü') || (cp >= U'ù' && cp <= U'ü') ||
        (cp >= U'Ũ' && cp <= U'ų'))
        return "u";
    if (cp == U'Ŵ' || cp == U'ŵ') return "w";
    if (cp == U'Ý' || cp == U'ý' || cp == U'ÿ' ||
        (cp >= U'Ŷ' && cp <= U'Ÿ'))
        return "y";
    if (cp >= U'Ź' && cp <= U'ž') return "z";
    return {};
}

}  // namespace detail

// Canonical key form for city and country names: ASCII lowercased, common
// Latin diacritics stripped, outer whitespace trimmed, inner whitespace runs
// collapsed to a single space. Idempotent. Bytes outside the folded ranges
// pass through unchanged.
inline std::string normalize_name(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    auto push = [&](std::string_view piece) {
        for (char c : piece) {
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
                if (!out.empty()) pending_space = true;
                continue;
            }
            if (pending_space) {
                out.push_back(' ');
                pending_space = false;
            }
            out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
        }
    };
    for (std::size_t i = 0; i < s.size();) {
        unsigned char b = static_cast<unsigned char>(s[i]);
        if (b < 0x80) {
            push(s.substr(i, 1));
            ++i;
            continue;
        }
        // Two-byte UTF-8 sequences cover all the codepoints we fold.
        if ((b & 0xE0) == 0xC0 && i + 1 < s.size() &&
            (static_cast<unsigned char>(s[i + 1]) & 0xC0) == 0x80) {
            char32_t cp = static_cast<char32_t>(((b & 0x1F) << 6) |
                                                (static_cast<unsigned char>(s[i + 1]) & 0x3F));
            std::string_view folded = detail::fold_latin(cp);
            if (!folded.empty())
                push(folded);
            else
                push(s.substr(i, 2));
            i += 2;
            continue;
        }
        push(s.substr(i, 1));
        ++i;
    }
    return out;
}

}  // namespace citegrav
