#include "examqa/detail/utf8.hpp"

namespace examqa::detail {

namespace {
constexpr char32_t kReplacement = 0xFFFD;
}

std::u32string decode_utf8(std::string_view bytes) {
    std::u32string out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    const std::size_t n = bytes.size();
    while (i < n) {
        const unsigned char b0 = static_cast<unsigned char>(bytes[i]);
        if (b0 < 0x80) {
            out.push_back(b0);
            ++i;
            continue;
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
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        if (i + len > n) {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        bool ok = true;
        for (int k = 1; k < len; ++k) {
            const unsigned char bk = static_cast<unsigned char>(bytes[i + k]);
            if ((bk & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (bk & 0x3F);
        }
        if (!ok || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        // Reject overlong encodings.
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000)) {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string encode_utf8(char32_t cp) {
    std::string out;
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
    return out;
}

std::string encode_utf8(std::u32string_view cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) out += encode_utf8(cp);
    return out;
}

namespace {

bool is_latin_letter(char32_t cp) {
    if ((cp >= U'A' && cp <= U'Z') || (cp >= U'a' && cp <= U'z')) return true;
    // Latin-1 letters minus multiplication/division signs.
    if (cp >= 0x00C0 && cp <= 0x00FF && cp != 0x00D7 && cp != 0x00F7) return true;
    // Latin Extended-A/B and additions (covers Polish, Croatian, Hungarian).
    if (cp >= 0x0100 && cp <= 0x024F) return true;
    if (cp >= 0x1E00 && cp <= 0x1EFF) return true;
    // Fullwidth Latin.
    if ((cp >= 0xFF21 && cp <= 0xFF3A) || (cp >= 0xFF41 && cp <= 0xFF5A)) return true;
    return false;
}

bool is_cyrillic_letter(char32_t cp) {
    return (cp >= 0x0400 && cp <= 0x04FF) || (cp >= 0x0500 && cp <= 0x052F);
}

bool is_arabic_letter(char32_t cp) {
    if (cp == 0x0640) return false;  // tatweel: joiner, not a letter
    if (cp >= 0x0621 && cp <= 0x064A) return true;
    if (cp >= 0x066E && cp <= 0x06D3) return true;
    if (cp >= 0x0750 && cp <= 0x077F) return true;   // Arabic Supplement
    if (cp >= 0xFB50 && cp <= 0xFDFF) return true;   // presentation forms A
    if (cp >= 0xFE70 && cp <= 0xFEFC) return true;   // presentation forms B
    return false;
}

bool is_han_letter(char32_t cp) {
    return (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
           (cp >= 0xF900 && cp <= 0xFAFF);
}

bool is_other_letter(char32_t cp) {
    // Greek, Hebrew, Devanagari, Hiragana/Katakana, Hangul.
    return (cp >= 0x0370 && cp <= 0x03FF) || (cp >= 0x0590 && cp <= 0x05FF) ||
           (cp >= 0x0900 && cp <= 0x097F) || (cp >= 0x3040 && cp <= 0x30FF) ||
           (cp >= 0xAC00 && cp <= 0xD7AF);
}

}  // namespace

bool is_alphabetic(char32_t cp) {
    return is_latin_letter(cp) || is_cyrillic_letter(cp) || is_arabic_letter(cp) ||
           is_han_letter(cp) || is_other_letter(cp);
}

Script script_of(char32_t cp) {
    if (is_latin_letter(cp)) return Script::latin;
    if (is_cyrillic_letter(cp)) return Script::cyrillic;
    if (is_arabic_letter(cp)) return Script::arabic;
    if (is_han_letter(cp)) return Script::han;
    return Script::other;
}

bool is_word_char(char32_t cp) {
    if (cp >= U'0' && cp <= U'9') return true;
    if (cp >= 0xFF10 && cp <= 0xFF19) return true;  // fullwidth digits
    if (cp >= 0x0660 && cp <= 0x0669) return true;  // Arabic-Indic digits
    if (cp == 0x0640) return true;                  // tatweel joins letters
    return is_alphabetic(cp);
}

bool is_ascii_space(char32_t cp) {
    return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' ||
           cp == U'\v';
}

std::string_view trim_ascii(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    auto is_sp = [](char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    };
    while (b < e && is_sp(s[b])) ++b;
    while (e > b && is_sp(s[e - 1])) --e;
    return s.substr(b, e - b);
}

const char* script_name(Script s) {
    switch (s) {
        case Script::latin: return "latin";
        case Script::cyrillic: return "cyrillic";
        case Script::arabic: return "arabic";
        case Script::han: return "han";
        case Script::other: return "other";
    }
    return "other";
}

}  // namespace examqa::detail
