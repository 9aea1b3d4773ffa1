#pragma once

#include <cstddef>
#include <string_view>

namespace quadkit::unicode {

inline bool is_space(char32_t cp) {
    switch (cp) {
        case 0x09:
        case 0x0A:
        case 0x0B:
        case 0x0C:
        case 0x0D:
        case 0x20:
        case 0x85:    // NEL
        case 0xA0:    // NBSP
        case 0x1680:  // ogham space mark
        case 0x2028:  // line separator
        case 0x2029:  // paragraph separator
        case 0x202F:  // narrow no-break space
        case 0x205F:  // medium mathematical space
        case 0x3000:  // ideographic space
            return true;
        default: return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Decodes one codepoint; malformed bytes decode as themselves with length 1.
inline std::size_t decode(std::string_view text, std::size_t pos, char32_t& cp) {
    unsigned char lead = static_cast<unsigned char>(text[pos]);
    std::size_t len = 0;
    if (lead < 0x80) {
        cp = lead;
        return 1;
    }
    if ((lead & 0xE0) == 0xC0) {
        len = 2;
        cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        len = 3;
        cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        len = 4;
        cp = lead & 0x07;
    } else {
        cp = lead;
        return 1;
    }
    if (pos + len > text.size()) {
        cp = lead;
        return 1;
    }
    char32_t value = cp;
    for (std::size_t i = 1; i < len; ++i) {
        unsigned char cont = static_cast<unsigned char>(text[pos + i]);
        if ((cont & 0xC0) != 0x80) {
            cp = lead;
            return 1;
        }
        value = (value << 6) | (cont & 0x3F);
    }
    cp = value;
    return len;
}

inline std::size_t codepoint_length(std::string_view text) {
    std::size_t count = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        char32_t cp = 0;
        pos += decode(text, pos, cp);
        ++count;
    }
    return count;
}

}  // namespace quadkit::unicode
