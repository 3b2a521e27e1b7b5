#include "poetrat/text.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

namespace poetrat::text {

namespace {

struct CpRange {
    uint32_t lo;
    uint32_t hi;
};

#include "poetrat/unicode_tables.inc"

bool in_ranges(char32_t cp, const CpRange* first, const CpRange* last) {
    auto it = std::upper_bound(first, last, static_cast<uint32_t>(cp),
                               [](uint32_t v, const CpRange& r) { return v < r.lo; });
    if (it == first) return false;
    --it;
    return static_cast<uint32_t>(cp) <= it->hi;
}

}  // namespace

std::vector<char32_t> decode_utf8(std::string_view s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        unsigned char b0 = static_cast<unsigned char>(s[i]);
        char32_t cp = 0xFFFD;
        size_t len = 1;
        if (b0 < 0x80) {
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0 && i + 1 < s.size()) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0 && i + 2 < s.size()) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0 && i + 3 < s.size()) {
            len = 4;
            cp = b0 & 0x07;
        }
        if (len > 1) {
            for (size_t k = 1; k < len; ++k) {
                unsigned char bk = static_cast<unsigned char>(s[i + k]);
                if ((bk & 0xC0) != 0x80) {
                    cp = 0xFFFD;
                    len = 1;
                    break;
                }
                cp = (cp << 6) | (bk & 0x3F);
            }
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string encode_utf8(const std::vector<char32_t>& cps) {
    std::string out;
    for (char32_t cp : cps) {
        uint32_t v = cp;
        if (v < 0x80) {
            out.push_back(static_cast<char>(v));
        } else if (v < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (v >> 6)));
            out.push_back(static_cast<char>(0x80 | (v & 0x3F)));
        } else if (v < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (v >> 12)));
            out.push_back(static_cast<char>(0x80 | ((v >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (v & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (v >> 18)));
            out.push_back(static_cast<char>(0x80 | ((v >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((v >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (v & 0x3F)));
        }
    }
    return out;
}

bool is_punctuation(char32_t cp) {
    return in_ranges(cp, std::begin(kPunctRanges), std::end(kPunctRanges));
}

bool is_whitespace(char32_t cp) {
    return in_ranges(cp, std::begin(kSpaceRanges), std::end(kSpaceRanges));
}

std::string trim(std::string_view s) {
    auto cps = decode_utf8(s);
    size_t a = 0;
    size_t b = cps.size();
    while (a < b && is_whitespace(cps[a])) ++a;
    while (b > a && is_whitespace(cps[b - 1])) --b;
    return encode_utf8({cps.begin() + a, cps.begin() + b});
}

std::string strip_punct_and_space(std::string_view s) {
    std::vector<char32_t> kept;
    for (char32_t cp : decode_utf8(s)) {
        if (!is_punctuation(cp) && !is_whitespace(cp)) kept.push_back(cp);
    }
    return encode_utf8(kept);
}

std::vector<std::string> char_tokens(std::string_view s) {
    std::vector<std::string> out;
    for (char32_t cp : decode_utf8(s)) {
        if (!is_punctuation(cp) && !is_whitespace(cp)) out.push_back(encode_utf8({cp}));
    }
    return out;
}

std::vector<std::string> word_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::vector<char32_t> cur;
    auto flush = [&] {
        if (!cur.empty()) {
            out.push_back(encode_utf8(cur));
            cur.clear();
        }
    };
    for (char32_t cp : decode_utf8(s)) {
        if (is_whitespace(cp)) {
            flush();
        } else if (!is_punctuation(cp)) {
            cur.push_back(cp);
        }
    }
    flush();
    return out;
}

std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    std::vector<char32_t> cur;
    auto flush = [&] {
        if (!cur.empty()) {
            out.push_back(encode_utf8(cur));
            cur.clear();
        }
    };
    for (char32_t cp : decode_utf8(s)) {
        if (is_whitespace(cp)) {
            flush();
        } else {
            cur.push_back(cp);
        }
    }
    flush();
    return out;
}

std::vector<std::string> split_characters(std::string_view s) {
    std::vector<std::string> out;
    for (char32_t cp : decode_utf8(s)) {
        if (!is_whitespace(cp)) out.push_back(encode_utf8({cp}));
    }
    return out;
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

double round1(double v) {
    return (v < 0 ? -1.0 : 1.0) * std::floor(std::abs(v) * 10.0 + 0.5) / 10.0;
}

int first_integer(std::string_view s) {
    size_t i = 0;
    while (i < s.size()) {
        if (s[i] >= '0' && s[i] <= '9') {
            long value = 0;
            while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
                value = value * 10 + (s[i] - '0');
                if (value > 1000000) return -1;
                ++i;
            }
            return static_cast<int>(value);
        }
        ++i;
    }
    return -1;
}

}  // namespace poetrat::text
