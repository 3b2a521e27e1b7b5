#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace poetrat::text {

/// Decodes UTF-8 into code points. Invalid bytes decode as U+FFFD,
/// one replacement per bogus byte, so the scan always terminates.
std::vector<char32_t> decode_utf8(std::string_view s);

std::string encode_utf8(const std::vector<char32_t>& cps);

bool is_punctuation(char32_t cp);
bool is_whitespace(char32_t cp);

std::string trim(std::string_view s);

/// Strips all whitespace and Unicode punctuation. Used both for
/// retrieval normalization and for per-character token counting.
std::string strip_punct_and_space(std::string_view s);

/// Per-code-point tokens, punctuation and whitespace excluded.
std::vector<std::string> char_tokens(std::string_view s);

/// Whitespace-delimited tokens with punctuation stripped from each
/// token; tokens that were all punctuation disappear.
std::vector<std::string> word_tokens(std::string_view s);

/// Plain whitespace split, nothing stripped (BLEU tokenizer).
std::vector<std::string> split_whitespace(std::string_view s);

/// Per-code-point tokens, only whitespace excluded (BLEU tokenizer).
std::vector<std::string> split_characters(std::string_view s);

std::string ascii_lower(std::string_view s);

/// Round half away from zero to one decimal place.
double round1(double v);

/// First run of decimal digits in `s` parsed as an integer, or -1 if
/// there is none (or it overflows int).
int first_integer(std::string_view s);

}  // namespace poetrat::text
