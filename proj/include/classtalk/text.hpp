#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace classtalk::text {

// One decoded code point and where it sits in the UTF-8 source.
struct CodePoint {
  char32_t value;
  std::size_t byte_offset;
  std::size_t byte_length;
};

// Decodes UTF-8. Invalid sequences decode to U+FFFD, one byte each, so byte
// offsets always tile the input.
std::vector<CodePoint> decode(std::string_view utf8);

void append_utf8(std::string& out, char32_t cp);

bool is_letter_or_digit(char32_t cp);
bool is_apostrophe(char32_t cp);
bool is_whitespace(char32_t cp);

// Word-character mask over decoded text. Letters and digits are word
// characters; an apostrophe is one only when flanked by letters/digits on
// both sides ("don't").
std::vector<bool> word_mask(const std::vector<CodePoint>& cps);

// Number of maximal runs of word characters.
std::size_t word_count(std::string_view utf8);

// Maximal word-character runs, lowercased.
std::vector<std::string> tokenize_lower(std::string_view utf8);

// Simple (1:1) case folding of a single code point.
char32_t fold(char32_t cp);

std::string to_lower(std::string_view utf8);

// Trims leading/trailing whitespace and collapses internal whitespace runs to
// one ASCII space.
std::string normalize_spaces(std::string_view utf8);

// A match of a phrase pattern inside a text, in byte offsets of the text.
struct PhraseMatch {
  std::size_t byte_begin;
  std::size_t byte_end;
  std::size_t pattern_index;
};

// Whole-word phrase matcher shared by de-identification and lexicon counts.
//
// Scans left to right. At each position the longest pattern that matches and
// whose both ends fall on word boundaries wins and consumes its span; the scan
// resumes after it. A space inside a pattern matches any non-empty whitespace
// run in the text.
class PhraseMatcher {
 public:
  PhraseMatcher(const std::vector<std::string>& patterns, bool case_sensitive);

  std::vector<PhraseMatch> find_all(std::string_view utf8) const;

  std::size_t size() const { return patterns_.size(); }

 private:
  // Length in code points of the match of pattern `p` at `start`, or 0.
  std::size_t match_at(const std::vector<char32_t>& folded,
                       std::size_t start, std::size_t p) const;

  std::vector<std::vector<char32_t>> patterns_;
  bool case_sensitive_;
};

// True when a boundary sits between code points i-1 and i.
bool is_boundary(const std::vector<bool>& mask, std::size_t i);

}  // namespace classtalk::text
