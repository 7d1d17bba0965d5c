#include "classtalk/text.hpp"

#include <algorithm>
#include <cctype>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace classtalk::text {

std::vector<CodePoint> decode(std::string_view utf8) {
  std::vector<CodePoint> out;
  out.reserve(utf8.size());
  const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c < 0) {
      c = 0xFFFD;
      i = start + 1;
    }
    out.push_back({static_cast<char32_t>(c), static_cast<std::size_t>(start),
                   static_cast<std::size_t>(i - start)});
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  uint8_t buf[U8_MAX_LENGTH];
  int32_t n = 0;
  UBool error = false;
  U8_APPEND(buf, n, U8_MAX_LENGTH, static_cast<UChar32>(cp), error);
  if (error) {
    append_utf8(out, 0xFFFD);
    return;
  }
  out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
}

bool is_letter_or_digit(char32_t cp) { return u_isalnum(static_cast<UChar32>(cp)); }

bool is_apostrophe(char32_t cp) { return cp == U'\'' || cp == U'’'; }

bool is_whitespace(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)); }

std::vector<bool> word_mask(const std::vector<CodePoint>& cps) {
  std::vector<bool> mask(cps.size(), false);
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t c = cps[i].value;
    if (is_letter_or_digit(c)) {
      mask[i] = true;
    } else if (is_apostrophe(c) && i > 0 && i + 1 < cps.size()) {
      mask[i] = is_letter_or_digit(cps[i - 1].value) &&
                is_letter_or_digit(cps[i + 1].value);
    }
  }
  return mask;
}

bool is_boundary(const std::vector<bool>& mask, std::size_t i) {
  if (i == 0 || i >= mask.size()) return true;
  return mask[i - 1] != mask[i];
}

std::size_t word_count(std::string_view utf8) {
  if (std::all_of(utf8.begin(), utf8.end(), [](char c) { return (c & 0x80) == 0; })) {
    // ASCII fast path: a letter/digit starts a word unless it follows another
    // one, directly or across a joining apostrophe.
    const auto alnum = [&](std::size_t i) {
      return std::isalnum(static_cast<unsigned char>(utf8[i])) != 0;
    };
    std::size_t count = 0;
    for (std::size_t i = 0; i < utf8.size(); ++i) {
      if (!alnum(i)) continue;
      const bool joined =
          i > 0 && (alnum(i - 1) || (utf8[i - 1] == '\'' && i > 1 && alnum(i - 2)));
      if (!joined) ++count;
    }
    return count;
  }
  const auto mask = word_mask(decode(utf8));
  std::size_t count = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] && (i == 0 || !mask[i - 1])) ++count;
  }
  return count;
}

char32_t fold(char32_t cp) {
  return static_cast<char32_t>(u_foldCase(static_cast<UChar32>(cp), U_FOLD_CASE_DEFAULT));
}

std::string to_lower(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  for (const auto& cp : decode(utf8)) {
    append_utf8(out, static_cast<char32_t>(u_tolower(static_cast<UChar32>(cp.value))));
  }
  return out;
}

std::vector<std::string> tokenize_lower(std::string_view utf8) {
  const auto cps = decode(utf8);
  const auto mask = word_mask(cps);
  std::vector<std::string> tokens;
  std::string current;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (mask[i]) {
      append_utf8(current, static_cast<char32_t>(u_tolower(static_cast<UChar32>(cps[i].value))));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string normalize_spaces(std::string_view utf8) {
  std::string out;
  bool pending_space = false;
  for (const auto& cp : decode(utf8)) {
    if (is_whitespace(cp.value)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.append(utf8.substr(cp.byte_offset, cp.byte_length));
  }
  return out;
}

PhraseMatcher::PhraseMatcher(const std::vector<std::string>& patterns, bool case_sensitive)
    : case_sensitive_(case_sensitive) {
  patterns_.reserve(patterns.size());
  for (const auto& raw : patterns) {
    std::vector<char32_t> p;
    for (const auto& cp : decode(normalize_spaces(raw))) {
      if (cp.value == U' ') {
        p.push_back(U' ');
      } else {
        p.push_back(case_sensitive_ ? cp.value : fold(cp.value));
      }
    }
    patterns_.push_back(std::move(p));
  }
}

std::size_t PhraseMatcher::match_at(const std::vector<char32_t>& folded, std::size_t start,
                                    std::size_t p) const {
  const auto& pat = patterns_[p];
  if (pat.empty()) return 0;
  std::size_t i = start;
  for (char32_t want : pat) {
    if (want == U' ') {
      if (i >= folded.size() || !is_whitespace(folded[i])) return 0;
      while (i < folded.size() && is_whitespace(folded[i])) ++i;
      continue;
    }
    if (i >= folded.size() || folded[i] != want) return 0;
    ++i;
  }
  return i - start;
}

std::vector<PhraseMatch> PhraseMatcher::find_all(std::string_view utf8) const {
  std::vector<PhraseMatch> matches;
  if (patterns_.empty()) return matches;
  const auto cps = decode(utf8);
  const auto mask = word_mask(cps);
  std::vector<char32_t> folded;
  folded.reserve(cps.size());
  for (const auto& cp : cps) folded.push_back(case_sensitive_ ? cp.value : fold(cp.value));

  std::size_t s = 0;
  while (s < cps.size()) {
    if (!is_boundary(mask, s)) {
      ++s;
      continue;
    }
    std::size_t best_len = 0;
    std::size_t best_pattern = 0;
    for (std::size_t p = 0; p < patterns_.size(); ++p) {
      const std::size_t len = match_at(folded, s, p);
      if (len > best_len && is_boundary(mask, s + len)) {
        best_len = len;
        best_pattern = p;
      }
    }
    if (best_len == 0) {
      ++s;
      continue;
    }
    const std::size_t end = s + best_len;
    const std::size_t byte_end =
        end < cps.size() ? cps[end].byte_offset : utf8.size();
    matches.push_back({cps[s].byte_offset, byte_end, best_pattern});
    s = end;
  }
  return matches;
}

}  // namespace classtalk::text
