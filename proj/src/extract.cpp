// Copyright 2026 The mldebias Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mldebias/extract.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <string>
#include <vector>

namespace mldebias {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::optional<Letter> letter_from_match(const std::ssub_match& paren,
                                        const std::ssub_match& bare) {
  if (paren.matched) return parse_letter(paren.str());
  if (bare.matched) {
    const char c = bare.str()[0];
    if (c >= 'A' && c <= 'C') return static_cast<Letter>(c - 'A');
  }
  return std::nullopt;
}

std::optional<Letter> leading_letter(const std::string& text) {
  static const std::regex kLeading(
      R"(^(?:\(([A-Ca-c])\)|([A-Ca-c])(?:$|[.:)\]]|\s*\n|\s+[(\-]|,)))");
  std::smatch m;
  if (!std::regex_search(text, m, kLeading)) return std::nullopt;
  if (m[1].matched) return parse_letter(m[1].str());
  // "a." or "a," at the start is accepted; a lowercase "a" followed by a
  // space is the English article and never reaches here.
  return parse_letter(m[2].str());
}

std::optional<Letter> cue_letter(const std::string& text) {
  static const std::regex kCue(
      R"(\b(?:answer|choice|option)\b[^A-Za-z0-9(\n]{0,4}(?:is\s+|would\s+be\s+|be\s+)?)"
      R"((?:option\s+|choice\s+)?(?:\(([A-Ca-c])\)|\b([A-Ca-c])\b(?!['’])))",
      std::regex::icase);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), kCue);
       it != std::sregex_iterator(); ++it) {
    if (auto l = letter_from_match((*it)[1], (*it)[2])) return l;
    // A lowercase bare letter counts only when nothing word-like follows it,
    // so "answer: b." is accepted but "answer: a grandfather" is not.
    static constexpr std::string_view kClosers = ".,:;)!\n";
    const std::ssub_match& bare = (*it)[2];
    if (!bare.matched) continue;
    if (bare.second == text.end() || kClosers.find(*bare.second) != std::string_view::npos) {
      return parse_letter(bare.str());
    }
  }
  return std::nullopt;
}

std::optional<Letter> parenthesised_letter(const std::string& text) {
  static const std::regex kParen(R"(\(([A-Ca-c])\))");
  std::smatch m;
  if (!std::regex_search(text, m, kParen)) return std::nullopt;
  return parse_letter(m[1].str());
}

std::optional<Letter> choice_text_match(const std::string& text, const Question& q) {
  const std::string haystack = lower(text);
  std::vector<std::size_t> hits;
  std::vector<std::string> needles;
  for (std::size_t i = 0; i < q.choices.size(); ++i) {
    std::string needle = lower(trim(q.choices[i]));
    while (!needle.empty() && (needle.back() == '.' || needle.back() == '!')) needle.pop_back();
    needles.push_back(needle);
    if (!needle.empty() && haystack.find(needle) != std::string::npos) hits.push_back(i);
  }
  // A hit whose text is contained in another hit's text is shadowed by it.
  std::vector<std::size_t> kept;
  for (std::size_t a : hits) {
    const bool shadowed = std::any_of(hits.begin(), hits.end(), [&](std::size_t b) {
      return a != b && needles[b].size() > needles[a].size() &&
             needles[b].find(needles[a]) != std::string::npos;
    });
    if (!shadowed) kept.push_back(a);
  }
  if (kept.size() != 1) return std::nullopt;
  return letter_at(kept.front());
}

}  // namespace

std::optional<Letter> extract_answer(std::string_view raw_text, const Question& q) {
  std::string text(trim(raw_text));
  // Markdown emphasis around the letter ("**B**") is noise.
  text.erase(std::remove(text.begin(), text.end(), '*'), text.end());
  text = std::string(trim(text));
  if (text.empty()) return std::nullopt;

  if (auto l = leading_letter(text)) return l;
  if (auto l = cue_letter(text)) return l;
  if (auto l = parenthesised_letter(text)) return l;
  return choice_text_match(text, q);
}

std::optional<int> extract_confidence(std::string_view raw_text) {
  static const std::regex kCueRe(R"(confiden(?:ce|t)|score)", std::regex::icase);
  static const std::regex kNumberRe(R"(\d+)");
  const std::string text(raw_text);

  struct Number {
    std::size_t begin;
    std::size_t end;
    int value;
  };
  std::vector<Number> numbers;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), kNumberRe);
       it != std::sregex_iterator(); ++it) {
    const std::size_t b = static_cast<std::size_t>(it->position());
    const std::size_t e = b + static_cast<std::size_t>(it->length());
    const std::string digits = it->str();
    if (digits.size() > 2) continue;
    const int value = std::stoi(digits);

    // Skip the scale description ("1 to 7", "1-7") and denominators ("/7",
    // "out of 7", "to 7").
    static const std::regex kRangeStart(R"(^\s*(?:to|-|–)\s*\d)", std::regex::icase);
    static const std::regex kDenominator(R"((?:/|out of|to|-|–)\s*$)", std::regex::icase);
    const std::string after = text.substr(e, 12);
    const std::string before = text.substr(b >= 8 ? b - 8 : 0, b >= 8 ? 8 : b);
    if (std::regex_search(after, kRangeStart)) continue;
    if (std::regex_search(before, kDenominator)) continue;
    numbers.push_back({b, e, value});
  }

  constexpr std::size_t kWindow = 24;
  std::vector<std::pair<std::size_t, std::size_t>> cues;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), kCueRe);
       it != std::sregex_iterator(); ++it) {
    const auto b = static_cast<std::size_t>(it->position());
    cues.emplace_back(b, b + static_cast<std::size_t>(it->length()));
  }

  for (const auto& [cb, ce] : cues) {
    for (const auto& n : numbers) {
      if (n.begin >= ce && n.begin - ce <= kWindow) {
        if (n.value >= 1 && n.value <= 7) return n.value;
        break;
      }
    }
  }
  for (const auto& [cb, ce] : cues) {
    const Number* nearest = nullptr;
    for (const auto& n : numbers) {
      if (n.end <= cb && cb - n.end <= kWindow) nearest = &n;
    }
    if (nearest != nullptr && nearest->value >= 1 && nearest->value <= 7) return nearest->value;
  }
  return std::nullopt;
}

}  // namespace mldebias
