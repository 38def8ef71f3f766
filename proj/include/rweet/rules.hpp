#pragma once

// Sequential-pattern rule engine: 18 ordered token patterns compiled to
// case-insensitive regular expressions. A tweet matching any pattern is a
// rule-based rweet; the per-pattern bits double as binary features.
//
// Rules read the ORIGINAL tweet text, not the cleaned tokens.

#include <array>
#include <bitset>
#include <cstddef>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rweet/corpus.hpp"
#include "rweet/error.hpp"

namespace rweet {

inline constexpr std::size_t kRuleCount = 18;

struct RulePattern {
  int id;  // 1..18
  std::string_view source;
};

// Whitespace that the printed table carried inside alternations (e.g.
// "donating|  auctioning") is removed; otherwise sources are verbatim.
inline constexpr std::array<RulePattern, kRuleCount> kRulePatterns = {{
    {1, R"(\b(I|we)\b.*\b(am|are|will be)\b.*\b(bringing|giving|helping|raising|donating|auctioning)\b)"},
    {2, R"(\b(I\'m)\b.*\b(bringing|giving|helping|raising|donating|auctioning)\b)"},
    {3, R"(\b(we\'re)\b.*\b(bringing|giving|helping|raising|donating|auctioning)\b)"},
    {4, R"(\b(I|we)\b.*\b(will|would like to)\b.*\b(bring|give|help|raise|donate|auction)\b)"},
    {5, R"(\b(I|we)\b.*\b(will|would like to)\b.*\b(work|volunteer|assist)\b)"},
    {6, R"(\b(we\'ll)\b.*\b(bring|give|help|raise|donate|auction)\b)"},
    {7, R"(\b(I|we)\b.*\b(ready|prepared)\b.*\b(bring|give|help|raise|donate|auction)\b)"},
    {8, R"(\b(where)\b.*\b(can I|can we)\b.*\b(bring|give|help|raise|donate)\b)"},
    {9, R"(\b(where)\b.*\b(can I|can we)\b.*\b(work|volunteer|assist)\b)"},
    {10, R"(\b(I|we)\b.*\b(like|want)\b.*\bto\b.*\b(bring|give|help|raise|donate)\b)"},
    {11, R"(\b(I|we)\b.*\b(like|want)\b.*\bto\b.*\b(work|volunteer|assist)\b)"},
    {12, R"(\b(will be)\b.*\b(brought|given|raised|donated|auctioned)\b)"},
    {13, R"(\b\w*\s*\b\?)"},
    {14, R"(\b(you|u).*(can|could|should|want to)\b)"},
    {15, R"(\b(can|could|should).*(you|u)\b)"},
    {16, R"(\b(like|want)\b.*\bto\b.*\b(bring|give|help|raise|donate)\b)"},
    {17, R"(\b(how)\b.*\b(can I|can we)\b.*\b(bring|give|help|raise|donate)\b)"},
    {18, R"(\b(how)\b.*\b(can I|can we)\b.*\b(work|volunteer|assist)\b)"},
}};

// One bit per pattern; bit (id - 1) is pattern `id`.
class RuleMatchVector {
 public:
  RuleMatchVector() = default;
  explicit RuleMatchVector(std::bitset<kRuleCount> bits) : bits_(bits) {}

  bool matched(int pattern_id) const { return bits_.test(static_cast<std::size_t>(pattern_id - 1)); }
  void set(int pattern_id) { bits_.set(static_cast<std::size_t>(pattern_id - 1)); }
  std::size_t count() const { return bits_.count(); }
  bool any() const { return bits_.any(); }
  static constexpr std::size_t size() { return kRuleCount; }
  const std::bitset<kRuleCount>& bits() const { return bits_; }

  // 0/1 per pattern in id order.
  std::vector<int> to_vector() const {
    std::vector<int> out(kRuleCount);
    for (std::size_t i = 0; i < kRuleCount; ++i) out[i] = bits_.test(i) ? 1 : 0;
    return out;
  }

  bool operator==(const RuleMatchVector&) const = default;

 private:
  std::bitset<kRuleCount> bits_;
};

class RuleSet {
 public:
  RuleSet() {
    compiled_.reserve(kRuleCount);
    for (const auto& p : kRulePatterns) {
      try {
        compiled_.emplace_back(std::string(p.source),
                               std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
      } catch (const std::regex_error& e) {
        fail(ErrorKind::kValidation,
             "rule pattern " + std::to_string(p.id) + " failed to compile: " + e.what());
      }
    }
  }

  static const RuleSet& instance() {
    static const RuleSet rules;
    return rules;
  }

  std::vector<RulePattern> patterns() const {
    return {kRulePatterns.begin(), kRulePatterns.end()};
  }

  RuleMatchVector match(std::string_view text) const {
    RuleMatchVector v;
    for (std::size_t i = 0; i < compiled_.size(); ++i)
      if (std::regex_search(text.begin(), text.end(), compiled_[i]))
        v.set(static_cast<int>(i) + 1);
    return v;
  }

 private:
  std::vector<std::regex> compiled_;
};

inline std::vector<RulePattern> compile_patterns() { return RuleSet::instance().patterns(); }

inline RuleMatchVector match_tweet(std::string_view raw_text) {
  return RuleSet::instance().match(raw_text);
}

inline constexpr std::string_view kRweet = "rweet";
inline constexpr std::string_view kNotRweet = "not_rweet";

inline std::string_view rule_classify(std::string_view raw_text) {
  return match_tweet(raw_text).any() ? kRweet : kNotRweet;
}

// Rows align with the input order.
inline std::vector<RuleMatchVector> rule_features(std::span<const std::string> texts) {
  std::vector<RuleMatchVector> rows;
  rows.reserve(texts.size());
  for (const auto& t : texts) rows.push_back(match_tweet(t));
  return rows;
}

inline std::vector<RuleMatchVector> rule_features(const Dataset& d) {
  std::vector<RuleMatchVector> rows;
  rows.reserve(d.size());
  for (const auto& t : d.tweets) rows.push_back(match_tweet(t.text));
  return rows;
}

}  // namespace rweet
