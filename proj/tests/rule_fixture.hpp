#pragma once

// Curated rule fixture: ten pattern-positive tweets with the full set of
// pattern ids each one matches (worked out by hand), and twenty tweets that
// match none.

#include <set>
#include <string>
#include <vector>

#include <boost/regex.hpp>

namespace rweet::testing {

struct RuleCase {
  std::string text;
  std::set<int> ids;
};

inline const std::vector<RuleCase>& rule_fixture() {
  static const std::vector<RuleCase> cases = {
      {"We are donating blankets to the shelter tonight", {1}},
      {"I'm bringing water to the Rockaways", {2}},
      {"we're raising money for Sandy victims", {3}},
      {"I would like to donate clothes to families in Queens", {4, 10, 16}},
      {"We will volunteer at the Red Cross center", {5}},
      {"We'll bring food to Staten Island", {6}},
      {"Where can I donate clothes", {8}},
      {"How can we help the victims in Breezy Point", {17}},
      {"Blankets will be donated to the shelter", {12}},
      {"Does anyone know where to get gas?", {13}},
      {"Stay safe everyone, the storm is getting worse", {}},
      {"Power is out in lower Manhattan", {}},
      {"Photos of the flooding in Hoboken are unreal", {}},
      {"The subway will be closed all day", {}},
      {"Hurricane Sandy makes landfall near Atlantic City", {}},
      {"Schools closed tomorrow across the city", {}},
      {"My thoughts are with the people of New Jersey", {}},
      {"Lines at the gas stations stretch for blocks", {}},
      {"Trees down on every street in Brooklyn", {}},
      {"The boardwalk in Seaside Heights is gone", {}},
      {"Watching the news coverage all night", {}},
      {"Our neighborhood still has no heat", {}},
      {"FEMA trailers arrived in Long Beach this morning", {}},
      {"The marathon has been cancelled", {}},
      {"Crazy wind outside right now", {}},
      {"Traffic lights are out on Flatbush Avenue", {}},
      {"Thankful that my family is safe", {}},
      {"The river flooded the tunnels overnight", {}},
      {"Sandy was the worst storm in decades", {}},
      {"The mayor held a press conference today", {}},
  };
  return cases;
}

// The eighteen patterns transcribed separately for a second regex engine.
// Boost reads \' as an end-of-buffer assertion, so apostrophes are literal.
inline const std::vector<boost::regex>& boost_rule_oracle() {
  static const std::vector<boost::regex> patterns = [] {
    const char* sources[] = {
        R"(\b(I|we)\b.*\b(am|are|will be)\b.*\b(bringing|giving|helping|raising|donating|auctioning)\b)",
        R"(\b(I'm)\b.*\b(bringing|giving|helping|raising|donating|auctioning)\b)",
        R"(\b(we're)\b.*\b(bringing|giving|helping|raising|donating|auctioning)\b)",
        R"(\b(I|we)\b.*\b(will|would like to)\b.*\b(bring|give|help|raise|donate|auction)\b)",
        R"(\b(I|we)\b.*\b(will|would like to)\b.*\b(work|volunteer|assist)\b)",
        R"(\b(we'll)\b.*\b(bring|give|help|raise|donate|auction)\b)",
        R"(\b(I|we)\b.*\b(ready|prepared)\b.*\b(bring|give|help|raise|donate|auction)\b)",
        R"(\b(where)\b.*\b(can I|can we)\b.*\b(bring|give|help|raise|donate)\b)",
        R"(\b(where)\b.*\b(can I|can we)\b.*\b(work|volunteer|assist)\b)",
        R"(\b(I|we)\b.*\b(like|want)\b.*\bto\b.*\b(bring|give|help|raise|donate)\b)",
        R"(\b(I|we)\b.*\b(like|want)\b.*\bto\b.*\b(work|volunteer|assist)\b)",
        R"(\b(will be)\b.*\b(brought|given|raised|donated|auctioned)\b)",
        R"(\b\w*\s*\b\?)",
        R"(\b(you|u).*(can|could|should|want to)\b)",
        R"(\b(can|could|should).*(you|u)\b)",
        R"(\b(like|want)\b.*\bto\b.*\b(bring|give|help|raise|donate)\b)",
        R"(\b(how)\b.*\b(can I|can we)\b.*\b(bring|give|help|raise|donate)\b)",
        R"(\b(how)\b.*\b(can I|can we)\b.*\b(work|volunteer|assist)\b)",
    };
    std::vector<boost::regex> out;
    for (const char* s : sources) out.emplace_back(s, boost::regex::perl | boost::regex::icase);
    return out;
  }();
  return patterns;
}

inline std::set<int> boost_rule_ids(const std::string& text) {
  std::set<int> ids;
  const auto& oracle = boost_rule_oracle();
  for (std::size_t i = 0; i < oracle.size(); ++i)
    if (boost::regex_search(text, oracle[i])) ids.insert(static_cast<int>(i) + 1);
  return ids;
}

}  // namespace rweet::testing
