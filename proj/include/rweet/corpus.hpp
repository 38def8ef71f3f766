#pragma once

// Labeled tweet datasets: JSONL ingestion and persistence, class
// distributions, and a seeded synthetic corpus generator.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <regex>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rweet/digest.hpp"
#include "rweet/error.hpp"
#include "rweet/io.hpp"

namespace rweet {

struct RawTweet {
  std::string id;
  std::string text;
  std::optional<std::string> label;

  bool operator==(const RawTweet&) const = default;
};

class LabelDomain {
 public:
  LabelDomain(std::string name, std::vector<std::string> labels)
      : name_(std::move(name)), labels_(std::move(labels)) {
    if (labels_.size() < 2)
      fail(ErrorKind::kValidation, "label domain '" + name_ + "' needs at least 2 labels");
    std::unordered_set<std::string> seen;
    for (const auto& l : labels_)
      if (!seen.insert(l).second)
        fail(ErrorKind::kValidation, "duplicate label '" + l + "' in domain '" + name_ + "'");
  }

  // {not_rweet, rweet}; not_rweet is index 0 so filtering keys on class 0.
  static LabelDomain binary() { return {"binary", {"not_rweet", "rweet"}}; }

  static LabelDomain categorical() {
    return {"categorical", {"money", "volunteer", "cloth", "shelter", "medical", "food"}};
  }

  static LabelDomain by_name(std::string_view name) {
    if (name == "binary") return binary();
    if (name == "categorical") return categorical();
    fail(ErrorKind::kUsage, "unknown label domain '" + std::string(name) +
                                "' (expected binary or categorical)");
  }

  const std::string& name() const { return name_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }

  std::optional<int> index_of(std::string_view label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<int>(it - labels_.begin());
  }

  bool operator==(const LabelDomain&) const = default;

 private:
  std::string name_;
  std::vector<std::string> labels_;
};

struct Dataset {
  LabelDomain domain;
  std::vector<RawTweet> tweets;

  std::size_t size() const { return tweets.size(); }
  bool fully_labeled() const {
    return std::all_of(tweets.begin(), tweets.end(),
                       [](const RawTweet& t) { return t.label.has_value(); });
  }

  // Class indices in domain order; throws if any tweet is unlabeled.
  std::vector<int> label_indices() const {
    std::vector<int> y;
    y.reserve(tweets.size());
    for (const auto& t : tweets) {
      if (!t.label)
        fail(ErrorKind::kValidation, "tweet '" + t.id + "' has no label; training needs labeled data");
      y.push_back(*domain.index_of(*t.label));
    }
    return y;
  }

  bool operator==(const Dataset&) const = default;
};

inline std::string dataset_digest(const Dataset& d) {
  Digest h;
  h.add(d.domain.name()).add_all(d.domain.labels()).add_int(static_cast<std::int64_t>(d.size()));
  for (const auto& t : d.tweets) {
    h.add(t.id).add(t.text).add_flag(t.label.has_value());
    if (t.label) h.add(*t.label);
  }
  return h.hex();
}

// Parses one JSONL record. `where` is prefixed to every error message.
inline RawTweet parse_tweet_record(std::string_view line, const LabelDomain& domain,
                                   const std::string& where) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::kValidation, where + ": malformed JSON: " + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::kValidation, where + ": record is not a JSON object");
  auto field = [&](const char* key, bool required) -> std::optional<std::string> {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
      if (required) fail(ErrorKind::kValidation, where + ": missing \"" + key + "\"");
      return std::nullopt;
    }
    if (!it->is_string()) fail(ErrorKind::kValidation, where + ": \"" + key + "\" is not a string");
    return it->get<std::string>();
  };
  RawTweet t{*field("id", true), *field("text", true), field("label", false)};
  if (t.id.empty()) fail(ErrorKind::kValidation, where + ": empty id");
  if (t.label && !domain.index_of(*t.label))
    fail(ErrorKind::kValidation, where + ": unknown label '" + *t.label + "' for domain '" +
                                     domain.name() + "'");
  return t;
}

inline Dataset parse_dataset(std::istream& in, const LabelDomain& domain,
                             const std::string& source = "<stream>") {
  Dataset d{domain, {}};
  std::unordered_set<std::string> ids;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto where = source + ":" + std::to_string(lineno);
    auto tweet = parse_tweet_record(line, domain, where);
    if (!ids.insert(tweet.id).second)
      fail(ErrorKind::kValidation, where + ": duplicate id '" + tweet.id + "'");
    d.tweets.push_back(std::move(tweet));
  }
  return d;
}

inline Dataset load_dataset(const std::filesystem::path& path, const LabelDomain& domain) {
  auto in = open_input(path);
  return parse_dataset(in, domain, path.string());
}

inline std::string tweet_record(const RawTweet& t) {
  nlohmann::json j{{"id", t.id}, {"text", t.text}};
  if (t.label) j["label"] = *t.label;
  return j.dump();
}

inline void save_dataset(const std::filesystem::path& path, const Dataset& d) {
  std::ostringstream out;
  for (const auto& t : d.tweets) out << tweet_record(t) << '\n';
  write_file_atomic(path, out.str());
}

struct ClassDistribution {
  std::map<std::string, std::size_t> counts;
  std::map<std::string, double> fractions;
};

// Counts over labeled tweets only; unlabeled tweets are ignored.
inline ClassDistribution dataset_stats(const Dataset& d) {
  ClassDistribution dist;
  std::size_t total = 0;
  for (const auto& t : d.tweets) {
    if (!t.label) continue;
    ++dist.counts[*t.label];
    ++total;
  }
  for (const auto& [label, n] : dist.counts)
    dist.fractions[label] = static_cast<double>(n) / static_cast<double>(total);
  return dist;
}

// ---------------------------------------------------------------------------
// Synthetic corpus

enum class RequestForm { kDeclarative, kInterrogative, kImperative };

struct SynthTemplate {
  RequestForm form;
  std::string_view pattern;  // slots: {item} {place} {event} {num}
};

inline constexpr SynthTemplate kRequestTemplates[] = {
    {RequestForm::kDeclarative, "we need {item} in {place}"},
    {RequestForm::kDeclarative, "i have no {item} left, need {item} asap"},
    {RequestForm::kDeclarative, "our family needs {item} after the {event}"},
    {RequestForm::kDeclarative, "{num} people in {place} are still waiting for {item}"},
    {RequestForm::kDeclarative, "i would like to donate {item} for {event} victims"},
    {RequestForm::kInterrogative, "can you bring {item} to {place}?"},
    {RequestForm::kInterrogative, "where can i donate {item} for {event} victims"},
    {RequestForm::kInterrogative, "could someone send {item} to {place} please?"},
    {RequestForm::kInterrogative, "does anyone have {item} for families in {place}?"},
    {RequestForm::kImperative, "need {item} at {place} please help"},
    {RequestForm::kImperative, "please send {item} to {place}"},
    {RequestForm::kImperative, "bring me {item}, please"},
    {RequestForm::kImperative, "get {item} to the {event} survivors in {place} now"},
    {RequestForm::kImperative, "help us with {item}, {place} is desperate"},
};

inline constexpr std::string_view kNonRequestTemplates[] = {
    "thoughts and prayers with everyone in {place} tonight",
    "the {event} hit {place} last night, {num} homes damaged",
    "watching the news about the {event} in {place}",
    "the storm knocked down trees all over {place}",
    "stay safe {place}, the worst of the {event} is over",
    "power is finally back in {place} after {num} days",
    "incredible photos of the {event} damage in {place}",
    "the governor declared a state of emergency for {place}",
    "schools in {place} will stay closed until monday",
    "so sad to see what the {event} did to {place}",
    "the wind was so loud last night, could not sleep",
    "traffic on the highway near {place} is moving again",
};

namespace detail {

inline constexpr std::string_view kPlaces[] = {
    "brooklyn", "queens", "staten island", "hoboken", "jersey shore", "long island",
    "manhattan", "atlantic city", "the bronx", "rockaway", "coney island", "newark"};
inline constexpr std::string_view kEvents[] = {"hurricane", "sandy", "storm", "flood",
                                               "earthquake", "disaster"};

// Class-indicative request items for the six categorical labels.
inline constexpr std::string_view kMoneyItems[] = {
    "money", "cash donations", "funds", "a few dollars", "donations to the red cross",
    "financial support"};
inline constexpr std::string_view kVolunteerItems[] = {
    "volunteers", "volunteer workers", "extra hands to clean up", "volunteer drivers",
    "people to help clean", "a volunteer crew"};
inline constexpr std::string_view kClothItems[] = {
    "clothes", "warm clothing", "blankets", "winter coats", "jackets and socks",
    "dry clothes and shoes"};
inline constexpr std::string_view kShelterItems[] = {
    "shelter", "a place to stay", "temporary housing", "a roof tonight",
    "an emergency shelter", "a safe room to sleep"};
inline constexpr std::string_view kMedicalItems[] = {
    "blood", "medicine", "insulin", "a doctor", "first aid kits", "medical supplies"};
inline constexpr std::string_view kFoodItems[] = {
    "food", "water", "hot meals", "canned food", "baby formula", "bread and milk"};

inline constexpr std::string_view kNames[] = {"bob", "alice", "redcross", "fema", "nycmayor",
                                              "akram", "ahmed", "sandyhelp", "news12"};

inline constexpr std::string_view kSpanish[] = {
    "necesitamos ayuda urgente por favor", "mucha lluvia en la ciudad hoy",
    "gracias por todo amigos", "estamos bien gracias amigos"};

// Bounded draw independent of the standard library's distribution details.
inline std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

template <typename Range>
std::string_view pick_from(std::mt19937_64& rng, const Range& r) {
  return r[pick(rng, std::size(r))];
}

inline std::span<const std::string_view> items_for(std::string_view label) {
  if (label == "money") return kMoneyItems;
  if (label == "volunteer") return kVolunteerItems;
  if (label == "cloth") return kClothItems;
  if (label == "shelter") return kShelterItems;
  if (label == "medical") return kMedicalItems;
  return kFoodItems;
}

inline constexpr std::string_view kAllCategories[] = {"money", "volunteer", "cloth",
                                                      "shelter", "medical", "food"};

inline std::string fill(std::string_view pattern, std::mt19937_64& rng,
                        std::span<const std::string_view> items) {
  std::string out;
  for (std::size_t i = 0; i < pattern.size();) {
    if (pattern[i] == '{') {
      auto close = pattern.find('}', i);
      auto slot = pattern.substr(i + 1, close - i - 1);
      if (slot == "item") out += items[pick(rng, items.size())];
      else if (slot == "place") out += pick_from(rng, kPlaces);
      else if (slot == "event") out += pick_from(rng, kEvents);
      else out += std::to_string(2 + pick(rng, 500));
      i = close + 1;
    } else {
      out += pattern[i++];
    }
  }
  return out;
}

inline std::string add_noise(std::string text, std::mt19937_64& rng) {
  auto roll = [&](int percent) { return static_cast<int>(pick(rng, 100)) < percent; };
  if (roll(30)) text = "@" + std::string(pick_from(rng, kNames)) + " " + text;
  if (roll(15)) text = "RT @" + std::string(pick_from(rng, kNames)) + ": " + text;
  if (roll(25)) text += " http://t.co/" + std::to_string(1000 + pick(rng, 90000));
  if (roll(15)) text += " #" + std::string(pick_from(rng, kEvents));
  if (roll(20)) {
    for (auto& c : text)
      if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  } else if (roll(40) && !text.empty() && text[0] >= 'a' && text[0] <= 'z') {
    text[0] = static_cast<char>(text[0] - 'a' + 'A');
  }
  if (roll(10)) text += "!!";
  return text;
}

// Same content, different surface: swaps mentions/URLs/numbers and case so
// the pair collapses only after cleaning.
inline std::string surface_variant(const std::string& text, std::mt19937_64& rng) {
  static const std::regex url(R"(http://t\.co/\d+)");
  static const std::regex mention(R"(@\w+)");
  std::string v = std::regex_replace(
      text, url, "http://t.co/" + std::to_string(1000 + pick(rng, 90000)));
  v = std::regex_replace(v, mention, "@" + std::string(pick_from(rng, kNames)));
  if (v.find("http") == std::string::npos) v += " http://t.co/" + std::to_string(7 + pick(rng, 90));
  for (auto& c : v)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return v;
}

}  // namespace detail

inline std::string synth_text(std::string_view label, std::mt19937_64& rng) {
  using namespace detail;
  if (label == "not_rweet") {
    if (pick(rng, 100) < 4) return std::string(pick_from(rng, kSpanish));
    return add_noise(fill(pick_from(rng, kNonRequestTemplates), rng, kFoodItems), rng);
  }
  auto category = label == "rweet" ? pick_from(rng, kAllCategories) : label;
  const auto& tpl = kRequestTemplates[pick(rng, std::size(kRequestTemplates))];
  return add_noise(fill(tpl.pattern, rng, items_for(category)), rng);
}

// Deterministic labeled corpus. Every label is represented: the first
// |labels| tweets cycle through the domain, the rest are drawn at random
// (binary ~56% rweet; categorical money-heavy). About 5% of tweets are
// surface variants of an earlier tweet that collapse after cleaning.
inline Dataset synth_corpus(std::uint64_t seed, std::size_t size, const LabelDomain& domain) {
  if (size < domain.size())
    fail(ErrorKind::kValidation, "synthetic corpus size " + std::to_string(size) +
                                     " is smaller than the label count " +
                                     std::to_string(domain.size()));
  std::mt19937_64 rng(seed);
  Dataset d{domain, {}};
  d.tweets.reserve(size);
  const auto& labels = domain.labels();
  bool binary = domain == LabelDomain::binary();
  for (std::size_t i = 0; i < size; ++i) {
    std::string label;
    if (i < labels.size()) {
      label = labels[i];
    } else if (binary) {
      label = labels[detail::pick(rng, 100) < 56 ? 1 : 0];
    } else {
      auto roll = detail::pick(rng, 100);
      label = roll < 35 ? labels[0] : labels[1 + (roll - 35) % (labels.size() - 1)];
    }
    std::string text;
    if (i >= labels.size() && detail::pick(rng, 100) < 5) {
      // pick an earlier tweet of the same label to echo
      std::vector<std::size_t> same;
      for (std::size_t j = 0; j < d.tweets.size(); ++j)
        if (d.tweets[j].label == label) same.push_back(j);
      if (!same.empty())
        text = detail::surface_variant(d.tweets[same[detail::pick(rng, same.size())]].text, rng);
    }
    if (text.empty()) text = synth_text(label, rng);
    char id[32];
    std::snprintf(id, sizeof id, "s%llu-%05zu", static_cast<unsigned long long>(seed), i);
    d.tweets.push_back({id, std::move(text), label});
  }
  return d;
}

// Which request template (if any) produced `text`; slots match any run.
inline std::optional<RequestForm> match_request_template(std::string_view text) {
  static const std::vector<std::pair<std::regex, RequestForm>> compiled = [] {
    std::vector<std::pair<std::regex, RequestForm>> out;
    static const std::regex slot(R"(\\\{[a-z]+\\\})");
    static const std::regex special(R"([.^$|()\[\]{}*+?\\])");
    for (const auto& t : kRequestTemplates) {
      auto escaped = std::regex_replace(std::string(t.pattern), special, "\\$&");
      auto body = std::regex_replace(escaped, slot, ".+");
      out.emplace_back(std::regex("^" + body + "$", std::regex::icase), t.form);
    }
    return out;
  }();
  for (const auto& [re, form] : compiled)
    if (std::regex_match(text.begin(), text.end(), re)) return form;
  return std::nullopt;
}

}  // namespace rweet
