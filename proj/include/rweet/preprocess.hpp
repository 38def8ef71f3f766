#pragma once

// Tweet cleaning: an ordered pipeline of text operations ending with
// corpus-level duplicate elimination, plus the persisted clean-corpus format.
//
// Every operation works on a whitespace-separated string, so the order is
// freely configurable; token operations split, transform and re-join.

#include <algorithm>
#include <array>
#include <cctype>
#include <filesystem>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "rweet/corpus.hpp"
#include "rweet/digest.hpp"
#include "rweet/error.hpp"
#include "rweet/io.hpp"
#include "rweet/lexicon.hpp"

namespace rweet {

using TokenList = std::vector<std::string>;

inline constexpr std::array<std::string_view, 4> kPlaceholders = {"_NUM_", "_RT_", "_MENT_",
                                                                  "_URL_"};

inline bool is_placeholder(std::string_view token) {
  return std::find(kPlaceholders.begin(), kPlaceholders.end(), token) != kPlaceholders.end();
}

// Length of the placeholder starting at text[pos], or 0.
inline std::size_t placeholder_at(std::string_view text, std::size_t pos) {
  for (auto p : kPlaceholders)
    if (text.substr(pos, p.size()) == p) return p.size();
  return 0;
}

inline TokenList split_tokens(std::string_view text) {
  TokenList out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

inline std::string join_tokens(const TokenList& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Text operations

inline std::string strip_non_ascii(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text)
    if (static_cast<unsigned char>(c) < 128) out += c;
  return out;
}

inline std::string lemmatize_word(std::string_view word);

namespace detail {
// URLs, mentions and retweet markers carry no language signal.
inline bool language_neutral(std::string_view token) {
  if (is_placeholder(token) || token.empty() || token[0] == '@') return true;
  if (token.find("://") != std::string_view::npos || token.rfind("www.", 0) == 0) return true;
  return token == "RT" || token == "rt";
}
}  // namespace detail

// Stopword/dictionary-hit ratio heuristic. Words are alphabetic runs; a word
// hits when it, or its lemma, is a stopword or a dictionary word.
inline bool is_english(std::string_view text, double threshold = 0.15) {
  const auto& stop = lexicon::stopwords();
  const auto& dict = lexicon::dictionary();
  std::size_t words = 0, hits = 0;
  for (const auto& token : split_tokens(text)) {
    if (detail::language_neutral(token)) continue;
    std::string word;
    auto flush = [&] {
      while (!word.empty() && word.front() == '\'') word.erase(word.begin());
      while (!word.empty() && word.back() == '\'') word.pop_back();
      if (!word.empty()) {
        ++words;
        if (stop.count(word) || dict.count(word) || dict.count(lemmatize_word(word))) ++hits;
      }
      word.clear();
    };
    for (char c : token) {
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '\'')
        word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      else
        flush();
    }
    flush();
  }
  if (words == 0) return false;
  if (words < 3 && hits >= 1) return true;
  return static_cast<double>(hits) / static_cast<double>(words) >= threshold;
}

// ASCII lowercase; placeholder tags are copied verbatim.
inline std::string lowercase(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    if (auto n = placeholder_at(text, i)) {
      out.append(text.substr(i, n));
      i += n;
    } else {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i++])));
    }
  }
  return out;
}

namespace detail {

struct TagPattern {
  std::regex re;
  const char* tag;
};

// Applied in this order: numbers, retweet markers, mentions, URLs.
inline const std::vector<TagPattern>& tag_patterns() {
  static const std::vector<TagPattern> patterns = {
      {std::regex(R"((?:(?:\d+,?)+(?:\.?\d+)?))"), "_NUM_"},
      {std::regex(R"(\b(?:(?:RT|rt) @ ?[\w_]+:?))"), "_RT_"},
      {std::regex(R"((?:@ ?[\w_]+))"), "_MENT_"},
      {std::regex(
           R"((?:http[s]? ?: ?//|www\.)(?:[a-z]|[0-9]|[$-_@.&+]|[!*\(\),]|(?:%[0-9a-f][0-9a-f]))+)"),
       "_URL_"},
  };
  return patterns;
}

}  // namespace detail

inline std::string generalize_tags(std::string_view text) {
  std::string out(text);
  for (const auto& p : detail::tag_patterns()) out = std::regex_replace(out, p.re, p.tag);
  // Placeholders glued to neighbouring characters become separate tokens.
  std::string spaced;
  for (std::size_t i = 0; i < out.size();) {
    if (auto n = placeholder_at(out, i)) {
      spaced += ' ';
      spaced.append(out, i, n);
      spaced += ' ';
      i += n;
    } else {
      spaced += out[i++];
    }
  }
  return join_tokens(split_tokens(spaced));
}

// Everything outside [a-z0-9_#' ] becomes a space; runs of spaces collapse.
inline std::string remove_punctuation(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    if (auto n = placeholder_at(text, i)) {
      out.append(text.substr(i, n));
      i += n;
      continue;
    }
    char c = text[i++];
    bool keep = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '#' ||
                c == '\'';
    out += keep ? c : ' ';
  }
  return join_tokens(split_tokens(out));
}

// ---------------------------------------------------------------------------
// Token operations

inline TokenList remove_stopwords(const TokenList& tokens) {
  const auto& stop = lexicon::stopwords();
  TokenList out;
  for (const auto& t : tokens)
    if (!stop.count(t)) out.push_back(t);
  return out;
}

inline std::optional<TokenList> drop_if_short(TokenList tokens, std::size_t min_tokens = 2) {
  if (tokens.size() < min_tokens) return std::nullopt;
  return tokens;
}

namespace detail {

inline bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

inline bool is_consonant(char c) {
  return c >= 'a' && c <= 'z' && std::string_view("aeiou").find(c) == std::string_view::npos;
}

// "donating" -> donat | donate | (undoubled) ... first dictionary hit wins.
inline std::optional<std::string> validated_stem(std::string_view stem) {
  const auto& dict = lexicon::dictionary();
  std::string s(stem);
  if (dict.count(s)) return s;
  if (dict.count(s + "e")) return s + "e";
  if (s.size() >= 2 && s[s.size() - 1] == s[s.size() - 2] && is_consonant(s.back())) {
    auto undoubled = s.substr(0, s.size() - 1);
    if (dict.count(undoubled)) return undoubled;
  }
  return std::nullopt;
}

// One rewrite step, or nullopt when no rule applies.
inline std::optional<std::string> lemma_step(const std::string& w) {
  const auto& irregular = lexicon::irregular_forms();
  if (auto it = irregular.find(w); it != irregular.end())
    return it->second == w ? std::nullopt : std::optional<std::string>(it->second);
  if (ends_with(w, "'s")) return w.substr(0, w.size() - 2);
  if (lexicon::dictionary().count(w)) return std::nullopt;
  if (w.size() > 4 && ends_with(w, "ies")) return w.substr(0, w.size() - 3) + "y";
  if (ends_with(w, "sses")) return w.substr(0, w.size() - 2);
  if (w.size() > 3 && ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") &&
      !ends_with(w, "is"))
    return w.substr(0, w.size() - 1);
  if (w.size() > 4 && ends_with(w, "ing"))
    return validated_stem(std::string_view(w).substr(0, w.size() - 3));
  if (w.size() > 3 && ends_with(w, "ed"))
    return validated_stem(std::string_view(w).substr(0, w.size() - 2));
  return std::nullopt;
}

}  // namespace detail

// Irregular-form table first, then ordered suffix rules (ies->y, sses->ss,
// s->'', ing/ed stripped only when the stem is a dictionary word), applied to
// a fixpoint. Placeholders and hashtags are left alone.
inline std::string lemmatize_word(std::string_view word) {
  std::string w(word);
  if (is_placeholder(w) || (!w.empty() && w[0] == '#')) return w;
  for (int guard = 0; guard < 8; ++guard) {
    auto next = detail::lemma_step(w);
    if (!next || next->empty() || *next == w) break;
    w = std::move(*next);
  }
  // A content word never becomes a stopword ("canned" stays "canned").
  if (w != word && lexicon::stopwords().count(w) && !lexicon::stopwords().count(std::string(word)))
    return std::string(word);
  return w;
}

inline TokenList lemmatize(const TokenList& tokens) {
  TokenList out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(lemmatize_word(t));
  return out;
}

// ---------------------------------------------------------------------------
// Corpus types

struct CleanTweet {
  std::string id;
  TokenList tokens;
  std::optional<std::string> label;

  bool operator==(const CleanTweet&) const = default;
};

struct CleanCorpus {
  std::string digest;  // cache key: pipeline config + source dataset content
  std::vector<CleanTweet> tweets;

  std::size_t size() const { return tweets.size(); }
  bool operator==(const CleanCorpus&) const = default;
};

// Collapses tweets with identical joined token strings; the first occurrence
// is kept and order is stable.
inline std::vector<CleanTweet> dedupe(std::vector<CleanTweet> tweets) {
  std::unordered_set<std::string> seen;
  std::vector<CleanTweet> out;
  for (auto& t : tweets)
    if (seen.insert(join_tokens(t.tokens)).second) out.push_back(std::move(t));
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline

enum class PreprocessOp {
  kStripNonAscii,
  kFilterEnglish,
  kLowercase,
  kGeneralizeTags,
  kRemovePunctuation,
  kTokenize,
  kRemoveStopwords,
  kDropShort,
  kLemmatize,
  kDedupe,
  kSpellCorrect,  // accepted for config compatibility, never applied
};

inline constexpr std::array<std::pair<PreprocessOp, std::string_view>, 11> kOpNames = {{
    {PreprocessOp::kStripNonAscii, "strip_non_ascii"},
    {PreprocessOp::kFilterEnglish, "filter_english"},
    {PreprocessOp::kLowercase, "lowercase"},
    {PreprocessOp::kGeneralizeTags, "generalize_tags"},
    {PreprocessOp::kRemovePunctuation, "remove_punctuation"},
    {PreprocessOp::kTokenize, "tokenize"},
    {PreprocessOp::kRemoveStopwords, "remove_stopwords"},
    {PreprocessOp::kDropShort, "drop_short"},
    {PreprocessOp::kLemmatize, "lemmatize"},
    {PreprocessOp::kDedupe, "dedupe"},
    {PreprocessOp::kSpellCorrect, "spell_correct"},
}};

inline std::string_view op_name(PreprocessOp op) {
  for (const auto& [o, name] : kOpNames)
    if (o == op) return name;
  return "?";
}

inline PreprocessOp parse_op(std::string_view name) {
  for (const auto& [o, n] : kOpNames)
    if (n == name) return o;
  fail(ErrorKind::kUsage, "unknown preprocessing operation '" + std::string(name) + "'");
}

struct PipelineConfig {
  // Tags are generalized before punctuation removal: the tag patterns need
  // '@', ':' and '//' intact.
  std::vector<PreprocessOp> ops = {
      PreprocessOp::kStripNonAscii,   PreprocessOp::kFilterEnglish,
      PreprocessOp::kLowercase,       PreprocessOp::kGeneralizeTags,
      PreprocessOp::kRemovePunctuation, PreprocessOp::kTokenize,
      PreprocessOp::kRemoveStopwords, PreprocessOp::kDropShort,
      PreprocessOp::kLemmatize,       PreprocessOp::kDedupe};
  std::string stopword_list_id{lexicon::kStopwordListId};
  double english_threshold = 0.15;
  std::size_t min_tokens = 2;

  // Punctuation removal and short-tweet pruning before tag generalization.
  static PipelineConfig prose_order() {
    PipelineConfig cfg;
    cfg.ops = {PreprocessOp::kStripNonAscii,    PreprocessOp::kFilterEnglish,
               PreprocessOp::kLowercase,        PreprocessOp::kRemovePunctuation,
               PreprocessOp::kTokenize,         PreprocessOp::kRemoveStopwords,
               PreprocessOp::kDropShort,        PreprocessOp::kGeneralizeTags,
               PreprocessOp::kLemmatize,        PreprocessOp::kDedupe};
    return cfg;
  }

  static std::vector<PreprocessOp> parse_ops(std::string_view csv) {
    std::vector<PreprocessOp> ops;
    std::string item;
    std::istringstream in{std::string(csv)};
    while (std::getline(in, item, ','))
      if (!item.empty()) ops.push_back(parse_op(item));
    return ops;
  }

  void validate() const {
    for (std::size_t i = 0; i < ops.size(); ++i) {
      if (std::count(ops.begin(), ops.end(), ops[i]) > 1)
        fail(ErrorKind::kUsage, "operation '" + std::string(op_name(ops[i])) + "' listed twice");
      if (ops[i] == PreprocessOp::kDedupe && i + 1 != ops.size())
        fail(ErrorKind::kUsage, "dedupe must be the last operation");
    }
    if (stopword_list_id != lexicon::kStopwordListId)
      fail(ErrorKind::kUsage, "unknown stopword list '" + stopword_list_id + "'");
    if (!(english_threshold >= 0.0 && english_threshold <= 1.0))
      fail(ErrorKind::kUsage, "english threshold must lie in [0,1]");
  }

  std::string digest() const {
    Digest d;
    d.add("pipeline-v1");
    for (auto op : ops) d.add(op_name(op));
    d.add(stopword_list_id).add(lexicon::lexicon_digest()).add_real(english_threshold);
    d.add_int(static_cast<std::int64_t>(min_tokens));
    return d.hex();
  }
};

inline std::string clean_cache_key(const PipelineConfig& cfg, const Dataset& d) {
  return Digest().add(cfg.digest()).add(dataset_digest(d)).hex();
}

struct StageReport {
  std::string op;
  std::size_t removed = 0;  // tweets dropped by this stage
  long long token_delta = 0;  // tokens after minus tokens before, over tweets entering the stage
};

struct PreprocessReport {
  std::size_t input_count = 0;
  std::size_t output_count = 0;
  std::vector<StageReport> stages;
  std::size_t duplicates_removed = 0;
  std::vector<std::string> warnings;

  std::size_t total_removed() const {
    std::size_t n = 0;
    for (const auto& s : stages) n += s.removed;
    return n;
  }

  std::string render() const {
    std::ostringstream out;
    out << "input tweets: " << input_count << "\n";
    for (const auto& s : stages)
      out << "  " << s.op << ": removed " << s.removed << ", token delta " << s.token_delta
          << "\n";
    out << "duplicates removed: " << duplicates_removed << "\n";
    out << "output tweets: " << output_count << "\n";
    return out.str();
  }
};

struct PreprocessResult {
  CleanCorpus corpus;
  PreprocessReport report;
};

inline PreprocessResult run_pipeline(const Dataset& d, const PipelineConfig& cfg = {}) {
  cfg.validate();
  struct Work {
    std::size_t source;
    std::string text;
  };
  std::vector<Work> live;
  live.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) live.push_back({i, d.tweets[i].text});

  PreprocessResult result;
  auto& report = result.report;
  report.input_count = d.size();

  auto count_tokens = [](const std::string& s) { return static_cast<long long>(split_tokens(s).size()); };
  for (auto op : cfg.ops) {
    if (op == PreprocessOp::kSpellCorrect) {
      report.warnings.push_back("spell_correct is not supported and was skipped");
      continue;
    }
    StageReport stage{std::string(op_name(op))};
    if (op == PreprocessOp::kDedupe) {
      // Collapse on the whitespace-normalized text; same key as dedupe().
      std::unordered_set<std::string> seen;
      std::vector<Work> kept;
      for (auto& w : live) {
        auto key = join_tokens(split_tokens(w.text));
        if (seen.insert(key).second) {
          kept.push_back(std::move(w));
        } else {
          ++stage.removed;
          stage.token_delta -= count_tokens(key);
        }
      }
      live = std::move(kept);
      report.duplicates_removed = stage.removed;
      report.stages.push_back(stage);
      continue;
    }
    std::vector<Work> kept;
    kept.reserve(live.size());
    for (auto& w : live) {
      long long before = count_tokens(w.text);
      std::optional<std::string> next;
      switch (op) {
        case PreprocessOp::kStripNonAscii: next = strip_non_ascii(w.text); break;
        case PreprocessOp::kFilterEnglish:
          if (is_english(w.text, cfg.english_threshold)) next = std::move(w.text);
          break;
        case PreprocessOp::kLowercase: next = lowercase(w.text); break;
        case PreprocessOp::kGeneralizeTags: next = generalize_tags(w.text); break;
        case PreprocessOp::kRemovePunctuation: next = remove_punctuation(w.text); break;
        case PreprocessOp::kTokenize: next = join_tokens(split_tokens(w.text)); break;
        case PreprocessOp::kRemoveStopwords:
          next = join_tokens(remove_stopwords(split_tokens(w.text)));
          break;
        case PreprocessOp::kDropShort:
          if (auto t = drop_if_short(split_tokens(w.text), cfg.min_tokens)) next = join_tokens(*t);
          break;
        case PreprocessOp::kLemmatize: next = join_tokens(lemmatize(split_tokens(w.text))); break;
        case PreprocessOp::kDedupe:
        case PreprocessOp::kSpellCorrect: break;
      }
      if (next) {
        stage.token_delta += count_tokens(*next) - before;
        kept.push_back({w.source, std::move(*next)});
      } else {
        stage.token_delta -= before;
        ++stage.removed;
      }
    }
    live = std::move(kept);
    report.stages.push_back(stage);
  }

  // A tweet emptied by a configuration without drop_short is never emitted.
  StageReport empty{"final_empty"};
  for (auto& w : live) {
    auto tokens = split_tokens(w.text);
    if (tokens.empty()) {
      ++empty.removed;
      continue;
    }
    const auto& src = d.tweets[w.source];
    result.corpus.tweets.push_back({src.id, std::move(tokens), src.label});
  }
  if (empty.removed) report.stages.push_back(empty);

  result.corpus.digest = clean_cache_key(cfg, d);
  report.output_count = result.corpus.size();
  return result;
}

// Re-feeds a clean corpus as raw text (tokens joined by spaces).
inline Dataset as_dataset(const CleanCorpus& c, const LabelDomain& domain) {
  Dataset d{domain, {}};
  for (const auto& t : c.tweets) d.tweets.push_back({t.id, join_tokens(t.tokens), t.label});
  return d;
}

// Original texts aligned with the clean corpus rows (rules read raw text).
inline std::vector<std::string> raw_texts(const CleanCorpus& c, const Dataset& source) {
  std::unordered_map<std::string_view, std::string_view> by_id;
  for (const auto& t : source.tweets) by_id.emplace(t.id, t.text);
  std::vector<std::string> out;
  out.reserve(c.size());
  for (const auto& t : c.tweets) {
    auto it = by_id.find(t.id);
    if (it == by_id.end())
      fail(ErrorKind::kValidation, "clean tweet '" + t.id + "' is missing from the source dataset");
    out.emplace_back(it->second);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence: header "CLEAN v1 <digest> <count>", then one JSON object per line.

inline std::string serialize_clean(const CleanCorpus& c) {
  std::ostringstream out;
  out << "CLEAN v1 " << c.digest << ' ' << c.size() << '\n';
  for (const auto& t : c.tweets) {
    nlohmann::json j{{"id", t.id}, {"tokens", t.tokens}};
    if (t.label) j["label"] = *t.label;
    out << j.dump() << '\n';
  }
  return out.str();
}

inline void save_clean(const std::filesystem::path& path, const CleanCorpus& c) {
  write_file_atomic(path, serialize_clean(c));
}

// Reads the header digest without parsing the body.
inline std::string peek_clean_digest(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string magic, version, digest;
  in >> magic >> version >> digest;
  if (magic != "CLEAN" || version != "v1" || digest.empty())
    fail(ErrorKind::kFormat, path.string() + ": not a CLEAN v1 file");
  return digest;
}

// Throws kStaleCache when `expected_digest` is given and differs from the header.
inline CleanCorpus load_clean(const std::filesystem::path& path,
                              std::optional<std::string_view> expected_digest = std::nullopt) {
  auto in = open_input(path);
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic, version;
  CleanCorpus c;
  std::size_t count = 0;
  if (!(hs >> magic >> version >> c.digest >> count) || magic != "CLEAN" || version != "v1")
    fail(ErrorKind::kFormat, path.string() + ": bad CLEAN header");
  if (expected_digest && *expected_digest != c.digest)
    fail(ErrorKind::kStaleCache, path.string() + ": clean corpus digest " + c.digest +
                                     " does not match expected " + std::string(*expected_digest));
  std::string line;
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      CleanTweet t{j.at("id").get<std::string>(), j.at("tokens").get<TokenList>(), std::nullopt};
      if (j.contains("label")) t.label = j["label"].get<std::string>();
      c.tweets.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kFormat, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (c.size() != count)
    fail(ErrorKind::kFormat, path.string() + ": header declares " + std::to_string(count) +
                                 " tweets, found " + std::to_string(c.size()));
  return c;
}

}  // namespace rweet
