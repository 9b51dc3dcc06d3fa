#include "rlcm/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "rlcm/errors.hpp"

namespace rlcm::lexicon {
namespace {

// Lowercase ASCII and normalize UTF-8 curly apostrophes (U+2019) to '.
std::string normalize(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (c == 0xE2 && i + 2 < text.size() &&
        static_cast<unsigned char>(text[i + 1]) == 0x80 &&
        static_cast<unsigned char>(text[i + 2]) == 0x99) {
      out.push_back('\'');
      i += 2;
    } else {
      out.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  return out;
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '\'';
}

// Non-overlapping longest-phrase-first matches at word boundaries.
long count_category(const std::string& text, std::vector<std::string> phrases) {
  std::stable_sort(phrases.begin(), phrases.end(),
                   [](const std::string& a, const std::string& b) {
                     return a.size() > b.size();
                   });
  std::vector<bool> occupied(text.size(), false);
  long count = 0;
  for (const std::string& phrase : phrases) {
    if (phrase.empty()) continue;
    std::size_t pos = 0;
    while ((pos = text.find(phrase, pos)) != std::string::npos) {
      const std::size_t end = pos + phrase.size();
      const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
      const bool right_ok = end == text.size() || !is_word_char(text[end]);
      bool free_span = true;
      for (std::size_t i = pos; i < end && free_span; ++i)
        if (occupied[i]) free_span = false;
      if (left_ok && right_ok && free_span) {
        for (std::size_t i = pos; i < end; ++i) occupied[i] = true;
        ++count;
        pos = end;
      } else {
        ++pos;
      }
    }
  }
  return count;
}

}  // namespace

const std::vector<std::string>& IndicatorLexicon::phrases(Category c) const {
  switch (c) {
    case Category::self_correction: return self_correction;
    case Category::confidence_hedging: return confidence_hedging;
    case Category::knowledge_gap: return knowledge_gap;
  }
  throw ValidationError("category", "invalid category");
}

long& CategoryCounts::at(Category c) {
  switch (c) {
    case Category::self_correction: return self_correction;
    case Category::confidence_hedging: return confidence_hedging;
    case Category::knowledge_gap: return knowledge_gap;
  }
  throw ValidationError("category", "invalid category");
}

long CategoryCounts::at(Category c) const {
  return const_cast<CategoryCounts*>(this)->at(c);
}

IndicatorLexicon default_lexicon() {
  IndicatorLexicon lex;
  lex.self_correction = {
      "wait", "hmm", "hold on", "let me reconsider", "let me redo",
      "let me think", "let me verify", "let's recalculate", "actually",
      "on second thought", "going back", "scratch that", "i made a mistake",
      "that's wrong", "that was wrong"};
  lex.confidence_hedging = {
      "perhaps", "maybe", "might", "possibly", "likely", "unlikely",
      "probably", "could be", "tends to", "i think", "i believe", "i guess",
      "i suspect", "it seems", "seems like", "seems to", "it appears",
      "apparently", "presumably", "approximately", "roughly", "around",
      "should be", "i'm not certain", "i'm unsure"};
  lex.knowledge_gap = {
      "i'm not sure", "not sure", "i don't know", "unclear", "without more",
      "not specified", "i cannot", "i can't"};
  return lex;
}

IndicatorLexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open lexicon file: " + path);
  IndicatorLexicon lex;
  std::vector<std::string>* current = nullptr;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
      line.pop_back();
    std::size_t b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    line = line.substr(b);
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError(path + ":" + std::to_string(lineno) + ": bad section header");
      const std::string section = line.substr(1, line.size() - 2);
      if (section == "self_correction") current = &lex.self_correction;
      else if (section == "confidence_hedging") current = &lex.confidence_hedging;
      else if (section == "knowledge_gap") current = &lex.knowledge_gap;
      else throw ParseError(path + ":" + std::to_string(lineno) + ": unknown section '" + section + "'");
    } else {
      if (!current)
        throw ParseError(path + ":" + std::to_string(lineno) + ": phrase before any section");
      current->push_back(normalize(line));
    }
  }
  if (lex.self_correction.empty() || lex.confidence_hedging.empty() ||
      lex.knowledge_gap.empty())
    throw ParseError(path + ": every category needs at least one phrase");
  return lex;
}

CategoryCounts count_indicators(const std::string& text, const IndicatorLexicon& lex) {
  const std::string norm = normalize(text);
  CategoryCounts counts;
  counts.self_correction = count_category(norm, lex.self_correction);
  counts.confidence_hedging = count_category(norm, lex.confidence_hedging);
  counts.knowledge_gap = count_category(norm, lex.knowledge_gap);
  return counts;
}

long count_tokens(const std::string& text) {
  long tokens = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c));
    if (!space && !in_word) ++tokens;
    in_word = !space;
  }
  return tokens;
}

std::array<CategoryRates, 3> indicator_rates(const CategoryCounts& counts,
                                             long token_count, long rollout_count) {
  if (token_count < 1) throw ValidationError("token_count", "must be >= 1");
  if (rollout_count < 1) throw ValidationError("rollout_count", "must be >= 1");
  std::array<CategoryRates, 3> rates;
  const long raw[3] = {counts.self_correction, counts.confidence_hedging,
                       counts.knowledge_gap};
  for (int i = 0; i < 3; ++i) {
    rates[i].per_token = static_cast<double>(raw[i]) / static_cast<double>(token_count);
    rates[i].per_rollout = static_cast<double>(raw[i]) / static_cast<double>(rollout_count);
  }
  return rates;
}

}  // namespace rlcm::lexicon
