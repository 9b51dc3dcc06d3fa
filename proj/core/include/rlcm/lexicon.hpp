#pragma once

#include <array>
#include <string>
#include <vector>

namespace rlcm::lexicon {

enum class Category { self_correction, confidence_hedging, knowledge_gap };
inline constexpr std::array<const char*, 3> kCategoryNames = {
    "self_correction", "confidence_hedging", "knowledge_gap"};

// Epistemic-uncertainty phrase lists, one per category. Phrases are
// lowercase with straight apostrophes.
struct IndicatorLexicon {
  std::vector<std::string> self_correction;
  std::vector<std::string> confidence_hedging;
  std::vector<std::string> knowledge_gap;

  const std::vector<std::string>& phrases(Category c) const;
};

// Built-in default phrase lists (mirrored by data/uncertainty_lexicon.txt).
IndicatorLexicon default_lexicon();

// Loads a lexicon file: [category] section headers, one phrase per line,
// '#' comments. Throws ParseError on unknown sections or empty lists.
IndicatorLexicon load_lexicon(const std::string& path);

struct CategoryCounts {
  long self_correction = 0;
  long confidence_hedging = 0;
  long knowledge_gap = 0;

  long& at(Category c);
  long at(Category c) const;
  long total() const { return self_correction + confidence_hedging + knowledge_gap; }
};

// Case-insensitive phrase counting with curly apostrophes normalized.
// Within a category, matches are longest-phrase-first and non-overlapping;
// matches must sit at word boundaries on both ends. Categories are counted
// independently.
CategoryCounts count_indicators(const std::string& text, const IndicatorLexicon& lex);

// Whitespace-separated word count, the per-token denominator.
long count_tokens(const std::string& text);

struct CategoryRates {
  double per_token = 0.0;
  double per_rollout = 0.0;
};

// counts / token_count and counts / rollout_count per category. Throws on
// zero denominators.
std::array<CategoryRates, 3> indicator_rates(const CategoryCounts& counts,
                                             long token_count, long rollout_count);

}  // namespace rlcm::lexicon
