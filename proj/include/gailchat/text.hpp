#pragma once

// Rule-based utterance normalizer: lowercasing, punctuation and contraction
// splitting, and lexicon-driven entity replacement producing the category
// tokens <person>, <cardinal>, <date>, <time>, <org>, <gpe>, <norp> and
// <language>.

#include <string>
#include <unordered_set>
#include <vector>

namespace gailchat {

struct EntityLexicons {
  std::unordered_set<std::string> person;
  std::unordered_set<std::string> cardinal_words;
  std::unordered_set<std::string> date_words;
  std::unordered_set<std::string> time_words;
  std::unordered_set<std::string> org;
  std::unordered_set<std::string> gpe;
  std::unordered_set<std::string> norp_only;
  // Demonyms read as <language> after a speaking verb or "in", else <norp>.
  std::unordered_set<std::string> demonyms;

  // Word lists for every category except person, which is harvested from
  // corpus speaker names via add_person_names.
  static EntityLexicons builtin();

  void add_person_names(const std::vector<std::string>& speaker_names);

  void save(const std::string& path) const;  // person list only; rest is builtin
  static EntityLexicons load(const std::string& path);
};

// Decode a raw ISO-8859-1 byte string to UTF-8.
std::string latin1_to_utf8(const std::string& raw);

// Lowercase + tokenize only (no entity replacement).
std::vector<std::string> tokenize(const std::string& text);

// Full normalization: tokenize then replace entity spans by category tokens.
std::vector<std::string> normalize(const std::string& text, const EntityLexicons& lex);

std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace gailchat
