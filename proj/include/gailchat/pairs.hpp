#pragma once

// State/action pair extraction from normalized conversations, plus the
// JSON-Lines pair file format.

#include <string>
#include <vector>

#include "gailchat/corpus.hpp"
#include "gailchat/text.hpp"
#include "gailchat/vocab.hpp"

namespace gailchat {

struct DialogPair {
  TokenSeq state;
  TokenSeq action;
};

struct PairStats {
  std::size_t emitted = 0;
  std::size_t dropped = 0;  // length or vocabulary filter
};

// Normalized view of a corpus: per conversation, per utterance, token strings.
using NormalizedConversations = std::vector<std::vector<std::vector<std::string>>>;

NormalizedConversations normalize_conversations(const Corpus& corpus, const EntityLexicons& lex);

// Every utterance with 1..max_len tokens, the stream the vocabulary is built on.
std::vector<std::vector<std::string>> restricted_streams(const NormalizedConversations& convs,
                                                         int max_len = 5);

// Adjacent (state, action) pairs where both sides pass the length and
// in-vocabulary filters. max_turns=2 additionally emits pairs whose state is
// the concatenation of the two preceding turns (when it still fits max_len).
std::vector<DialogPair> extract_pairs(const NormalizedConversations& convs, const Vocabulary& vocab,
                                      int max_len = 5, int max_turns = 1,
                                      PairStats* stats = nullptr);

// JSON Lines: {"state": [token strings], "action": [token strings]}
void save_pairs_jsonl(const std::string& path, const std::vector<DialogPair>& pairs,
                      const Vocabulary& vocab);
std::vector<DialogPair> load_pairs_jsonl(const std::string& path, const Vocabulary& vocab);

}  // namespace gailchat
