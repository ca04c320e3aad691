#include "gailchat/pairs.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace gailchat {

NormalizedConversations normalize_conversations(const Corpus& corpus, const EntityLexicons& lex) {
  NormalizedConversations out;
  out.reserve(corpus.conversations.size());
  for (const auto& conv : corpus.conversations) {
    std::vector<std::vector<std::string>> norm;
    norm.reserve(conv.utterances.size());
    for (const auto& utt : conv.utterances) norm.push_back(normalize(utt.text, lex));
    out.push_back(std::move(norm));
  }
  return out;
}

std::vector<std::vector<std::string>> restricted_streams(const NormalizedConversations& convs,
                                                         int max_len) {
  std::vector<std::vector<std::string>> streams;
  for (const auto& conv : convs)
    for (const auto& utt : conv)
      if (!utt.empty() && utt.size() <= static_cast<std::size_t>(max_len)) streams.push_back(utt);
  return streams;
}

namespace {

// in [1, max_len] and fully in-vocabulary
bool usable(const std::vector<std::string>& tokens, const Vocabulary& vocab, int max_len,
            TokenSeq& ids) {
  if (tokens.empty() || tokens.size() > static_cast<std::size_t>(max_len)) return false;
  ids.clear();
  for (const auto& tok : tokens) {
    const int id = vocab.id(tok);
    if (id < 0) return false;
    ids.push_back(id);
  }
  return true;
}

}  // namespace

std::vector<DialogPair> extract_pairs(const NormalizedConversations& convs, const Vocabulary& vocab,
                                      int max_len, int max_turns, PairStats* stats) {
  if (max_turns < 1 || max_turns > 2)
    throw std::invalid_argument("extract_pairs: max_turns must be 1 or 2");
  std::vector<DialogPair> pairs;
  PairStats local;
  TokenSeq state_ids, action_ids;
  for (const auto& conv : convs) {
    for (std::size_t i = 0; i + 1 < conv.size(); ++i) {
      if (usable(conv[i], vocab, max_len, state_ids) &&
          usable(conv[i + 1], vocab, max_len, action_ids)) {
        pairs.push_back({state_ids, action_ids});
        ++local.emitted;
      } else {
        ++local.dropped;
      }
      if (max_turns == 2 && i + 2 < conv.size()) {
        std::vector<std::string> two_turn = conv[i];
        two_turn.insert(two_turn.end(), conv[i + 1].begin(), conv[i + 1].end());
        if (usable(two_turn, vocab, max_len, state_ids) &&
            usable(conv[i + 2], vocab, max_len, action_ids)) {
          pairs.push_back({state_ids, action_ids});
          ++local.emitted;
        } else {
          ++local.dropped;
        }
      }
    }
  }
  if (stats) *stats = local;
  return pairs;
}

void save_pairs_jsonl(const std::string& path, const std::vector<DialogPair>& pairs,
                      const Vocabulary& vocab) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write pairs file " + path);
  for (const auto& pair : pairs) {
    nlohmann::json j;
    j["state"] = vocab.decode(pair.state);
    j["action"] = vocab.decode(pair.action);
    f << j.dump() << "\n";
  }
}

std::vector<DialogPair> load_pairs_jsonl(const std::string& path, const Vocabulary& vocab) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read pairs file " + path);
  std::vector<DialogPair> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    DialogPair p;
    p.state = vocab.encode(j.at("state").get<std::vector<std::string>>());
    p.action = vocab.encode(j.at("action").get<std::vector<std::string>>());
    if (p.state.empty() || p.action.empty())
      throw std::runtime_error("pairs file " + path + " line " + std::to_string(lineno) +
                               ": empty sequence");
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace gailchat
