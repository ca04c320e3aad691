#include "gailchat/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "gailchat/checkpoint.hpp"
#include "gailchat/config.hpp"
#include "gailchat/corpus.hpp"
#include "gailchat/discrim.hpp"
#include "gailchat/embedding.hpp"
#include "gailchat/pairs.hpp"
#include "gailchat/policy.hpp"
#include "gailchat/probe.hpp"
#include "gailchat/sgns.hpp"
#include "gailchat/train.hpp"
#include "gailchat/vocab.hpp"

namespace fs = std::filesystem;

namespace gailchat {

namespace {

// rng stream ids per stage, all forked from the single run seed
enum Stream : std::uint64_t {
  kStreamEmbedInit = 1,
  kStreamSgns = 2,
  kStreamPolicyInit = 3,
  kStreamBc = 4,
  kStreamDiscrimInit = 5,
  kStreamGail = 6,
  kStreamProbe = 7,
  kStreamChat = 8,
  kStreamCompare = 9,
};

std::string default_work_dir() {
  if (const char* env = std::getenv("GAILCHAT_WORK_DIR")) return env;
  return "work";
}

PolicyConfig policy_config(const RunConfig& cfg) {
  PolicyConfig pc;
  pc.hidden = cfg.hidden;
  pc.layers = cfg.layers;
  pc.max_len = cfg.max_len;
  pc.temperature = cfg.temperature;
  return pc;
}

// a model checkpoint directory: manifest.json + params.bin, plus vocab.tsv,
// config.json and entities.json so the directory is self-contained for
// scoring and chat
void save_model_dir(const std::string& dir,
                    const std::vector<std::pair<std::string, NamedValues>>& entries,
                    const Vocabulary& vocab, const RunConfig& cfg, const EntityLexicons& lex) {
  save_checkpoint(dir, entries);
  vocab.save_tsv((fs::path(dir) / "vocab.tsv").string());
  cfg.save_file((fs::path(dir) / "config.json").string());
  lex.save((fs::path(dir) / "entities.json").string());
}

struct LoadedModelDir {
  CheckpointData data;
  Vocabulary vocab;
  RunConfig cfg;
  EntityLexicons lex;
};

LoadedModelDir load_model_dir(const std::string& dir) {
  LoadedModelDir out;
  out.data = load_checkpoint(dir);
  out.vocab = Vocabulary::load_tsv((fs::path(dir) / "vocab.tsv").string());
  const auto cfg_path = fs::path(dir) / "config.json";
  if (fs::exists(cfg_path)) out.cfg.load_file(cfg_path.string());
  const auto lex_path = fs::path(dir) / "entities.json";
  out.lex = fs::exists(lex_path) ? EntityLexicons::load(lex_path.string())
                                 : EntityLexicons::builtin();
  return out;
}

// prompt -> in-vocabulary token ids; OOV tokens dropped with a note
TokenSeq encode_prompt(const std::string& text, const Vocabulary& vocab, const EntityLexicons& lex,
                       int max_len, bool warn) {
  TokenSeq ids;
  for (const auto& tok : normalize(text, lex)) {
    const int id = vocab.id(tok);
    if (id < 0) {
      if (warn) std::cerr << "note: dropping out-of-vocabulary token '" << tok << "'\n";
      continue;
    }
    if (static_cast<int>(ids.size()) == max_len) {
      if (warn) std::cerr << "note: truncating prompt to " << max_len << " tokens\n";
      break;
    }
    ids.push_back(id);
  }
  return ids;
}

std::vector<std::vector<std::string>> pair_streams(const std::vector<DialogPair>& pairs,
                                                   const Vocabulary& vocab) {
  std::vector<std::vector<std::string>> streams;
  streams.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    streams.push_back(vocab.decode(p.state));
    streams.push_back(vocab.decode(p.action));
  }
  return streams;
}

std::string render(const Vocabulary& vocab, const TokenSeq& ids) {
  return join_tokens(vocab.decode(ids));
}

int cmd_prepare(const RunConfig& cfg, const std::string& out_dir) {
  const fs::path lines = fs::path(cfg.corpus_dir) / "movie_lines.txt";
  const fs::path convs = fs::path(cfg.corpus_dir) / "movie_conversations.txt";
  auto corpus = parse_corpus(lines.string(), convs.string());
  std::cout << "parsed " << corpus.stats.parsed_lines << " utterances, "
            << corpus.stats.conversations << " conversations (" << corpus.stats.malformed_lines
            << " malformed lines, " << corpus.stats.skipped_conversations
            << " skipped conversations)\n";

  auto lex = EntityLexicons::builtin();
  lex.add_person_names(corpus.speaker_names);

  auto normalized = normalize_conversations(corpus, lex);
  auto streams = restricted_streams(normalized, cfg.max_len);
  auto vocab = Vocabulary::build(streams, cfg.min_count);
  std::cout << "vocabulary: " << vocab.size() << " tokens (min_count " << cfg.min_count << ")\n";

  PairStats stats;
  auto pairs = extract_pairs(normalized, vocab, cfg.max_len, cfg.max_turns, &stats);
  std::cout << "pairs: " << stats.emitted << " emitted, " << stats.dropped
            << " dropped by length/vocabulary filters\n";

  fs::create_directories(out_dir);
  vocab.save_tsv((fs::path(out_dir) / "vocab.tsv").string());
  save_pairs_jsonl((fs::path(out_dir) / "pairs.jsonl").string(), pairs, vocab);
  lex.save((fs::path(out_dir) / "entities.json").string());
  cfg.save_file((fs::path(out_dir) / "config.json").string());
  return 0;
}

int cmd_vocab(const std::string& vocab_path, int top) {
  auto vocab = Vocabulary::load_tsv(vocab_path);
  std::cout << "size " << vocab.size() << "\n";
  std::cout << "specials:";
  for (const auto& sp : Vocabulary::special_tokens())
    std::cout << " " << sp << "(" << vocab.count(sp) << ")";
  std::cout << "\n";
  const int specials = static_cast<int>(Vocabulary::special_tokens().size());
  for (int i = specials; i < std::min<int>(specials + top, static_cast<int>(vocab.size())); ++i)
    std::cout << i << "\t" << vocab.token(i) << "\t" << vocab.count(vocab.token(i)) << "\n";
  return 0;
}

int cmd_embed(const RunConfig& cfg, const std::string& pairs_path, const std::string& vocab_path,
              const std::string& vectors_in, const std::string& vectors_out,
              const std::string& nearest_token, int nearest_k) {
  auto vocab = Vocabulary::load_tsv(vocab_path);
  Rng master(cfg.seed);
  Rng init_rng = master.fork(kStreamEmbedInit);

  EmbeddingMatrix emb = vectors_in.empty()
                            ? random_embedding(vocab, cfg.dim, init_rng)
                            : load_word2vec_text(vectors_in, vocab, cfg.dim, init_rng);

  if (!pairs_path.empty() && cfg.embed_epochs > 0) {
    auto pairs = load_pairs_jsonl(pairs_path, vocab);
    SgnsConfig scfg;
    scfg.window = cfg.embed_window;
    scfg.negatives = cfg.embed_negatives;
    scfg.lr = cfg.embed_lr;
    scfg.epochs = cfg.embed_epochs;
    Rng sgns_rng = master.fork(kStreamSgns);
    const auto trained = finetune_skipgram(pair_streams(pairs, vocab), emb, vocab, scfg, sgns_rng);
    std::cout << "fine-tuned on " << trained << " center/context pairs over " << cfg.embed_epochs
              << " epochs\n";
  }
  if (!vectors_out.empty()) {
    save_word2vec_text(vectors_out, emb, vocab);
    std::cout << "wrote " << vectors_out << "\n";
  }
  if (!nearest_token.empty()) {
    for (const auto& [tok, sim] : nearest(emb, vocab, nearest_token, nearest_k)) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.4f", sim);
      std::cout << tok << "\t" << buf << "\n";
    }
  }
  return 0;
}

int cmd_pretrain(const RunConfig& cfg, const std::string& pairs_path, const std::string& vocab_path,
                 const std::string& vectors_path, const std::string& out_dir) {
  auto vocab = Vocabulary::load_tsv(vocab_path);
  auto pairs = load_pairs_jsonl(pairs_path, vocab);
  Rng master(cfg.seed);
  Rng emb_rng = master.fork(kStreamEmbedInit);
  EmbeddingMatrix emb = vectors_path.empty()
                            ? random_embedding(vocab, cfg.dim, emb_rng)
                            : load_word2vec_text(vectors_path, vocab, cfg.dim, emb_rng);

  Rng init_rng = master.fork(kStreamPolicyInit);
  PolicyModel<float> policy(emb, policy_config(cfg), init_rng);
  std::cout << "policy parameters: " << policy.params().total_values() << "\n";

  Rng bc_rng = master.fork(kStreamBc);
  auto result = pretrain_bc(pairs, policy, cfg.bc_epochs, cfg.batch, cfg.lr_bc, bc_rng);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "initial ce %.4f cosine %.4f", result.initial_ce,
                result.initial_cosine);
  std::cout << buf << "\n";
  for (std::size_t e = 0; e < result.epochs.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "epoch %zu ce %.4f cosine %.4f", e + 1, result.epochs[e].ce,
                  result.epochs[e].cosine);
    std::cout << buf << "\n";
  }

  EntityLexicons lex = EntityLexicons::builtin();
  const auto lex_path = fs::path(pairs_path).parent_path() / "entities.json";
  if (fs::exists(lex_path)) lex = EntityLexicons::load(lex_path.string());
  save_model_dir(out_dir, policy.dump(), vocab, cfg, lex);
  std::cout << "wrote policy checkpoint to " << out_dir << "\n";
  return 0;
}

int cmd_gail(const RunConfig& cfg, const std::string& pairs_path, const std::string& init_dir,
             const std::string& out_dir, const std::string& metrics_path) {
  auto init = load_model_dir(init_dir);
  RunConfig run_cfg = cfg;
  run_cfg.hidden = init.cfg.hidden;
  run_cfg.layers = init.cfg.layers;
  run_cfg.max_len = init.cfg.max_len;
  run_cfg.dim = init.cfg.dim;

  auto pairs = load_pairs_jsonl(pairs_path, init.vocab);
  auto policy = PolicyModel<float>::from_checkpoint(init.data, policy_config(run_cfg));

  Rng master(run_cfg.seed);
  Rng d_rng = master.fork(kStreamDiscrimInit);
  EmbeddingMatrix emb(init.vocab.size(), run_cfg.dim);
  emb.values() = init.data.at("embedding").values;
  DiscriminatorModel<float> discrim(emb, policy_config(run_cfg), d_rng);
  discrim.init_encoders_from(policy.params());

  GailConfig gcfg;
  gcfg.n_states = run_cfg.n_states;
  gcfg.d_steps_per_p_step = run_cfg.d_steps;
  gcfg.batch_size = run_cfg.batch;
  gcfg.entropy_coef = run_cfg.entropy_coef;
  gcfg.baseline = run_cfg.baseline;
  gcfg.lr_policy = run_cfg.lr_policy;
  gcfg.lr_discrim = run_cfg.lr_discrim;
  gcfg.temperature = run_cfg.temperature;

  Rng gail_rng = master.fork(kStreamGail);
  auto result = gail_train(pairs, policy, discrim, gcfg, gail_rng);
  if (!metrics_path.empty()) save_metrics_csv(metrics_path, result.metrics);
  if (!result.metrics.empty()) {
    const auto& last = result.metrics.back();
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "finished %lld policy steps: d_loss %.4f p_loss %.4f d_acc %.4f mean_reward %.4f",
                  static_cast<long long>(last.step), last.d_loss, last.p_loss, last.d_acc,
                  last.mean_reward);
    std::cout << buf << "\n";
  }

  save_model_dir((fs::path(out_dir) / "policy").string(), policy.dump(), init.vocab, run_cfg,
                 init.lex);
  save_model_dir((fs::path(out_dir) / "discrim").string(), discrim.dump(), init.vocab, run_cfg,
                 init.lex);
  run_cfg.save_file((fs::path(out_dir) / "config.json").string());
  std::cout << "wrote checkpoints to " << out_dir << "\n";
  return 0;
}

int cmd_score(const std::string& discrim_dir, const std::string& state_text,
              const std::string& action_text) {
  auto loaded = load_model_dir(discrim_dir);
  auto discrim = DiscriminatorModel<float>::from_checkpoint(loaded.data, policy_config(loaded.cfg));
  const auto state = encode_prompt(state_text, loaded.vocab, loaded.lex, loaded.cfg.max_len, true);
  const auto action = encode_prompt(action_text, loaded.vocab, loaded.lex, loaded.cfg.max_len, true);
  if (state.empty() || action.empty())
    throw std::runtime_error("score: state/action has no in-vocabulary tokens");
  auto rv = discrim.reward(state, action);
  nlohmann::json j;
  j["d"] = rv.d;
  j["r"] = rv.r;
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_probe(const RunConfig& cfg, const std::string& pairs_path, const std::string& policy_dir,
              const std::string& discrim_dir, const std::string& out_path,
              const std::string& hist_path, int n_states, int threads) {
  auto ploaded = load_model_dir(policy_dir);
  auto dloaded = load_model_dir(discrim_dir);
  auto policy = PolicyModel<float>::from_checkpoint(ploaded.data, policy_config(ploaded.cfg));
  auto discrim = DiscriminatorModel<float>::from_checkpoint(dloaded.data, policy_config(dloaded.cfg));
  auto pairs = load_pairs_jsonl(pairs_path, ploaded.vocab);
  if (n_states > 0 && static_cast<std::size_t>(n_states) < pairs.size()) pairs.resize(n_states);

  Rng master(cfg.seed);
  Rng probe_rng = master.fork(kStreamProbe);
  auto rows =
      probe_rewards(pairs, policy, discrim, ploaded.vocab, cfg.noise_per_state, probe_rng, threads);

  double sums[3] = {0, 0, 0};
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& r : rows) {
    sums[static_cast<int>(r.source)] += r.reward;
    ++counts[static_cast<int>(r.source)];
  }
  char buf[200];
  std::snprintf(buf, sizeof(buf), "mean reward: expert %.4f policy %.4f noise %.4f",
                counts[0] ? sums[0] / counts[0] : 0.0, counts[1] ? sums[1] / counts[1] : 0.0,
                counts[2] ? sums[2] / counts[2] : 0.0);
  std::cout << buf << "\n";

  auto flags = flag_adversarial(rows, cfg.percentile);
  std::cout << flags.size() << " adversarial noise actions above the " << cfg.percentile
            << "th expert-reward percentile\n";
  for (std::size_t i = 0; i < std::min<std::size_t>(flags.size(), 5); ++i) {
    std::snprintf(buf, sizeof(buf), "  r %.4f > %.4f  ", flags[i].row.reward, flags[i].threshold);
    std::cout << buf << "state: " << render(ploaded.vocab, flags[i].row.state)
              << " | noise action: " << render(ploaded.vocab, flags[i].row.action) << "\n";
  }

  auto [top, bottom] = rank_extremes(rows, std::min<int>(4, static_cast<int>(pairs.size())));
  std::cout << "highest-reward policy actions:\n";
  for (const auto& r : top) {
    std::snprintf(buf, sizeof(buf), "  r %.4f  ", r.reward);
    std::cout << buf << render(ploaded.vocab, r.state) << " -> " << render(ploaded.vocab, r.action)
              << "\n";
  }
  std::cout << "lowest-reward policy actions:\n";
  for (const auto& r : bottom) {
    std::snprintf(buf, sizeof(buf), "  r %.4f  ", r.reward);
    std::cout << buf << render(ploaded.vocab, r.state) << " -> " << render(ploaded.vocab, r.action)
              << "\n";
  }

  save_probe_jsonl(out_path, rows, ploaded.vocab);
  if (!hist_path.empty()) save_histogram_csv(hist_path, reward_histogram(rows, cfg.hist_bins));
  cfg.save_file(out_path + ".config.json");
  return 0;
}

int cmd_compare(const RunConfig& cfg, const std::string& pairs_path, const std::string& bc_dir,
                const std::string& gail_dir, const std::string& discrim_dir, int n_states,
                int samples) {
  auto bc_loaded = load_model_dir(bc_dir);
  auto gail_loaded = load_model_dir(gail_dir);
  auto d_loaded = load_model_dir(discrim_dir);
  auto bc = PolicyModel<float>::from_checkpoint(bc_loaded.data, policy_config(bc_loaded.cfg));
  auto gail = PolicyModel<float>::from_checkpoint(gail_loaded.data, policy_config(gail_loaded.cfg));
  auto discrim = DiscriminatorModel<float>::from_checkpoint(d_loaded.data, policy_config(d_loaded.cfg));
  auto pairs = load_pairs_jsonl(pairs_path, bc_loaded.vocab);
  if (n_states > 0 && static_cast<std::size_t>(n_states) < pairs.size()) pairs.resize(n_states);

  Rng master(cfg.seed);
  Rng cmp_rng = master.fork(kStreamCompare);
  auto table = compare_policies(pairs, bc, gail, discrim, samples, cmp_rng);
  const auto& vocab = bc_loaded.vocab;
  for (const auto& row : table) {
    std::cout << "state:  " << render(vocab, row.state) << "\n";
    std::cout << "expert: " << render(vocab, row.expert_action) << "\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), " (r %.4f)", row.bc_reward);
    std::cout << "bc:     " << render(vocab, row.bc_action) << buf << "\n";
    for (std::size_t s = 0; s < row.gail_actions.size(); ++s) {
      std::snprintf(buf, sizeof(buf), " (r %.4f)%s", row.gail_rewards[s],
                    static_cast<int>(s) == row.best_gail ? " **" : "");
      std::cout << "gail:   " << render(vocab, row.gail_actions[s]) << buf << "\n";
    }
    std::cout << "\n";
  }
  return 0;
}

int cmd_chat(const RunConfig& cfg, const std::string& policy_dir, bool greedy) {
  auto loaded = load_model_dir(policy_dir);
  RunConfig chat_cfg = loaded.cfg;
  chat_cfg.temperature = cfg.temperature;
  auto policy = PolicyModel<float>::from_checkpoint(loaded.data, policy_config(chat_cfg));
  Rng master(cfg.seed);
  Rng chat_rng = master.fork(kStreamChat);

  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    auto state = encode_prompt(line, loaded.vocab, loaded.lex, chat_cfg.max_len, true);
    if (state.empty()) {
      std::cout << "(no in-vocabulary tokens in prompt)\n";
      continue;
    }
    auto sample = policy.sample_action(state, greedy, chat_cfg.temperature, chat_rng);
    std::cout << render(loaded.vocab, sample.tokens) << "\n";
  }
  return 0;
}

// --config/--set are applied before the flag parse so that flags win
void preload_config(int argc, const char* const* argv, RunConfig& cfg) {
  std::vector<std::string> args(argv + 1, argv + argc);
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      cfg.load_file(args[i + 1]);
    else if (args[i].rfind("--config=", 0) == 0)
      cfg.load_file(args[i].substr(9));
  }
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string kv;
    if (args[i] == "--set" && i + 1 < args.size())
      kv = args[i + 1];
    else if (args[i].rfind("--set=", 0) == 0)
      kv = args[i].substr(6);
    else
      continue;
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::runtime_error("--set expects key=value, got " + kv);
    cfg.set_key(kv.substr(0, eq), kv.substr(eq + 1));
  }
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"adversarial imitation learning for short-utterance dialog"};
  app.require_subcommand(1);

  RunConfig cfg;
  cfg.work_dir = default_work_dir();
  try {
    preload_config(argc, argv, cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  std::string config_path;  // consumed by preload_config; registered so parsing accepts them
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "JSON config file with flat dotted keys");
  app.add_option("--set", overrides, "config override key=value");

  std::string out_dir, pairs_path, vocab_path, vectors_in, vectors_out, vectors_path;
  std::string init_dir, metrics_path, policy_dir, discrim_dir, bc_dir, gail_dir;
  std::string state_text, action_text, nearest_token;
  std::string report_path = "report.jsonl", hist_path;
  int nearest_k = 10, vocab_top = 10, probe_states = 0, compare_states = 10, compare_samples = 2;
  int threads = 1;
  bool chat_greedy = false;

  auto* prepare = app.add_subcommand("prepare", "parse the corpus, build vocabulary and pairs");
  prepare->add_option("--corpus-dir", cfg.corpus_dir,
                      "directory with movie_lines.txt and movie_conversations.txt");
  prepare->add_option("--out-dir", out_dir, "output directory");
  prepare->add_option("--max-len", cfg.max_len, "max tokens per utterance");
  prepare->add_option("--min-count", cfg.min_count, "vocabulary count threshold");
  prepare->add_option("--max-turns", cfg.max_turns, "state context turns (1 or 2)");

  auto* vocab_cmd = app.add_subcommand("vocab", "inspect a vocabulary file");
  vocab_cmd->add_option("--vocab", vocab_path, "vocab.tsv path")->required();
  vocab_cmd->add_option("--top", vocab_top, "how many top-count tokens to list");

  auto* embed_cmd = app.add_subcommand("embed", "fine-tune or query word embeddings");
  embed_cmd->add_option("--pairs", pairs_path, "pairs.jsonl path");
  embed_cmd->add_option("--vocab", vocab_path, "vocab.tsv path (default: next to --pairs)");
  embed_cmd->add_option("--vectors-in", vectors_in, "pretrained vectors, word2vec text format");
  embed_cmd->add_option("--vectors-out", vectors_out, "where to write fine-tuned vectors");
  embed_cmd->add_option("--epochs", cfg.embed_epochs, "SGNS epochs");
  embed_cmd->add_option("--window", cfg.embed_window, "context window");
  embed_cmd->add_option("--negatives", cfg.embed_negatives, "negative samples per pair");
  embed_cmd->add_option("--lr", cfg.embed_lr, "starting learning rate");
  embed_cmd->add_option("--nearest", nearest_token, "print the most similar tokens to this one");
  embed_cmd->add_option("--k", nearest_k, "neighbor count for --nearest");

  auto* pretrain_cmd = app.add_subcommand("pretrain", "behavioral-cloning pretraining");
  pretrain_cmd->add_option("--pairs", pairs_path, "pairs.jsonl path")->required();
  pretrain_cmd->add_option("--vocab", vocab_path, "vocab.tsv path (default: next to --pairs)");
  pretrain_cmd->add_option("--vectors", vectors_path, "embedding vectors (word2vec text)");
  pretrain_cmd->add_option("--epochs", cfg.bc_epochs, "epochs");
  pretrain_cmd->add_option("--batch", cfg.batch, "batch size");
  pretrain_cmd->add_option("--lr", cfg.lr_bc, "learning rate");
  pretrain_cmd->add_option("--hidden", cfg.hidden, "GRU hidden size");
  pretrain_cmd->add_option("--layers", cfg.layers, "GRU layers");
  pretrain_cmd->add_option("--dim", cfg.dim, "embedding dimension");
  pretrain_cmd->add_option("--out", out_dir, "checkpoint directory");

  auto* gail_cmd = app.add_subcommand("gail", "adversarial imitation training");
  gail_cmd->add_option("--pairs", pairs_path, "pairs.jsonl path")->required();
  gail_cmd->add_option("--init", init_dir, "BC policy checkpoint directory")->required();
  gail_cmd->add_option("--n-states", cfg.n_states, "states to consume (without replacement)");
  gail_cmd->add_option("--d-steps", cfg.d_steps, "discriminator updates per policy update");
  gail_cmd->add_option("--batch", cfg.batch, "batch size");
  gail_cmd->add_option("--entropy-coef", cfg.entropy_coef, "entropy bonus coefficient");
  gail_cmd->add_flag("--baseline", cfg.baseline, "subtract the running mean reward");
  gail_cmd->add_option("--lr-policy", cfg.lr_policy, "policy learning rate");
  gail_cmd->add_option("--lr-discrim", cfg.lr_discrim, "discriminator learning rate");
  gail_cmd->add_option("--out", out_dir, "output directory (gets policy/ and discrim/)");
  gail_cmd->add_option("--metrics", metrics_path, "metrics CSV path");

  auto* score_cmd = app.add_subcommand("score", "score one (state, action) pair");
  score_cmd->add_option("--policy-ckpt", policy_dir, "policy checkpoint (accepted; scoring only needs the discriminator)");
  score_cmd->add_option("--discrim-ckpt", discrim_dir, "discriminator checkpoint")->required();
  score_cmd->add_option("--state", state_text, "state utterance")->required();
  score_cmd->add_option("--action", action_text, "action utterance")->required();

  auto* probe_cmd = app.add_subcommand("probe", "probe the reward signal");
  probe_cmd->add_option("--pairs", pairs_path, "pairs.jsonl path")->required();
  probe_cmd->add_option("--policy-ckpt", policy_dir, "policy checkpoint")->required();
  probe_cmd->add_option("--discrim-ckpt", discrim_dir, "discriminator checkpoint")->required();
  probe_cmd->add_option("--noise-per-state", cfg.noise_per_state, "noise actions per state");
  probe_cmd->add_option("--percentile", cfg.percentile, "expert-reward percentile threshold");
  probe_cmd->add_option("--states", probe_states, "limit to the first N states (0 = all)");
  probe_cmd->add_option("--hist-bins", cfg.hist_bins, "histogram bin count");
  probe_cmd->add_option("--out", report_path, "probe report JSONL path");
  probe_cmd->add_option("--hist", hist_path, "histogram CSV path");
  probe_cmd->add_option("--threads", threads, "parallel scoring threads");

  auto* compare_cmd = app.add_subcommand("compare", "compare BC and GAIL policies");
  compare_cmd->add_option("--pairs", pairs_path, "pairs.jsonl path")->required();
  compare_cmd->add_option("--bc-ckpt", bc_dir, "BC policy checkpoint")->required();
  compare_cmd->add_option("--gail-ckpt", gail_dir, "GAIL policy checkpoint")->required();
  compare_cmd->add_option("--discrim-ckpt", discrim_dir, "discriminator checkpoint")->required();
  compare_cmd->add_option("--states", compare_states, "number of states");
  compare_cmd->add_option("--samples", compare_samples, "stochastic samples per state");

  auto* chat_cmd = app.add_subcommand("chat", "sample replies to prompts from stdin");
  chat_cmd->add_option("--policy-ckpt", policy_dir, "policy checkpoint")->required();
  chat_cmd->add_flag("--greedy", chat_greedy, "argmax decoding");
  chat_cmd->add_option("--temperature", cfg.temperature, "softmax temperature");

  for (auto* sub : {prepare, vocab_cmd, embed_cmd, pretrain_cmd, gail_cmd, score_cmd, probe_cmd,
                    compare_cmd, chat_cmd})
    sub->add_option("--seed", cfg.seed, "run seed; all randomness derives from it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    cfg.validate();
    if (app.got_subcommand(prepare)) {
      if (cfg.corpus_dir.empty()) throw std::runtime_error("prepare: --corpus-dir is required");
      if (out_dir.empty()) out_dir = cfg.work_dir;
      return cmd_prepare(cfg, out_dir);
    }
    if (app.got_subcommand(vocab_cmd)) return cmd_vocab(vocab_path, vocab_top);
    if (app.got_subcommand(embed_cmd)) {
      if (vocab_path.empty() && !pairs_path.empty())
        vocab_path = (fs::path(pairs_path).parent_path() / "vocab.tsv").string();
      if (vocab_path.empty()) throw std::runtime_error("embed: --vocab or --pairs is required");
      return cmd_embed(cfg, pairs_path, vocab_path, vectors_in, vectors_out, nearest_token,
                       nearest_k);
    }
    if (app.got_subcommand(pretrain_cmd)) {
      if (vocab_path.empty())
        vocab_path = (fs::path(pairs_path).parent_path() / "vocab.tsv").string();
      if (out_dir.empty()) out_dir = (fs::path(cfg.work_dir) / "bc_ckpt").string();
      return cmd_pretrain(cfg, pairs_path, vocab_path, vectors_path, out_dir);
    }
    if (app.got_subcommand(gail_cmd)) {
      if (out_dir.empty()) out_dir = (fs::path(cfg.work_dir) / "gail_ckpt").string();
      return cmd_gail(cfg, pairs_path, init_dir, out_dir, metrics_path);
    }
    if (app.got_subcommand(score_cmd)) return cmd_score(discrim_dir, state_text, action_text);
    if (app.got_subcommand(probe_cmd))
      return cmd_probe(cfg, pairs_path, policy_dir, discrim_dir, report_path, hist_path,
                       probe_states, threads);
    if (app.got_subcommand(compare_cmd))
      return cmd_compare(cfg, pairs_path, bc_dir, gail_dir, discrim_dir, compare_states,
                         compare_samples);
    if (app.got_subcommand(chat_cmd)) return cmd_chat(cfg, policy_dir, chat_greedy);
    throw std::runtime_error("no subcommand");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace gailchat
