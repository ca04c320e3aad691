#include "gailchat/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace gailchat {

namespace {

struct Field {
  std::function<nlohmann::json(const RunConfig&)> get;
  std::function<void(RunConfig&, const nlohmann::json&)> set;
};

std::uint64_t to_u64(const nlohmann::json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  if (v.is_string()) return std::stoull(v.get<std::string>());
  throw std::runtime_error("expected integer");
}

const std::map<std::string, Field>& fields() {
#define GAILCHAT_FIELD(key, member, type)                                      \
  {key, Field{[](const RunConfig& c) { return nlohmann::json(c.member); },     \
              [](RunConfig& c, const nlohmann::json& v) {                      \
                if (v.is_string())                                             \
                  c.member = static_cast<type>(std::stod(v.get<std::string>())); \
                else                                                           \
                  c.member = v.get<type>();                                    \
              }}}
  static const std::map<std::string, Field> table = {
      {"paths.corpus_dir", Field{[](const RunConfig& c) { return nlohmann::json(c.corpus_dir); },
                                 [](RunConfig& c, const nlohmann::json& v) { c.corpus_dir = v.get<std::string>(); }}},
      {"paths.work_dir", Field{[](const RunConfig& c) { return nlohmann::json(c.work_dir); },
                               [](RunConfig& c, const nlohmann::json& v) { c.work_dir = v.get<std::string>(); }}},
      GAILCHAT_FIELD("data.max_len", max_len, int),
      GAILCHAT_FIELD("data.min_count", min_count, int),
      GAILCHAT_FIELD("data.max_turns", max_turns, int),
      GAILCHAT_FIELD("model.hidden", hidden, int),
      GAILCHAT_FIELD("model.layers", layers, int),
      GAILCHAT_FIELD("model.dim", dim, int),
      GAILCHAT_FIELD("model.temperature", temperature, double),
      GAILCHAT_FIELD("embed.epochs", embed_epochs, int),
      GAILCHAT_FIELD("embed.window", embed_window, int),
      GAILCHAT_FIELD("embed.negatives", embed_negatives, int),
      GAILCHAT_FIELD("embed.lr", embed_lr, double),
      GAILCHAT_FIELD("train.bc_epochs", bc_epochs, int),
      GAILCHAT_FIELD("train.n_states", n_states, int),
      GAILCHAT_FIELD("train.d_steps", d_steps, int),
      GAILCHAT_FIELD("train.batch", batch, int),
      GAILCHAT_FIELD("train.lr_bc", lr_bc, double),
      GAILCHAT_FIELD("train.lr_policy", lr_policy, double),
      GAILCHAT_FIELD("train.lr_discrim", lr_discrim, double),
      GAILCHAT_FIELD("train.entropy_coef", entropy_coef, double),
      {"train.baseline", Field{[](const RunConfig& c) { return nlohmann::json(c.baseline); },
                               [](RunConfig& c, const nlohmann::json& v) {
                                 if (v.is_string())
                                   c.baseline = v.get<std::string>() == "true" || v.get<std::string>() == "1";
                                 else
                                   c.baseline = v.get<bool>();
                               }}},
      GAILCHAT_FIELD("probe.percentile", percentile, double),
      GAILCHAT_FIELD("probe.noise_per_state", noise_per_state, int),
      GAILCHAT_FIELD("probe.hist_bins", hist_bins, int),
      {"seed", Field{[](const RunConfig& c) { return nlohmann::json(c.seed); },
                     [](RunConfig& c, const nlohmann::json& v) { c.seed = to_u64(v); }}},
  };
#undef GAILCHAT_FIELD
  return table;
}

}  // namespace

void RunConfig::load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read config file " + path);
  nlohmann::json j;
  f >> j;
  if (!j.is_object()) throw std::runtime_error("config file " + path + " is not a JSON object");
  for (const auto& [key, value] : j.items()) {
    auto it = fields().find(key);
    if (it == fields().end()) throw std::runtime_error("unknown config key: " + key);
    it->second.set(*this, value);
  }
}

void RunConfig::set_key(const std::string& dotted_key, const std::string& value) {
  auto it = fields().find(dotted_key);
  if (it == fields().end()) throw std::runtime_error("unknown config key: " + dotted_key);
  it->second.set(*this, nlohmann::json(value));
}

void RunConfig::save_file(const std::string& path) const {
  nlohmann::json j;
  for (const auto& [key, field] : fields()) j[key] = field.get(*this);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write config file " + path);
  f << j.dump(2) << "\n";
}

void RunConfig::validate() const {
  auto positive = [](long long v, const char* name) {
    if (v < 1) throw std::runtime_error(std::string("config: ") + name + " must be positive");
  };
  positive(max_len, "data.max_len");
  positive(min_count, "data.min_count");
  positive(max_turns, "data.max_turns");
  positive(hidden, "model.hidden");
  positive(layers, "model.layers");
  positive(dim, "model.dim");
  positive(embed_window, "embed.window");
  positive(embed_negatives, "embed.negatives");
  positive(n_states, "train.n_states");
  positive(d_steps, "train.d_steps");
  positive(batch, "train.batch");
  positive(noise_per_state, "probe.noise_per_state");
  positive(hist_bins, "probe.hist_bins");
  if (temperature <= 0) throw std::runtime_error("config: model.temperature must be > 0");
  if (bc_epochs < 0 || embed_epochs < 0) throw std::runtime_error("config: epochs must be >= 0");
}

}  // namespace gailchat
