#pragma once

// Run configuration: JSON file with flat dotted keys, overridable from the
// command line; the effective config is persisted next to every output so a
// run can be reproduced from it. Unknown keys are rejected.

#include <cstdint>
#include <string>

namespace gailchat {

struct RunConfig {
  // paths
  std::string corpus_dir;
  std::string work_dir = "work";

  // data
  int max_len = 5;
  int min_count = 5;
  int max_turns = 1;

  // model
  int hidden = 128;
  int layers = 2;
  int dim = 300;
  double temperature = 1.0;

  // embed
  int embed_epochs = 5;
  int embed_window = 5;
  int embed_negatives = 5;
  double embed_lr = 0.025;

  // train
  int bc_epochs = 30;
  int n_states = 12000;
  int d_steps = 5;
  int batch = 32;
  double lr_bc = 1e-3;
  double lr_policy = 1e-4;
  double lr_discrim = 1e-4;
  double entropy_coef = 0.0;
  bool baseline = false;

  // probe
  double percentile = 90.0;
  int noise_per_state = 1;
  int hist_bins = 32;

  std::uint64_t seed = 0;

  void load_file(const std::string& path);       // applies file values over defaults
  void set_key(const std::string& dotted_key, const std::string& value);  // throws on unknown key
  void save_file(const std::string& path) const;
  void validate() const;  // all counts positive
};

}  // namespace gailchat
