#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tda/augment.hpp"

namespace tda {

// Effective settings for one pipeline run. Defaults are overridden by the
// config file, then by command-line overrides, in that order.
struct RunConfig {
  AugmentConfig augment;

  std::string source_path;  // bitext, substitution side as written on disk
  std::string target_path;
  std::string out_dir = "out";
  std::string substitution_side = "source";
  bool lowercase = false;

  int lm_order = 4;
  std::string lm_forward_arpa;   // optional pre-trained models
  std::string lm_backward_arpa;
  std::string lm_target_arpa;
  std::string lm_corpus;     // train-lm input
  std::string lm_vocab;      // train-lm vocabulary file
  std::string lm_direction = "forward";

  std::string mono_source;  // monolingual LM training data per side
  std::string mono_target;

  std::size_t vocab_cap = 30000;
  std::string vocab_source;  // optional precomputed vocabulary files
  std::string vocab_target;

  std::string align_file;     // optional Pharaoh alignments
  std::string align_lexicon;  // optional lexical table file
  int align_iterations = 20;

  std::size_t bpe_merges = 30000;
  bool bpe_joint = false;
  std::string bpe_input;
  std::string bpe_codes;

  std::string records_file;

  std::string analysis_system;
  std::string analysis_references;
  std::string analysis_vocab;
  std::string analysis_augmented;
  std::string analysis_records;
  bool analysis_case_fold = false;

  // Canonical key=value view of every setting, used for logging and the
  // manifest config hash.
  std::map<std::string, std::string> effective;

  std::string canonical() const;  // sorted `key = value` lines
};

// Reads `key = value` lines ('#' comments, blank lines allowed), applies
// overrides on top, validates ranges and the existence of every referenced
// input path. An empty `path` skips the file and yields defaults plus
// overrides. Unknown keys raise an error naming the key.
RunConfig parse_config(const std::string& path,
                       const std::vector<std::pair<std::string, std::string>>& overrides);

}  // namespace tda
