#include "tda/config.hpp"

#include <charconv>
#include <filesystem>
#include <functional>
#include <stdexcept>

#include "tda/io.hpp"

namespace tda {

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  std::size_t end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    uint64_t v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config key " + key + " expects an unsigned integer, got '" +
                             value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config key " + key + " expects an integer, got '" + value +
                             "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config key " + key + " expects a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::runtime_error("config key " + key + " expects true/false, got '" + value + "'");
}

}  // namespace

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [key, value] : effective) {
    out += key;
    out += " = ";
    out += value;
    out += "\n";
  }
  return out;
}

RunConfig parse_config(const std::string& path,
                       const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig config;

  using Setter = std::function<void(const std::string&, const std::string&)>;
  std::map<std::string, Setter> setters;
  auto u64_key = [&](const std::string& name, uint64_t* slot) {
    setters[name] = [&, slot](const std::string& k, const std::string& v) {
      *slot = parse_u64(k, v);
    };
  };
  auto size_key = [&](const std::string& name, std::size_t* slot) {
    setters[name] = [&, slot](const std::string& k, const std::string& v) {
      *slot = static_cast<std::size_t>(parse_u64(k, v));
    };
  };
  auto int_key = [&](const std::string& name, int* slot) {
    setters[name] = [&, slot](const std::string& k, const std::string& v) {
      *slot = parse_int(k, v);
    };
  };
  auto double_key = [&](const std::string& name, double* slot) {
    setters[name] = [&, slot](const std::string& k, const std::string& v) {
      *slot = parse_double(k, v);
    };
  };
  auto bool_key = [&](const std::string& name, bool* slot) {
    setters[name] = [&, slot](const std::string& k, const std::string& v) {
      *slot = parse_bool(k, v);
    };
  };
  auto string_key = [&](const std::string& name, std::string* slot) {
    setters[name] = [slot](const std::string&, const std::string& v) { *slot = v; };
  };

  u64_key("rare_threshold", &config.augment.rare_threshold);
  size_key("top_k", &config.augment.top_k);
  u64_key("max_per_word", &config.augment.max_per_word);
  double_key("lm_floor", &config.augment.lm_floor);
  setters["mode"] = [&](const std::string&, const std::string& v) {
    config.augment.mode = parse_augment_mode(v);
  };
  int_key("min_distance", &config.augment.min_distance);
  int_key("max_passes", &config.augment.max_passes);
  u64_key("seed", &config.augment.seed);
  int_key("threads", &config.augment.threads);

  string_key("source", &config.source_path);
  string_key("target", &config.target_path);
  string_key("out_dir", &config.out_dir);
  string_key("substitution_side", &config.substitution_side);
  bool_key("lowercase", &config.lowercase);

  int_key("lm.order", &config.lm_order);
  string_key("lm.forward_arpa", &config.lm_forward_arpa);
  string_key("lm.backward_arpa", &config.lm_backward_arpa);
  string_key("lm.target_arpa", &config.lm_target_arpa);
  string_key("lm.corpus", &config.lm_corpus);
  string_key("lm.vocab", &config.lm_vocab);
  string_key("lm.direction", &config.lm_direction);

  string_key("mono.source", &config.mono_source);
  string_key("mono.target", &config.mono_target);

  size_key("vocab.cap", &config.vocab_cap);
  string_key("vocab.source", &config.vocab_source);
  string_key("vocab.target", &config.vocab_target);

  string_key("align.file", &config.align_file);
  string_key("align.lexicon", &config.align_lexicon);
  int_key("align.iterations", &config.align_iterations);

  size_key("bpe.merges", &config.bpe_merges);
  bool_key("bpe.joint", &config.bpe_joint);
  string_key("bpe.input", &config.bpe_input);
  string_key("bpe.codes", &config.bpe_codes);

  string_key("records.file", &config.records_file);

  string_key("analysis.system", &config.analysis_system);
  string_key("analysis.references", &config.analysis_references);
  string_key("analysis.vocab", &config.analysis_vocab);
  string_key("analysis.augmented", &config.analysis_augmented);
  string_key("analysis.records", &config.analysis_records);
  bool_key("analysis.case_fold", &config.analysis_case_fold);

  // Defaults first, so the effective map always lists every key.
  config.effective = {
      {"rare_threshold", "100"},
      {"top_k", "1000"},
      {"max_per_word", "500"},
      {"lm_floor", "0.0001"},
      {"mode", "r1"},
      {"min_distance", "5"},
      {"max_passes", "20"},
      {"seed", "1"},
      {"threads", "0"},
      {"source", ""},
      {"target", ""},
      {"out_dir", "out"},
      {"substitution_side", "source"},
      {"lowercase", "false"},
      {"lm.order", "4"},
      {"lm.forward_arpa", ""},
      {"lm.backward_arpa", ""},
      {"lm.target_arpa", ""},
      {"lm.corpus", ""},
      {"lm.vocab", ""},
      {"lm.direction", "forward"},
      {"mono.source", ""},
      {"mono.target", ""},
      {"vocab.cap", "30000"},
      {"vocab.source", ""},
      {"vocab.target", ""},
      {"align.file", ""},
      {"align.lexicon", ""},
      {"align.iterations", "20"},
      {"bpe.merges", "30000"},
      {"bpe.joint", "false"},
      {"bpe.input", ""},
      {"bpe.codes", ""},
      {"records.file", ""},
      {"analysis.system", ""},
      {"analysis.references", ""},
      {"analysis.vocab", ""},
      {"analysis.augmented", ""},
      {"analysis.records", ""},
      {"analysis.case_fold", "false"},
  };

  auto apply = [&](const std::string& key, const std::string& value) {
    auto it = setters.find(key);
    if (it == setters.end()) throw std::runtime_error("unknown config key: " + key);
    it->second(key, value);
    config.effective[key] = value;
  };

  if (!path.empty()) {
    std::vector<std::string> lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      std::string line = trim(lines[i]);
      if (line.empty() || line[0] == '#') continue;
      std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        throw std::runtime_error("bad config line " + std::to_string(i + 1) + " in " +
                                 path + ": expected key = value");
      }
      apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }
  for (const auto& [key, value] : overrides) apply(key, value);

  // Range checks.
  config.augment.validate();
  if (config.lm_order < 1 || config.lm_order > 5) {
    throw std::runtime_error("lm.order must be in [1,5]");
  }
  if (config.vocab_cap < 1) throw std::runtime_error("vocab.cap must be >= 1");
  if (config.align_iterations < 1) throw std::runtime_error("align.iterations must be >= 1");
  if (config.substitution_side != "source" && config.substitution_side != "target") {
    throw std::runtime_error("substitution_side must be source or target");
  }
  parse_direction(config.lm_direction);

  // Referenced input paths must exist.
  const std::pair<const char*, const std::string*> inputs[] = {
      {"source", &config.source_path},
      {"target", &config.target_path},
      {"lm.forward_arpa", &config.lm_forward_arpa},
      {"lm.backward_arpa", &config.lm_backward_arpa},
      {"lm.target_arpa", &config.lm_target_arpa},
      {"lm.corpus", &config.lm_corpus},
      {"lm.vocab", &config.lm_vocab},
      {"mono.source", &config.mono_source},
      {"mono.target", &config.mono_target},
      {"vocab.source", &config.vocab_source},
      {"vocab.target", &config.vocab_target},
      {"align.file", &config.align_file},
      {"align.lexicon", &config.align_lexicon},
      {"bpe.input", &config.bpe_input},
      {"bpe.codes", &config.bpe_codes},
      {"records.file", &config.records_file},
      {"analysis.system", &config.analysis_system},
      {"analysis.references", &config.analysis_references},
      {"analysis.vocab", &config.analysis_vocab},
      {"analysis.augmented", &config.analysis_augmented},
      {"analysis.records", &config.analysis_records},
  };
  for (const auto& [key, value] : inputs) {
    if (!value->empty() && !std::filesystem::exists(*value)) {
      throw std::runtime_error(std::string("config key ") + key +
                               " references a missing file: " + *value);
    }
  }

  return config;
}

}  // namespace tda
