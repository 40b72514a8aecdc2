#include "tda/align.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "tda/io.hpp"

namespace tda {

void TranslationLexicon::set_direct(const std::string& source, const std::string& target,
                                    double p) {
  direct_[source][target] = p;
}

void TranslationLexicon::set_inverse(const std::string& source, const std::string& target,
                                     double p) {
  inverse_[target][source] = p;
}

double TranslationLexicon::direct(const std::string& source, const std::string& target) const {
  auto row = direct_.find(source);
  if (row == direct_.end()) return 0.0;
  auto it = row->second.find(target);
  return it == row->second.end() ? 0.0 : it->second;
}

double TranslationLexicon::inverse(const std::string& source, const std::string& target) const {
  auto row = inverse_.find(target);
  if (row == inverse_.end()) return 0.0;
  auto it = row->second.find(source);
  return it == row->second.end() ? 0.0 : it->second;
}

void TranslationLexicon::set_null_direct(const std::string& target, double p) {
  null_direct_[target] = p;
}

double TranslationLexicon::null_direct(const std::string& target) const {
  auto it = null_direct_.find(target);
  return it == null_direct_.end() ? 0.0 : it->second;
}

bool TranslationLexicon::has_source(const std::string& source) const {
  return direct_.count(source) > 0;
}

std::size_t TranslationLexicon::direct_size() const {
  std::size_t n = 0;
  for (const auto& [source, row] : direct_) n += row.size();
  return n;
}

std::vector<TransCandidate> TranslationLexicon::trans(const std::string& source) const {
  std::vector<TransCandidate> out;
  auto row = direct_.find(source);
  if (row == direct_.end()) return out;
  out.reserve(row->second.size());
  for (const auto& [target, p] : row->second) {
    if (p <= 0.0) continue;
    TransCandidate cand;
    cand.target = target;
    cand.p_target_given_source = p;
    cand.p_source_given_target = inverse(source, target);
    out.push_back(std::move(cand));
  }
  std::sort(out.begin(), out.end(), [](const TransCandidate& a, const TransCandidate& b) {
    if (a.p_target_given_source != b.p_target_given_source) {
      return a.p_target_given_source > b.p_target_given_source;
    }
    return a.target < b.target;
  });
  return out;
}

void TranslationLexicon::prune(double floor) {
  for (auto& [source, row] : direct_) {
    for (auto it = row.begin(); it != row.end();) {
      it = it->second < floor ? row.erase(it) : std::next(it);
    }
  }
  for (auto& [target, row] : inverse_) {
    for (auto it = row.begin(); it != row.end();) {
      it = it->second < floor ? row.erase(it) : std::next(it);
    }
  }
  for (auto it = direct_.begin(); it != direct_.end();) {
    it = it->second.empty() ? direct_.erase(it) : std::next(it);
  }
  for (auto it = inverse_.begin(); it != inverse_.end();) {
    it = it->second.empty() ? inverse_.erase(it) : std::next(it);
  }
}

void TranslationLexicon::save(const std::string& path) const {
  struct Row {
    std::string source, target;
    double direct, inverse;
  };
  std::vector<Row> rows;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& [source, row] : direct_) {
    for (const auto& [target, p] : row) {
      rows.push_back({source, target, p, inverse(source, target)});
      seen.insert({source, target});
    }
  }
  for (const auto& [target, row] : inverse_) {
    for (const auto& [source, p] : row) {
      if (seen.count({source, target})) continue;
      rows.push_back({source, target, 0.0, p});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.source != b.source) return a.source < b.source;
    if (a.direct != b.direct) return a.direct > b.direct;
    return a.target < b.target;
  });
  std::vector<std::string> lines;
  lines.reserve(rows.size());
  char buf[64];
  for (const Row& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.6f\t%.6f", row.direct, row.inverse);
    lines.push_back(row.source + "\t" + row.target + "\t" + buf);
  }
  write_lines(path, lines);
}

TranslationLexicon TranslationLexicon::load(const std::string& path) {
  TranslationLexicon lexicon;
  std::vector<std::string> lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    std::size_t t3 = t2 == std::string::npos ? std::string::npos : line.find('\t', t2 + 1);
    if (t3 == std::string::npos) {
      throw std::runtime_error("bad lexicon line " + std::to_string(i + 1) + " in " + path);
    }
    std::string source = line.substr(0, t1);
    std::string target = line.substr(t1 + 1, t2 - t1 - 1);
    double direct = std::stod(line.substr(t2 + 1, t3 - t2 - 1));
    double inverse = std::stod(line.substr(t3 + 1));
    if (direct > 0.0) lexicon.set_direct(source, target, direct);
    if (inverse > 0.0) lexicon.set_inverse(source, target, inverse);
  }
  return lexicon;
}

namespace {

// One EM direction: every observed-side token is generated by a
// conditioning-side token or the null token. Returns p(observed word |
// conditioning word) keyed by integer ids; id 0 is null.
class Model1 {
 public:
  Model1(const std::vector<const Sentence*>& cond, const std::vector<const Sentence*>& obs) {
    cond_ids_.resize(cond.size());
    obs_ids_.resize(obs.size());
    for (std::size_t p = 0; p < cond.size(); ++p) {
      cond_ids_[p].reserve(cond[p]->size());
      for (const std::string& w : *cond[p]) cond_ids_[p].push_back(cond_id(w));
      obs_ids_[p].reserve(obs[p]->size());
      for (const std::string& w : *obs[p]) obs_ids_[p].push_back(obs_id(w));
    }
  }

  void run(int iterations, std::vector<double>* log_likelihood) {
    init_uniform();
    for (int iter = 0; iter < iterations; ++iter) {
      double ll = em_step();
      if (log_likelihood != nullptr) log_likelihood->push_back(ll);
    }
  }

  // Writes all non-null rows above the floor through `emit(cond, obs, p)`.
  template <typename Emit>
  void export_table(double floor, Emit emit) const {
    for (const auto& [key, p] : table_) {
      int c = static_cast<int>(key >> 32);
      int o = static_cast<int>(key & 0xffffffffu);
      if (c == 0 || p < floor) continue;
      emit(cond_words_[c], obs_words_[o], p);
    }
  }

  template <typename Emit>
  void export_null_row(double floor, Emit emit) const {
    for (const auto& [key, p] : table_) {
      int c = static_cast<int>(key >> 32);
      int o = static_cast<int>(key & 0xffffffffu);
      if (c != 0 || p < floor) continue;
      emit(obs_words_[o], p);
    }
  }

 private:
  static uint64_t key(int cond, int obs) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(cond)) << 32) |
           static_cast<uint32_t>(obs);
  }

  int cond_id(const std::string& w) {
    auto it = cond_index_.find(w);
    if (it != cond_index_.end()) return it->second;
    int id = static_cast<int>(cond_words_.size());
    cond_index_.emplace(w, id);
    cond_words_.push_back(w);
    return id;
  }

  int obs_id(const std::string& w) {
    auto it = obs_index_.find(w);
    if (it != obs_index_.end()) return it->second;
    int id = static_cast<int>(obs_words_.size());
    obs_index_.emplace(w, id);
    obs_words_.push_back(w);
    return id;
  }

  void init_uniform() {
    std::unordered_map<int, std::set<int>> cooc;
    for (std::size_t p = 0; p < cond_ids_.size(); ++p) {
      for (int o : obs_ids_[p]) {
        cooc[0].insert(o);
        for (int c : cond_ids_[p]) cooc[c].insert(o);
      }
    }
    table_.clear();
    for (const auto& [c, targets] : cooc) {
      double uniform = 1.0 / static_cast<double>(targets.size());
      for (int o : targets) table_[key(c, o)] = uniform;
    }
  }

  double em_step() {
    std::unordered_map<uint64_t, double> counts;
    std::unordered_map<int, double> totals;
    double ll = 0.0;
    for (std::size_t p = 0; p < cond_ids_.size(); ++p) {
      const std::vector<int>& cond = cond_ids_[p];
      const std::vector<int>& obs = obs_ids_[p];
      double align_norm = static_cast<double>(cond.size()) + 1.0;
      for (int o : obs) {
        double denom = table_.at(key(0, o));
        for (int c : cond) denom += table_.at(key(c, o));
        ll += std::log(denom / align_norm);
        double null_post = table_.at(key(0, o)) / denom;
        counts[key(0, o)] += null_post;
        totals[0] += null_post;
        for (int c : cond) {
          double post = table_.at(key(c, o)) / denom;
          counts[key(c, o)] += post;
          totals[c] += post;
        }
      }
    }
    for (auto& [k, p] : table_) {
      int c = static_cast<int>(k >> 32);
      auto it = counts.find(k);
      p = it == counts.end() ? 0.0 : it->second / totals.at(c);
    }
    return ll;
  }

  std::vector<std::vector<int>> cond_ids_;
  std::vector<std::vector<int>> obs_ids_;
  std::unordered_map<std::string, int> cond_index_;
  std::unordered_map<std::string, int> obs_index_;
  std::vector<std::string> cond_words_{"<null>"};
  std::vector<std::string> obs_words_{"<null>"};
  std::unordered_map<uint64_t, double> table_;
};

}  // namespace

TranslationLexicon train_ibm1(const ParallelCorpus& corpus, int iterations,
                              std::vector<double>* direct_log_likelihood,
                              std::vector<double>* inverse_log_likelihood) {
  if (corpus.empty()) throw std::runtime_error("cannot train aligner on empty corpus");
  if (iterations < 1) throw std::runtime_error("aligner iterations must be >= 1");

  std::vector<const Sentence*> sources, targets;
  sources.reserve(corpus.size());
  targets.reserve(corpus.size());
  for (const SentencePair& pair : corpus.pairs()) {
    sources.push_back(&pair.source);
    targets.push_back(&pair.target);
  }

  constexpr double kFloor = 1e-6;
  TranslationLexicon lexicon;

  Model1 direct(sources, targets);
  direct.run(iterations, direct_log_likelihood);
  direct.export_table(kFloor, [&](const std::string& s, const std::string& t, double p) {
    lexicon.set_direct(s, t, p);
  });
  direct.export_null_row(kFloor, [&](const std::string& t, double p) {
    lexicon.set_null_direct(t, p);
  });

  Model1 inverse(targets, sources);
  inverse.run(iterations, inverse_log_likelihood);
  inverse.export_table(kFloor, [&](const std::string& t, const std::string& s, double p) {
    lexicon.set_inverse(s, t, p);
  });

  return lexicon;
}

AlignmentLinks load_alignments(const std::string& path, const ParallelCorpus& corpus) {
  std::vector<std::string> lines = read_lines(path);
  if (lines.size() != corpus.size()) {
    throw std::runtime_error("alignment file " + path + " has " +
                             std::to_string(lines.size()) + " lines for " +
                             std::to_string(corpus.size()) + " pairs");
  }
  AlignmentLinks out;
  out.links.resize(corpus.size());
  for (std::size_t p = 0; p < lines.size(); ++p) {
    const std::string& line = lines[p];
    if (line.empty()) continue;
    const SentencePair& pair = corpus.pair(p);
    std::set<std::pair<int, int>> links;
    std::size_t start = 0;
    while (start < line.size()) {
      std::size_t space = line.find(' ', start);
      std::string item =
          space == std::string::npos ? line.substr(start) : line.substr(start, space - start);
      if (!item.empty()) {
        std::size_t dash = item.find('-');
        int i = -1, j = -1;
        try {
          if (dash == std::string::npos) throw std::invalid_argument(item);
          i = std::stoi(item.substr(0, dash));
          j = std::stoi(item.substr(dash + 1));
        } catch (const std::exception&) {
          throw std::runtime_error("bad alignment token '" + item + "' on line " +
                                   std::to_string(p + 1) + " in " + path);
        }
        if (i < 0 || j < 0 || i >= static_cast<int>(pair.source.size()) ||
            j >= static_cast<int>(pair.target.size())) {
          throw std::runtime_error("alignment index out of range on line " +
                                   std::to_string(p + 1) + " in " + path + ": " + item);
        }
        links.insert({i, j});
      }
      if (space == std::string::npos) break;
      start = space + 1;
    }
    out.links[p].assign(links.begin(), links.end());
  }
  return out;
}

void save_alignments(const AlignmentLinks& links, const std::string& path) {
  std::vector<std::string> lines;
  lines.reserve(links.size());
  for (const auto& pair_links : links.links) {
    std::string line;
    for (const auto& [i, j] : pair_links) {
      if (!line.empty()) line.push_back(' ');
      line += std::to_string(i) + "-" + std::to_string(j);
    }
    lines.push_back(std::move(line));
  }
  write_lines(path, lines);
}

AlignmentLinks viterbi_alignments(const ParallelCorpus& corpus,
                                  const TranslationLexicon& lexicon) {
  AlignmentLinks out;
  out.links.resize(corpus.size());
  for (const SentencePair& pair : corpus.pairs()) {
    std::vector<std::pair<int, int>>& links = out.links[pair.id];
    for (std::size_t j = 0; j < pair.target.size(); ++j) {
      // Ties go to the lowest source index; null unaligns the word only
      // when strictly more probable than every source token.
      double best = 0.0;
      int best_i = -1;
      for (std::size_t i = 0; i < pair.source.size(); ++i) {
        double p = lexicon.direct(pair.source[i], pair.target[j]);
        if (p > best) {
          best = p;
          best_i = static_cast<int>(i);
        }
      }
      if (lexicon.null_direct(pair.target[j]) > best) best_i = -1;
      if (best_i >= 0) links.push_back({best_i, static_cast<int>(j)});
    }
    std::sort(links.begin(), links.end());
    links.erase(std::unique(links.begin(), links.end()), links.end());
  }
  return out;
}

TranslationLexicon lexical_tables_from_alignments(const ParallelCorpus& corpus,
                                                  const AlignmentLinks& links) {
  std::unordered_map<std::string, std::unordered_map<std::string, uint64_t>> counts;
  std::unordered_map<std::string, uint64_t> source_totals, target_totals;
  for (const SentencePair& pair : corpus.pairs()) {
    if (pair.id >= links.size()) break;
    for (const auto& [i, j] : links.links[pair.id]) {
      const std::string& s = pair.source.at(i);
      const std::string& t = pair.target.at(j);
      ++counts[s][t];
      ++source_totals[s];
      ++target_totals[t];
    }
  }
  TranslationLexicon lexicon;
  for (const auto& [s, row] : counts) {
    for (const auto& [t, c] : row) {
      lexicon.set_direct(s, t, static_cast<double>(c) / source_totals.at(s));
      lexicon.set_inverse(s, t, static_cast<double>(c) / target_totals.at(t));
    }
  }
  lexicon.prune(1e-6);
  return lexicon;
}

}  // namespace tda
