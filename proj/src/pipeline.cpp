#include "tda/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <json.hpp>

#include "tda/align.hpp"
#include "tda/analysis.hpp"
#include "tda/augment.hpp"
#include "tda/bpe.hpp"
#include "tda/corpus.hpp"
#include "tda/io.hpp"
#include "tda/ngram_lm.hpp"
#include "tda/sha256.hpp"
#include "tda/text.hpp"
#include "tda/vocab.hpp"

namespace fs = std::filesystem;

namespace tda {

namespace {

// Exclusive marker guarding the output directory for the run's duration.
class DirLock {
 public:
  explicit DirLock(const std::string& dir) : path_(dir + "/.lock") {
    int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      throw std::runtime_error("output directory is locked (stale .lock?): " + dir);
    }
    ::close(fd);
  }
  ~DirLock() { ::unlink(path_.c_str()); }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  std::string path_;
};

// Collects produced artifacts and consumed inputs for the manifest.
struct RunLedger {
  std::vector<std::string> inputs;
  std::vector<std::string> artifacts;

  void input(const std::string& path) {
    if (!path.empty()) inputs.push_back(path);
  }
  std::string artifact(const std::string& path) {
    artifacts.push_back(path);
    return path;
  }
};

void write_manifest(const std::string& command, const RunConfig& config,
                    const RunLedger& ledger) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["tool_version"] = kToolVersion;
  j["config_sha256"] = sha256_hex(config.canonical());
  j["seed"] = config.augment.seed;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  std::vector<std::string> sorted_inputs = ledger.inputs;
  std::sort(sorted_inputs.begin(), sorted_inputs.end());
  sorted_inputs.erase(std::unique(sorted_inputs.begin(), sorted_inputs.end()),
                      sorted_inputs.end());
  for (const std::string& path : sorted_inputs) inputs[path] = sha256_file(path);
  j["inputs"] = inputs;
  j["artifacts"] = ledger.artifacts;

  std::ofstream out(config.out_dir + "/manifest.jsonl", std::ios::app | std::ios::binary);
  if (!out) throw std::runtime_error("cannot append manifest in " + config.out_dir);
  out << j.dump() << "\n";
}

std::string require(const std::string& value, const char* key) {
  if (value.empty()) {
    throw UsageError(std::string("config key '") + key + "' is required for this command");
  }
  return value;
}

ParallelCorpus swapped(const ParallelCorpus& corpus) {
  ParallelCorpus out;
  for (const SentencePair& pair : corpus.pairs()) out.append(pair.target, pair.source);
  return out;
}

AlignmentLinks swapped(const AlignmentLinks& links) {
  AlignmentLinks out;
  out.links.resize(links.size());
  for (std::size_t p = 0; p < links.size(); ++p) {
    for (const auto& [i, j] : links.links[p]) out.links[p].push_back({j, i});
    std::sort(out.links[p].begin(), out.links[p].end());
  }
  return out;
}

Vocabulary side_vocab(const std::string& file, const std::vector<Sentence>& sentences,
                      std::size_t cap, RunLedger* ledger) {
  if (!file.empty()) {
    ledger->input(file);
    return Vocabulary::load(file);
  }
  return Vocabulary::build(sentences, cap);
}

std::map<std::string, uint64_t> token_counts(const std::vector<Sentence>& sentences) {
  std::map<std::string, uint64_t> counts;
  for (const Sentence& sentence : sentences) {
    for (const std::string& token : sentence) ++counts[token];
  }
  return counts;
}

void cmd_build_vocab(const RunConfig& config, RunLedger* ledger) {
  require(config.source_path, "source");
  require(config.target_path, "target");
  ledger->input(config.source_path);
  ledger->input(config.target_path);
  ParallelCorpus corpus =
      load_parallel(config.source_path, config.target_path, config.lowercase);
  Vocabulary source = Vocabulary::build(corpus.source_sentences(), config.vocab_cap);
  Vocabulary target = Vocabulary::build(corpus.target_sentences(), config.vocab_cap);
  source.save(ledger->artifact(config.out_dir + "/vocab.source.tsv"));
  target.save(ledger->artifact(config.out_dir + "/vocab.target.tsv"));
}

void cmd_train_lm(const RunConfig& config, RunLedger* ledger) {
  require(config.lm_corpus, "lm.corpus");
  ledger->input(config.lm_corpus);
  std::vector<Sentence> sentences = load_sentences(config.lm_corpus, config.lowercase);
  Vocabulary vocab = side_vocab(config.lm_vocab, sentences, config.vocab_cap, ledger);
  Direction direction = parse_direction(config.lm_direction);
  NGramLM lm = NGramLM::train(sentences, config.lm_order, direction, vocab);
  lm.save_arpa(
      ledger->artifact(config.out_dir + "/lm_" + config.lm_direction + ".arpa"));
}

void cmd_align(const RunConfig& config, RunLedger* ledger) {
  require(config.source_path, "source");
  require(config.target_path, "target");
  ledger->input(config.source_path);
  ledger->input(config.target_path);
  ParallelCorpus corpus =
      load_parallel(config.source_path, config.target_path, config.lowercase);
  std::vector<double> direct_ll, inverse_ll;
  TranslationLexicon em =
      train_ibm1(corpus, config.align_iterations, &direct_ll, &inverse_ll);
  for (std::size_t i = 0; i < direct_ll.size(); ++i) {
    std::cout << "iteration " << (i + 1) << " direct_loglik " << direct_ll[i]
              << " inverse_loglik " << inverse_ll[i] << "\n";
  }
  AlignmentLinks links = viterbi_alignments(corpus, em);
  save_alignments(links, ledger->artifact(config.out_dir + "/alignments.pharaoh"));
  TranslationLexicon tables = lexical_tables_from_alignments(corpus, links);
  tables.save(ledger->artifact(config.out_dir + "/lexicon.tsv"));
}

struct EngineInputs {
  ParallelCorpus view;  // substitution side first
  Vocabulary sub_vocab;
  Vocabulary other_vocab;
  RareWordSet rare;
  NGramLM forward;
  NGramLM backward;
  NGramLM target_lm;
  AlignmentLinks links;
  TranslationLexicon lexicon;
};

EngineInputs prepare_engine(const RunConfig& config, const ParallelCorpus& corpus,
                            RunLedger* ledger) {
  bool sub_is_source = config.substitution_side == "source";
  EngineInputs in;
  in.view = sub_is_source ? corpus : swapped(corpus);

  std::vector<Sentence> sub_side = in.view.source_sentences();
  std::vector<Sentence> other_side = in.view.target_sentences();

  const std::string& sub_vocab_file = sub_is_source ? config.vocab_source : config.vocab_target;
  const std::string& other_vocab_file = sub_is_source ? config.vocab_target : config.vocab_source;
  in.sub_vocab = side_vocab(sub_vocab_file, sub_side, config.vocab_cap, ledger);
  in.other_vocab = side_vocab(other_vocab_file, other_side, config.vocab_cap, ledger);
  in.rare = rare_words(in.sub_vocab, config.augment.rare_threshold);

  const std::string& sub_mono_file = sub_is_source ? config.mono_source : config.mono_target;
  const std::string& other_mono_file = sub_is_source ? config.mono_target : config.mono_source;
  std::vector<Sentence> sub_mono =
      sub_mono_file.empty() ? sub_side : load_sentences(sub_mono_file, config.lowercase);
  std::vector<Sentence> other_mono =
      other_mono_file.empty() ? other_side : load_sentences(other_mono_file, config.lowercase);
  ledger->input(sub_mono_file);
  ledger->input(other_mono_file);

  if (!config.lm_forward_arpa.empty()) {
    ledger->input(config.lm_forward_arpa);
    in.forward = NGramLM::load_arpa(config.lm_forward_arpa, Direction::kForward);
  } else {
    in.forward = NGramLM::train(sub_mono, config.lm_order, Direction::kForward, in.sub_vocab);
  }
  if (!config.lm_backward_arpa.empty()) {
    ledger->input(config.lm_backward_arpa);
    in.backward = NGramLM::load_arpa(config.lm_backward_arpa, Direction::kBackward);
  } else {
    in.backward = NGramLM::train(sub_mono, config.lm_order, Direction::kBackward, in.sub_vocab);
  }
  if (!config.lm_target_arpa.empty()) {
    ledger->input(config.lm_target_arpa);
    in.target_lm = NGramLM::load_arpa(config.lm_target_arpa, Direction::kForward);
  } else {
    in.target_lm =
        NGramLM::train(other_mono, config.lm_order, Direction::kForward, in.other_vocab);
  }

  if (!config.align_file.empty()) {
    ledger->input(config.align_file);
    AlignmentLinks raw = load_alignments(config.align_file, corpus);
    in.links = sub_is_source ? std::move(raw) : swapped(raw);
  } else {
    TranslationLexicon em = train_ibm1(in.view, config.align_iterations);
    in.links = viterbi_alignments(in.view, em);
  }

  if (!config.align_lexicon.empty()) {
    // Interpreted in the substitution frame: column 1 is the substitution
    // side regardless of substitution_side.
    ledger->input(config.align_lexicon);
    in.lexicon = TranslationLexicon::load(config.align_lexicon);
  } else {
    in.lexicon = lexical_tables_from_alignments(in.view, in.links);
  }
  return in;
}

void cmd_augment(const RunConfig& config, RunLedger* ledger) {
  require(config.source_path, "source");
  require(config.target_path, "target");
  ledger->input(config.source_path);
  ledger->input(config.target_path);
  ParallelCorpus corpus =
      load_parallel(config.source_path, config.target_path, config.lowercase);
  EngineInputs in = prepare_engine(config, corpus, ledger);

  TdaModels models;
  models.forward = &in.forward;
  models.backward = &in.backward;
  models.target_lm = &in.target_lm;
  models.links = &in.links;
  models.lexicon = &in.lexicon;
  models.rare = &in.rare;
  models.vocab = &in.sub_vocab;

  AugmentResult result = run_tda(in.view, models, config.augment);

  bool sub_is_source = config.substitution_side == "source";
  ParallelCorpus out_corpus =
      sub_is_source ? std::move(result.corpus) : swapped(result.corpus);
  write_parallel(out_corpus, ledger->artifact(config.out_dir + "/augmented.source.txt"),
                 ledger->artifact(config.out_dir + "/augmented.target.txt"));
  save_records(result.records, ledger->artifact(config.out_dir + "/records.jsonl"));

  AugmentationStats stats = augmentation_stats(result.records);
  nlohmann::ordered_json j;
  j["substitution_side"] = config.substitution_side;
  j["original_pairs"] = corpus.size();
  j["augmented_pairs"] = result.records.empty()
                             ? 0
                             : out_corpus.size() - corpus.size();
  j["accepted_substitutions"] = stats.total;
  j["passes_run"] = result.passes_run;
  j["rare_words_targeted"] = in.rare.size();
  j["rare_words_touched"] = stats.per_substitute.size();
  nlohmann::ordered_json per_pass = nlohmann::ordered_json::object();
  for (const auto& [pass, count] : stats.per_pass) per_pass[std::to_string(pass)] = count;
  j["per_pass"] = per_pass;
  nlohmann::ordered_json discards = nlohmann::ordered_json::object();
  for (const auto& [reason, count] : result.discard_counts) discards[reason] = count;
  j["discards"] = discards;
  nlohmann::ordered_json per_word = nlohmann::ordered_json::object();
  for (const auto& [word, count] : stats.per_substitute) per_word[word] = count;
  j["per_substitute"] = per_word;
  write_file(ledger->artifact(config.out_dir + "/augment_stats.json"), j.dump(2) + "\n");
}

void cmd_oversample(const RunConfig& config, RunLedger* ledger) {
  require(config.source_path, "source");
  require(config.target_path, "target");
  require(config.records_file, "records.file");
  ledger->input(config.source_path);
  ledger->input(config.target_path);
  ledger->input(config.records_file);
  ParallelCorpus corpus =
      load_parallel(config.source_path, config.target_path, config.lowercase);
  std::vector<AugmentationRecord> records = load_records(config.records_file);
  ParallelCorpus out = oversample(corpus, records);
  write_parallel(out, ledger->artifact(config.out_dir + "/oversampled.source.txt"),
                 ledger->artifact(config.out_dir + "/oversampled.target.txt"));
}

void cmd_learn_bpe(const RunConfig& config, RunLedger* ledger) {
  require(config.source_path, "source");
  require(config.target_path, "target");
  ledger->input(config.source_path);
  ledger->input(config.target_path);
  std::vector<Sentence> source = load_sentences(config.source_path, config.lowercase);
  std::vector<Sentence> target = load_sentences(config.target_path, config.lowercase);
  if (config.bpe_joint) {
    std::vector<Sentence> both = source;
    both.insert(both.end(), target.begin(), target.end());
    learn_bpe(both, config.bpe_merges)
        .save(ledger->artifact(config.out_dir + "/bpe.codes"));
  } else {
    learn_bpe(source, config.bpe_merges)
        .save(ledger->artifact(config.out_dir + "/bpe.source.codes"));
    learn_bpe(target, config.bpe_merges)
        .save(ledger->artifact(config.out_dir + "/bpe.target.codes"));
  }
}

void cmd_apply_bpe(const RunConfig& config, RunLedger* ledger) {
  require(config.bpe_input, "bpe.input");
  require(config.bpe_codes, "bpe.codes");
  ledger->input(config.bpe_input);
  ledger->input(config.bpe_codes);
  std::vector<Sentence> sentences = load_sentences(config.bpe_input, config.lowercase);
  MergeTable table = MergeTable::load(config.bpe_codes);
  std::vector<Sentence> out;
  out.reserve(sentences.size());
  for (const Sentence& sentence : sentences) out.push_back(apply_bpe(sentence, table));
  std::string name = fs::path(config.bpe_input).filename().string();
  write_sentences(out, ledger->artifact(config.out_dir + "/" + name + ".bpe"));
}

void cmd_analyze(const RunConfig& config, RunLedger* ledger) {
  require(config.analysis_system, "analysis.system");
  require(config.analysis_references, "analysis.references");
  ledger->input(config.analysis_system);
  ledger->input(config.analysis_references);
  std::vector<Sentence> system =
      load_sentences(config.analysis_system, config.lowercase);
  std::vector<Sentence> references =
      load_sentences(config.analysis_references, config.lowercase);
  if (system.size() != references.size()) {
    throw std::runtime_error("line count mismatch between " + config.analysis_system +
                             " (" + std::to_string(system.size()) + ") and " +
                             config.analysis_references + " (" +
                             std::to_string(references.size()) + ")");
  }

  nlohmann::ordered_json j;
  std::string text;
  BleuScore bleu = corpus_bleu(system, references);
  {
    nlohmann::ordered_json b;
    b["score"] = bleu.score;
    b["precisions"] = bleu.precisions;
    b["brevity_penalty"] = bleu.brevity_penalty;
    b["hypothesis_length"] = bleu.hypothesis_length;
    b["reference_length"] = bleu.reference_length;
    j["bleu"] = b;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "BLEU = %.4f (p1=%.4f p2=%.4f p3=%.4f p4=%.4f bp=%.4f)\n", bleu.score,
                  bleu.precisions[0], bleu.precisions[1], bleu.precisions[2],
                  bleu.precisions[3], bleu.brevity_penalty);
    text += buf;
  }
  double ratio = length_ratio(system, references);
  j["length_ratio"] = ratio;
  {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "length ratio = %.4f\n", ratio);
    text += buf;
  }

  if (!config.analysis_vocab.empty()) {
    ledger->input(config.analysis_vocab);
    Vocabulary vocab = Vocabulary::load(config.analysis_vocab);
    RareWordSet rare = rare_words(vocab, config.augment.rare_threshold);
    std::map<std::string, uint64_t> augmented_counts;
    if (!config.analysis_augmented.empty()) {
      ledger->input(config.analysis_augmented);
      augmented_counts =
          token_counts(load_sentences(config.analysis_augmented, config.lowercase));
    }
    // Unique word types on whole (pre-BPE) words.
    CoverageReport coverage =
        rare_word_coverage(system, references, rare, augmented_counts,
                           config.augment.rare_threshold, config.analysis_case_fold);
    nlohmann::ordered_json c;
    c["rare_in_ref"] = coverage.rare_in_ref;
    c["generated"] = coverage.generated;
    c["not_generated"] = coverage.not_generated;
    c["affected_by_augmentation"] = coverage.affected_by_augmentation;
    j["coverage"] = c;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "rare words in references = %llu, generated = %llu, not generated = "
                  "%llu, affected by augmentation = %llu\n",
                  static_cast<unsigned long long>(coverage.rare_in_ref),
                  static_cast<unsigned long long>(coverage.generated),
                  static_cast<unsigned long long>(coverage.not_generated),
                  static_cast<unsigned long long>(coverage.affected_by_augmentation));
    text += buf;
  }

  if (!config.analysis_records.empty()) {
    ledger->input(config.analysis_records);
    AugmentationStats stats = augmentation_stats(load_records(config.analysis_records));
    nlohmann::ordered_json s;
    s["total"] = stats.total;
    nlohmann::ordered_json per_pass = nlohmann::ordered_json::object();
    for (const auto& [pass, count] : stats.per_pass) per_pass[std::to_string(pass)] = count;
    s["per_pass"] = per_pass;
    nlohmann::ordered_json per_word = nlohmann::ordered_json::object();
    for (const auto& [word, count] : stats.per_substitute) per_word[word] = count;
    s["per_substitute"] = per_word;
    j["augmentation"] = s;
    text += "accepted substitutions = " + std::to_string(stats.total) + "\n";
  }

  write_file(ledger->artifact(config.out_dir + "/report.json"), j.dump(2) + "\n");
  write_file(ledger->artifact(config.out_dir + "/report.txt"), text);
  std::cout << text;
}

}  // namespace

std::vector<std::string> command_names() {
  return {"build-vocab", "train-lm", "align",     "augment",
          "oversample",  "learn-bpe", "apply-bpe", "analyze"};
}

void run_command(const std::string& command, const RunConfig& config) {
  using Handler = void (*)(const RunConfig&, RunLedger*);
  static const std::map<std::string, Handler> handlers = {
      {"build-vocab", &cmd_build_vocab}, {"train-lm", &cmd_train_lm},
      {"align", &cmd_align},             {"augment", &cmd_augment},
      {"oversample", &cmd_oversample},   {"learn-bpe", &cmd_learn_bpe},
      {"apply-bpe", &cmd_apply_bpe},     {"analyze", &cmd_analyze},
  };
  auto it = handlers.find(command);
  if (it == handlers.end()) {
    throw UsageError("unknown command: " + command);
  }

  fs::create_directories(config.out_dir);
  DirLock lock(config.out_dir);

  // Echo the effective configuration to the run log.
  std::cout << "# " << command << " (tool " << kToolVersion << ")\n"
            << config.canonical();

  RunLedger ledger;
  it->second(config, &ledger);
  write_manifest(command, config, ledger);
}

}  // namespace tda
