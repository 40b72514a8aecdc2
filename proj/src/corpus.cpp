#include "tda/corpus.hpp"

#include <stdexcept>

#include "tda/io.hpp"
#include "tda/text.hpp"

namespace tda {

namespace {

Sentence parse_line(const std::string& line, const std::string& path,
                    std::size_t line_no, bool lowercase_tokens) {
  if (line.empty()) {
    throw std::runtime_error("format error: empty line " + std::to_string(line_no) +
                             " in " + path);
  }
  Sentence tokens = split_tokens(line);
  for (std::string& token : tokens) {
    if (token.empty() || token.find('\t') != std::string::npos) {
      throw std::runtime_error("format error: bad token on line " +
                               std::to_string(line_no) + " in " + path);
    }
    if (lowercase_tokens) token = lowercase(token);
  }
  return tokens;
}

}  // namespace

void ParallelCorpus::append(Sentence source, Sentence target) {
  SentencePair pair;
  pair.source = std::move(source);
  pair.target = std::move(target);
  pair.id = pairs_.size();
  pairs_.push_back(std::move(pair));
}

std::vector<Sentence> ParallelCorpus::source_sentences() const {
  std::vector<Sentence> out;
  out.reserve(pairs_.size());
  for (const SentencePair& pair : pairs_) out.push_back(pair.source);
  return out;
}

std::vector<Sentence> ParallelCorpus::target_sentences() const {
  std::vector<Sentence> out;
  out.reserve(pairs_.size());
  for (const SentencePair& pair : pairs_) out.push_back(pair.target);
  return out;
}

ParallelCorpus load_parallel(const std::string& source_path,
                             const std::string& target_path, bool lowercase) {
  std::vector<std::string> source_lines = read_lines(source_path);
  std::vector<std::string> target_lines = read_lines(target_path);
  if (source_lines.size() != target_lines.size()) {
    throw std::runtime_error("alignment error: " + source_path + " has " +
                             std::to_string(source_lines.size()) + " lines but " +
                             target_path + " has " +
                             std::to_string(target_lines.size()));
  }
  ParallelCorpus corpus;
  for (std::size_t i = 0; i < source_lines.size(); ++i) {
    corpus.append(parse_line(source_lines[i], source_path, i + 1, lowercase),
                  parse_line(target_lines[i], target_path, i + 1, lowercase));
  }
  return corpus;
}

std::vector<Sentence> load_sentences(const std::string& path, bool lowercase) {
  std::vector<std::string> lines = read_lines(path);
  std::vector<Sentence> sentences;
  sentences.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    sentences.push_back(parse_line(lines[i], path, i + 1, lowercase));
  }
  return sentences;
}

void write_parallel(const ParallelCorpus& corpus, const std::string& source_path,
                    const std::string& target_path) {
  std::vector<std::string> source_lines, target_lines;
  source_lines.reserve(corpus.size());
  target_lines.reserve(corpus.size());
  for (const SentencePair& pair : corpus.pairs()) {
    source_lines.push_back(join_tokens(pair.source));
    target_lines.push_back(join_tokens(pair.target));
  }
  write_lines(source_path, source_lines);
  write_lines(target_path, target_lines);
}

void write_sentences(const std::vector<Sentence>& sentences, const std::string& path) {
  std::vector<std::string> lines;
  lines.reserve(sentences.size());
  for (const Sentence& sentence : sentences) lines.push_back(join_tokens(sentence));
  write_lines(path, lines);
}

}  // namespace tda
