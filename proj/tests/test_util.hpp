#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>

#include "tda/corpus.hpp"
#include "tda/io.hpp"

namespace tda::test {

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = (std::filesystem::temp_directory_path() /
             ("tda_test_" + tag + "_" + std::to_string(::getpid())))
                .string();
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return path_ + "/" + name; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

inline Sentence tokens(const std::string& spaced) {
  Sentence out;
  std::size_t start = 0;
  while (start <= spaced.size()) {
    std::size_t space = spaced.find(' ', start);
    if (space == std::string::npos) {
      if (start < spaced.size()) out.push_back(spaced.substr(start));
      break;
    }
    out.push_back(spaced.substr(start, space - start));
    start = space + 1;
  }
  return out;
}

inline std::vector<Sentence> sentences(const std::vector<std::string>& lines) {
  std::vector<Sentence> out;
  for (const std::string& line : lines) out.push_back(tokens(line));
  return out;
}

}  // namespace tda::test
