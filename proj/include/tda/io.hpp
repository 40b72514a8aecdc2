#pragma once

#include <string>
#include <vector>

namespace tda {

// Reads a UTF-8 text file into lines. Strips a trailing '\r' per line.
// Throws std::runtime_error if the file cannot be opened.
std::vector<std::string> read_lines(const std::string& path);

// Writes lines joined by '\n' with a final trailing newline.
void write_lines(const std::string& path, const std::vector<std::string>& lines);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace tda
