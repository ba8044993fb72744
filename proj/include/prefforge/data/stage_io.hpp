#pragma once

#include "prefforge/data/records.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace prefforge::data {

// Error reading a stage file. line() is 1-based; 0 when the file itself could
// not be opened.
class StageFileError : public std::runtime_error {
public:
    StageFileError(const std::string& message, std::size_t line);

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// One serialised record per line: compact UTF-8 JSON terminated by '\n'.
template <class T>
std::string serialize_line(const T& record);

/// Writes records as JSON lines. Every record must pass validate_record for
/// its stage and ids must be unique, otherwise std::invalid_argument is
/// thrown before anything is written. The file is replaced atomically.
template <class T>
void write_stage_file(std::span<const T> records, const std::filesystem::path& path);

template <class T>
void write_stage_file(const std::vector<T>& records, const std::filesystem::path& path) {
    write_stage_file(std::span<const T>(records), path);
}

/// Reads a stage file written by write_stage_file (or by a user, in lenient
/// mode). Strict mode rejects unknown fields; lenient mode keeps them in
/// `extra` and skips blank lines.
template <class T>
std::vector<T> read_stage_file(const std::filesystem::path& path, ReadMode mode = ReadMode::strict);

struct JsonLine {
    std::size_t line = 0;
    Json value;
};

// Parses every line as JSON without applying a schema. Malformed lines raise
// StageFileError naming the line.
std::vector<JsonLine> read_json_lines(const std::filesystem::path& path, bool skip_blank = false);

// Writes `content` to `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace prefforge::data
