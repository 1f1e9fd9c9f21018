#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "polymer/statistics.hpp"

namespace polymer {

/// Shortest form that reproduces the double exactly (%.17g).
std::string format_double(double v);

/// One records.jsonl line (no trailing newline):
///   {"replica":I,"seed":"S","values":{"k":v|null,...},"event":{"j":J,"kind":"B"|"C"}}
std::string to_jsonl(const ReplicaRecord& record);
/// Throws IoError on malformed input.
ReplicaRecord parse_jsonl(const std::string& line);

/// Reads every complete, well-formed line. Parsing stops at the first line
/// that is truncated, malformed, or out of index order; `valid_bytes`
/// receives the byte length of the accepted prefix.
std::vector<ReplicaRecord> read_records(const std::filesystem::path& path,
                                        std::uint64_t* valid_bytes = nullptr);

/// CSV table with a fixed header; cells are text, integers, or doubles.
struct SummaryTable {
  using Cell = std::variant<std::monostate, std::string, std::int64_t, double>;

  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  std::string to_csv() const;
};

/// Parses CSV produced by SummaryTable::to_csv into raw strings.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace polymer
