#include "polymer/records.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "polymer/errors.hpp"

namespace polymer {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_jsonl(const ReplicaRecord& record) {
  std::string out;
  out.reserve(64 + 40 * record.values.size());
  out += "{\"replica\":";
  out += std::to_string(record.replica_index);
  out += ",\"seed\":\"";
  out += std::to_string(record.derived_seed);
  out += "\",\"values\":{";
  bool first = true;
  for (const auto& [key, value] : record.values) {
    if (!first) out += ',';
    first = false;
    out += nlohmann::json(key).dump();
    out += ':';
    out += value ? format_double(*value) : "null";
  }
  out += '}';
  if (record.event) {
    out += ",\"event\":{\"j\":";
    out += std::to_string(record.event->j);
    out += ",\"kind\":\"";
    out += record.event->kind == EventKind::B ? "B" : "C";
    out += "\"}";
  }
  out += '}';
  return out;
}

ReplicaRecord parse_jsonl(const std::string& line) {
  try {
    const auto j = nlohmann::ordered_json::parse(line);
    ReplicaRecord r;
    r.replica_index = j.at("replica").get<std::uint64_t>();
    r.derived_seed = std::stoull(j.at("seed").get<std::string>());
    for (const auto& [key, value] : j.at("values").items()) {
      if (value.is_null())
        r.values.emplace_back(key, std::nullopt);
      else
        r.values.emplace_back(key, value.get<double>());
    }
    if (j.contains("event")) {
      const auto& e = j.at("event");
      ReplicaRecord::Event ev;
      ev.j = e.at("j").get<std::int64_t>();
      const auto kind = e.at("kind").get<std::string>();
      if (kind != "B" && kind != "C") throw IoError("bad event kind");
      ev.kind = kind == "B" ? EventKind::B : EventKind::C;
      r.event = ev;
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed record line: ") + e.what());
  } catch (const std::logic_error& e) {
    throw IoError(std::string("malformed record line: ") + e.what());
  }
}

std::vector<ReplicaRecord> read_records(const std::filesystem::path& path,
                                        std::uint64_t* valid_bytes) {
  std::vector<ReplicaRecord> out;
  std::uint64_t accepted = 0;
  std::ifstream in(path, std::ios::binary);
  if (in) {
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    while (pos < text.size()) {
      const std::size_t nl = text.find('\n', pos);
      if (nl == std::string::npos) break;  // unterminated tail
      try {
        ReplicaRecord r = parse_jsonl(text.substr(pos, nl - pos));
        if (r.replica_index != out.size()) break;
        out.push_back(std::move(r));
      } catch (const IoError&) {
        break;
      }
      pos = nl + 1;
      accepted = pos;
    }
  }
  if (valid_bytes) *valid_bytes = accepted;
  return out;
}

void SummaryTable::add_row(std::vector<Cell> row) {
  row.resize(columns.size());
  rows.push_back(std::move(row));
}

std::string SummaryTable::to_csv() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) os << v;
            else if constexpr (std::is_same_v<T, std::int64_t>) os << v;
            else if constexpr (std::is_same_v<T, double>) os << format_double(v);
          },
          row[i]);
    }
    os << '\n';
  }
  return os.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::size_t pos = 0;
    for (;;) {
      const std::size_t comma = line.find(',', pos);
      cells.push_back(line.substr(pos, comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    out.push_back(std::move(cells));
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename onto " + path.string() + ": " + ec.message());
}

}  // namespace polymer
