// Copyright 2026 The fringelab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fringelab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>
#include <system_error>

#include "fringelab/errors.hpp"

namespace fringelab::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Row {
  std::size_t line = 0;
  std::vector<std::string_view> fields;
};

// Splits text into non-blank rows after checking the header.
std::vector<Row> split_csv(std::string_view text, const std::vector<std::string>& header) {
  std::vector<Row> rows;
  bool seen_header = false;
  std::size_t line = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    const auto raw = trim(text.substr(pos, end - pos));
    ++line;
    pos = end + 1;
    if (raw.empty()) {
      if (end == text.size()) break;
      continue;
    }
    Row row{line, {}};
    std::size_t start = 0;
    for (;;) {
      const auto comma = raw.find(',', start);
      row.fields.push_back(trim(raw.substr(start, comma == std::string_view::npos ? raw.npos
                                                                                 : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!seen_header) {
      if (row.fields.size() != header.size()) {
        throw ParseError("expected header '" + [&] {
          std::string h;
          for (std::size_t i = 0; i < header.size(); ++i) h += (i ? "," : "") + header[i];
          return h;
        }() + "'", line);
      }
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (row.fields[i] != header[i]) throw ParseError("unexpected header field", line);
      }
      seen_header = true;
    } else {
      if (row.fields.size() != header.size()) {
        throw ParseError("expected " + std::to_string(header.size()) + " fields", line);
      }
      rows.push_back(std::move(row));
    }
    if (end == text.size()) break;
  }
  if (!seen_header) throw ParseError("empty file", 0);
  return rows;
}

double to_double(std::string_view field, std::size_t line) {
  double v = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ParseError("not a finite number: '" + std::string(field) + "'", line);
  }
  return v;
}

std::int64_t to_int(std::string_view field, std::size_t line) {
  std::int64_t v = 0;
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), last, v);
  if (field.empty() || ec != std::errc() || ptr != last) {
    throw ParseError("not an integer: '" + std::string(field) + "'", line);
  }
  return v;
}

void write_json(std::string& out, const nlohmann::json& j, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += nlohmann::json(key).dump();
        out += indent < 0 ? ":" : ": ";
        write_json(out, value, indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& value : j) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        write_json(out, value, indent, depth + 1);
      }
      newline(depth);
      out += ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  if (ec != std::errc()) throw EvaluationError("format_double: conversion failed");
  return std::string(buf, ptr);
}

std::string dump_json(const nlohmann::json& value, int indent) {
  std::string out;
  write_json(out, value, indent, 0);
  out += '\n';
  return out;
}

nlohmann::json parse_json(const std::string& text) {
  if (trim(text).empty()) throw ParseError("empty JSON document", 0);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte; ++i) line += text[i] == '\n';
    throw ParseError(std::string("invalid JSON: ") + e.what(), line);
  }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  return parse_json(read_text_file(path));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(path.string(), "cannot write file");
  out << text;
  if (!out) throw ConfigError(path.string(), "write failed");
}

std::vector<std::vector<double>> parse_numeric_csv(const std::string& text,
                                                   const std::vector<std::string>& header) {
  std::vector<std::vector<double>> out;
  for (const auto& row : split_csv(text, header)) {
    std::vector<double> values;
    values.reserve(row.fields.size());
    for (auto f : row.fields) values.push_back(to_double(f, row.line));
    out.push_back(std::move(values));
  }
  return out;
}

std::vector<spectral::HomDipPoint> parse_hom_csv(const std::string& text) {
  std::vector<spectral::HomDipPoint> out;
  for (const auto& row : split_csv(text, {"x", "p", "weight"})) {
    const double w = to_double(row.fields[2], row.line);
    if (!(w > 0.0)) throw ParseError("weight must be positive", row.line);
    out.push_back({to_double(row.fields[0], row.line), to_double(row.fields[1], row.line), w});
  }
  if (out.empty()) throw ParseError("no data rows", 1);
  return out;
}

estimation::FringeDataset parse_fringe_csv(const std::string& text,
                                           std::map<int, double> efficiencies) {
  std::vector<estimation::FringePoint> points;
  std::map<double, std::size_t> index;
  for (const auto& row : split_csv(text, {"theta", "class", "count"})) {
    const double theta = to_double(row.fields[0], row.line);
    const auto label = to_int(row.fields[1], row.line);
    const auto count = to_int(row.fields[2], row.line);
    if (count < 0) throw ParseError("count must be nonnegative", row.line);
    if (label < std::numeric_limits<int>::min() || label > std::numeric_limits<int>::max()) {
      throw ParseError("class label out of range", row.line);
    }
    auto [it, fresh] = index.try_emplace(theta, points.size());
    if (fresh) points.push_back({theta, {}});
    auto& counts = points[it->second].counts;
    if (!counts.try_emplace(static_cast<int>(label), count).second) {
      throw ParseError("duplicate (theta, class) row", row.line);
    }
  }
  if (points.empty()) throw ParseError("no data rows", 1);
  return estimation::FringeDataset(std::move(points), std::move(efficiencies));
}

std::string fringe_csv(const estimation::FringeDataset& dataset) {
  std::string out = "theta,class,count\n";
  for (const auto& pt : dataset.points()) {
    const std::string theta = format_double(pt.theta);
    for (const auto& [label, count] : pt.counts) {
      out += theta;
      out += ',';
      out += std::to_string(label);
      out += ',';
      out += std::to_string(count);
      out += '\n';
    }
  }
  return out;
}

std::map<int, double> efficiencies_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("efficiencies", "must be an object of class -> eta");
  std::map<int, double> out;
  for (const auto& [key, value] : j.items()) {
    std::int64_t label = 0;
    const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), label);
    if (ec != std::errc() || ptr != key.data() + key.size()) {
      throw ConfigError("efficiencies." + key, "class label must be an integer");
    }
    if (!value.is_number()) throw ConfigError("efficiencies." + key, "must be a number");
    const double eta = value.get<double>();
    if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("efficiencies." + key, "must lie in (0, 1]");
    out[static_cast<int>(label)] = eta;
  }
  return out;
}

nlohmann::json to_json(const std::map<int, double>& efficiencies) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [label, eta] : efficiencies) j[std::to_string(label)] = eta;
  return j;
}

std::string numeric_csv(const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace fringelab::io
