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

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fringelab/estimation.hpp"
#include "fringelab/spectral.hpp"

namespace fringelab::io {

/// Fixed 17 significant digits, as printf("%.17g").
std::string format_double(double value);

/// JSON text with every floating-point number printed to 17 significant digits.
std::string dump_json(const nlohmann::json& value, int indent = 2);

/// Throws ParseError with the offending line; line 0 for an empty document.
nlohmann::json parse_json(const std::string& text);
nlohmann::json read_json_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Rows of a CSV with a fixed header. Blank lines are skipped; fields are
/// numeric. Throws ParseError naming the 1-based line.
std::vector<std::vector<double>> parse_numeric_csv(const std::string& text,
                                                   const std::vector<std::string>& header);

/// `x,p,weight` rows.
std::vector<spectral::HomDipPoint> parse_hom_csv(const std::string& text);

/// `theta,class,count` rows; rows sharing a phase form one point, in order of
/// first appearance.
estimation::FringeDataset parse_fringe_csv(const std::string& text,
                                           std::map<int, double> efficiencies = {});
std::string fringe_csv(const estimation::FringeDataset& dataset);

/// Class label -> efficiency, from a JSON object with integer-valued keys.
std::map<int, double> efficiencies_from_json(const nlohmann::json& j);
nlohmann::json to_json(const std::map<int, double>& efficiencies);

/// Header line plus one row per entry, every field formatted with format_double.
std::string numeric_csv(const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& rows);

}  // namespace fringelab::io
