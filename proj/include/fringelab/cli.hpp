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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace fringelab::cli {

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,
  kConfigError = 2,
  kParseError = 3,
  kNotConverged = 4,
};

struct Invocation {
  std::string command;  // hom | simulate | fit | predict | reproduce-fig3
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;  // overrides the config's seed
  std::filesystem::path out_dir = ".";
};

struct CommandResult {
  int exit_code = kSuccess;
  std::string message;
  std::vector<std::filesystem::path> written;
};

/// Loads the config, runs the command and maps failures onto exit codes.
/// Never throws for user errors.
CommandResult run(const Invocation& invocation);

/// Individual commands on an already parsed config. Relative input paths are
/// resolved against `base_dir`. These throw ConfigError, ParseError and
/// friends; `run` translates them.
CommandResult cmd_hom(const nlohmann::json& config, const std::filesystem::path& base_dir,
                      const Invocation& invocation);
CommandResult cmd_simulate(const nlohmann::json& config, const Invocation& invocation);
CommandResult cmd_fit(const nlohmann::json& config, const std::filesystem::path& base_dir,
                      const Invocation& invocation);
CommandResult cmd_predict(const nlohmann::json& config, const Invocation& invocation);
CommandResult cmd_reproduce_fig3(const nlohmann::json& config, const Invocation& invocation);

}  // namespace fringelab::cli
