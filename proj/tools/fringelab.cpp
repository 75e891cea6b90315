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

#include <cstdint>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "fringelab/cli.hpp"
#include "fringelab/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fringelab: two-path interferometry fringes, fits and Fisher information"};
  app.require_subcommand(1);

  fringelab::cli::Invocation inv;
  std::string config;
  std::uint64_t seed = 0;
  std::string out = ".";
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());

  for (const char* name : {"hom", "simulate", "fit", "predict", "reproduce-fig3"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON configuration file")->required();
    sub->add_option("--seed", seed, "overrides the configured seed");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fringelab::cli::kConfigError;
  }

  const auto* sub = app.get_subcommands().front();
  inv.command = sub->get_name();
  inv.config = config;
  inv.out_dir = out;
  if (sub->count("--seed") > 0) inv.seed = seed;
  fringelab::set_thread_count(threads);

  const auto result = fringelab::cli::run(inv);
  for (const auto& path : result.written) std::cout << path.string() << '\n';
  if (!result.message.empty()) std::cerr << "fringelab: " << result.message << '\n';
  return result.exit_code;
}
