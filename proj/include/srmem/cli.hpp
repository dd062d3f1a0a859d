// Copyright 2026 The srmem Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <ostream>
#include <string>
#include <vector>

// Command-line front end. Subcommands: wavepacket, simulate, chi, fit, synth.
// Settings come from a flat `key = value` file (--config) and from --key
// flags, flags taking precedence.

namespace srmem::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,           // bad arguments or configuration
  kExitNotConverged = 2,    // fit or integrator failed to converge
  kExitIo = 3,              // unreadable input or unwritable output
};

/// Runs one command; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace srmem::cli
