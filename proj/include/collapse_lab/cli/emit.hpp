// Copyright 2026 The collapse-lab Authors
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

// Serializes a RunReport to CSV, JSON and SVG with byte-stable output.
#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "collapse_lab/cli/runner.hpp"

namespace collapse_lab::cli {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal that parses back to the same double (never more than 17
/// significant digits). Non-finite values render as "inf", "-inf", "nan".
std::string format_number(double v);

std::string to_csv(const RunReport& report);
std::string to_json(const RunReport& report);
std::string to_svg(const Plot& plot);

std::string sha256_hex(const std::string& bytes);

/// Writes the selected formats into `dir` (created if missing) and returns
/// the manifest in write order.
std::vector<ManifestEntry> emit_report(const RunReport& report, const std::filesystem::path& dir,
                                       const std::vector<std::string>& formats);

}  // namespace collapse_lab::cli
