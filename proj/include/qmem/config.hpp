// Copyright 2026 The qmemsim Authors
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

#include <map>
#include <string>

#include "qmem/memory_channel.hpp"
#include "qmem/photon_stats.hpp"

namespace qmem {

// Flat `key = value` configuration files. Lines starting with '#' and
// blank lines are ignored.

using FlatConfig = std::map<std::string, std::string>;

FlatConfig parse_flat_config(const std::string& text);
FlatConfig read_flat_config(const std::string& path);

/// Fills a MemoryConfig from the map; unknown keys are ignored so one
/// file can carry harness settings too. Validates the result.
MemoryConfig memory_config_from(const FlatConfig& cfg);

DetectionChain detection_chain_from(const FlatConfig& cfg);

/// Harness default for the mean photon number, key `default_nbar`.
double default_nbar_from(const FlatConfig& cfg, double fallback);

/// Serializes a full configuration file (memory + detection chain).
std::string format_config(const MemoryConfig& mem, const DetectionChain& chain,
                          double default_nbar);

void write_config_file(const std::string& path, const MemoryConfig& mem,
                       const DetectionChain& chain, double default_nbar);

}  // namespace qmem
