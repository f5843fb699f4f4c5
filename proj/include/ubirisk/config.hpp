// Copyright 2026 The ubirisk Authors
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
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ubirisk {

/// Flat key = value configuration with '#' comments. Environment variables
/// with the UBIRISK_ prefix override file values (UBIRISK_SEED overrides
/// "seed"); command-line flags override both.
class Config {
  public:
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    /// Applies UBIRISK_<UPPERCASED KEY> environment overrides.
    void apply_env(const char* prefix = "UBIRISK_");

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::optional<std::string> get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double num_or(const std::string& key, double fallback) const;
    int int_or(const std::string& key, int fallback) const;
    std::uint64_t u64_or(const std::string& key, std::uint64_t fallback) const;

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    const std::map<std::string, std::string>& values() const { return values_; }

  private:
    std::map<std::string, std::string> values_;
};

}  // namespace ubirisk
