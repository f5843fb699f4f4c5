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

#include "ubirisk/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ubirisk/common.hpp"
#include "ubirisk/csv.hpp"

extern char** environ;

namespace ubirisk {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_string(buffer.str());
}

Config Config::from_string(const std::string& text) {
    Config config;
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw UsageError("config line " + std::to_string(line_no) + ": empty key");
        config.values_[key] = value;
    }
    return config;
}

void Config::apply_env(const char* prefix) {
    const std::string pre(prefix);
    for (char** env = environ; env && *env; ++env) {
        std::string entry(*env);
        auto eq = entry.find('=');
        if (eq == std::string::npos || entry.compare(0, pre.size(), pre) != 0) continue;
        std::string key = entry.substr(pre.size(), eq - pre.size());
        for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        values_[key] = entry.substr(eq + 1);
    }
}

std::optional<std::string> Config::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
    auto v = get(key);
    return v ? *v : fallback;
}

double Config::num_or(const std::string& key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    auto num = parse_double(*v);
    if (!num) throw UsageError("config key '" + key + "': not a number: " + *v);
    return *num;
}

int Config::int_or(const std::string& key, int fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    auto num = parse_long(*v);
    if (!num) throw UsageError("config key '" + key + "': not an integer: " + *v);
    return static_cast<int>(*num);
}

std::uint64_t Config::u64_or(const std::string& key, std::uint64_t fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    auto num = parse_long(*v);
    if (!num || *num < 0) throw UsageError("config key '" + key + "': not a seed: " + *v);
    return static_cast<std::uint64_t>(*num);
}

}  // namespace ubirisk
