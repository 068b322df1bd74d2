// Copyright 2026 The lorentz-bg Authors.
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

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "lorentz/config.hpp"
#include "lorentz/errors.hpp"

namespace lorentz {

/// Output tables of one run, by file name.
using FileMap = std::map<std::string, std::string>;

inline void write_file(const std::filesystem::path &path, const std::string &bytes)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw resource_error("cannot write " + path.string());
    f << bytes;
    if (!f)
        throw resource_error("write failed for " + path.string());
}

/// Writes every file plus manifest.json: subcommand, code version, seed,
/// config hash and text, caller extras, and the FNV-1a hash of each file.
/// Nothing time- or machine-dependent goes in, so reruns are byte-identical.
inline void write_run(const std::filesystem::path &dir, const std::string &subcommand, const ExperimentConfig &cfg,
                      const FileMap &files, const nlohmann::ordered_json &extra = nlohmann::ordered_json::object())
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw resource_error("cannot create output directory " + dir.string() + ": " + ec.message());
    nlohmann::ordered_json manifest;
    manifest["subcommand"] = subcommand;
    manifest["code_version"] = code_version;
    manifest["seed"] = cfg.seed;
    manifest["config_hash"] = fnv1a_hex(cfg.canonical());
    manifest["config"] = cfg.canonical();
    for (const auto &[k, v] : extra.items())
        manifest[k] = v;
    auto fl = nlohmann::ordered_json::array();
    for (const auto &[name, bytes] : files) {
        write_file(dir / name, bytes);
        fl.push_back({{"file", name}, {"fnv1a", fnv1a_hex(bytes)}});
    }
    manifest["files"] = fl;
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

} // namespace lorentz
