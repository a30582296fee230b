// Copyright 2026 The icumdp Authors.
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

#ifndef ICUMDP_MANIFEST_HPP
#define ICUMDP_MANIFEST_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "icumdp/error.hpp"

namespace icumdp {

/// FNV-1a 64-bit digest of a file's bytes (content identity for manifests).
inline std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file for digest: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (got < static_cast<std::streamsize>(sizeof(buf))) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + hex;
}

/// Run record: command, config echo, seeds, input digests, artifact paths.
/// Contains no timestamps, so identical runs produce identical manifests.
struct Manifest {
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> inputs;  // path -> digest
  std::vector<std::string> outputs;           // paths relative to the output dir

  void add_input(const std::string& path) { inputs[path] = file_digest(path); }
  void add_output(const std::string& relative_path) { outputs.push_back(relative_path); }

  nlohmann::json to_json() const {
    return nlohmann::json{{"command", command}, {"config", config}, {"seed", seed},
                          {"inputs", inputs},   {"outputs", outputs}};
  }
};

inline void write_manifest(const Manifest& manifest, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write manifest: " + path);
  out << manifest.to_json().dump(2) << '\n';
}

}  // namespace icumdp

#endif
