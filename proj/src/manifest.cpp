// Copyright 2026 The qgsynth Authors
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

#include "qgsynth/manifest.hpp"

#include <nlohmann/json.hpp>

#include "qgsynth/error.hpp"
#include "qgsynth/text.hpp"

namespace qgsynth {
namespace {

using nlohmann::json;

json fingerprint_map(const std::map<std::string, FileFingerprint>& files) {
  json out = json::object();
  for (const auto& [name, fp] : files) out[name] = {{"path", fp.path}, {"sha256", fp.sha256}};
  return out;
}

std::map<std::string, FileFingerprint> fingerprint_map_from(const json& j) {
  std::map<std::string, FileFingerprint> out;
  for (const auto& [name, v] : j.items()) {
    out[name] = {v.at("path").get<std::string>(), v.at("sha256").get<std::string>()};
  }
  return out;
}

json to_json_value(const ExperimentManifest& m) {
  json j = {
      {"schema_version", m.schema_version},
      {"run_id", m.run_id},
      {"command", m.command},
      {"seeds", m.seeds},
      {"inputs", fingerprint_map(m.inputs)},
      {"outputs", fingerprint_map(m.outputs)},
      {"parameters", m.parameters},
      {"toolkit_version", m.toolkit_version},
  };
  j["style_preset"] = m.style_preset ? json(*m.style_preset) : json(nullptr);
  j["style_fingerprint"] = m.style_fingerprint ? json(*m.style_fingerprint) : json(nullptr);
  j["mode"] = m.mode ? json(*m.mode) : json(nullptr);
  j["subset_size"] = m.subset_size ? json(*m.subset_size) : json(nullptr);
  j["mix_fraction"] = m.mix_fraction ? json(*m.mix_fraction) : json(nullptr);
  if (m.gateway) {
    const auto& g = *m.gateway;
    j["gateway"] = {{"endpoint", g.endpoint},       {"model_name", g.model_name},
                    {"scorer_model", g.scorer_model}, {"temperature", g.temperature},
                    {"top_p", g.top_p},             {"max_output_tokens", g.max_output_tokens}};
  } else {
    j["gateway"] = nullptr;
  }
  return j;
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

std::string compute_run_id(ExperimentManifest m) {
  m.run_id.clear();
  return sha256_hex(to_json_value(m).dump()).substr(0, 16);
}

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

void diff_json(const json& a, const json& b, const std::string& pointer,
               std::vector<ManifestDiff>& out) {
  if (a.is_object() && b.is_object()) {
    std::map<std::string, int> keys;
    for (const auto& [k, _] : a.items()) keys[k] |= 1;
    for (const auto& [k, _] : b.items()) keys[k] |= 2;
    for (const auto& [k, where] : keys) {
      if (pointer.empty() && k == "run_id") continue;
      const std::string child = pointer + "/" + k;
      if (where == 3) {
        diff_json(a.at(k), b.at(k), child, out);
      } else if (where == 1) {
        out.push_back({child, scalar_text(a.at(k)), "<absent>"});
      } else {
        out.push_back({child, "<absent>", scalar_text(b.at(k))});
      }
    }
    return;
  }
  if (a != b) out.push_back({pointer, scalar_text(a), scalar_text(b)});
}

}  // namespace

ExperimentManifest manifest_for(const RunParameters& p) {
  ExperimentManifest m;
  m.command = p.command;
  m.seeds = p.seeds;
  for (const auto& [name, path] : p.inputs) m.inputs[name] = {path.string(), sha256_file(path)};
  for (const auto& [name, path] : p.outputs) m.outputs[name] = {path.string(), sha256_file(path)};
  m.style_preset = p.style_preset;
  m.style_fingerprint = p.style_fingerprint;
  m.mode = p.mode;
  m.subset_size = p.subset_size;
  m.mix_fraction = p.mix_fraction;
  m.gateway = p.gateway;
  m.parameters = p.parameters;
  m.toolkit_version = QGSYNTH_VERSION;
  m.run_id = compute_run_id(m);
  return m;
}

std::string manifest_to_json(const ExperimentManifest& manifest) {
  return to_json_value(manifest).dump(2) + "\n";
}

ExperimentManifest manifest_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, std::string("manifest: ") + e.what());
  }
  try {
    ExperimentManifest m;
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != ExperimentManifest::kSchemaVersion) {
      throw Error(ErrorKind::kParse,
                  "manifest: unsupported schema_version " + std::to_string(m.schema_version));
    }
    m.run_id = j.at("run_id").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
    m.inputs = fingerprint_map_from(j.at("inputs"));
    m.outputs = fingerprint_map_from(j.at("outputs"));
    m.parameters = j.at("parameters").get<std::map<std::string, std::string>>();
    m.toolkit_version = j.at("toolkit_version").get<std::string>();
    m.style_preset = optional_field<std::string>(j, "style_preset");
    m.style_fingerprint = optional_field<std::string>(j, "style_fingerprint");
    m.mode = optional_field<std::string>(j, "mode");
    m.subset_size = optional_field<std::size_t>(j, "subset_size");
    m.mix_fraction = optional_field<double>(j, "mix_fraction");
    if (auto it = j.find("gateway"); it != j.end() && !it->is_null()) {
      GatewayFingerprint g;
      g.endpoint = it->at("endpoint").get<std::string>();
      g.model_name = it->at("model_name").get<std::string>();
      g.scorer_model = it->at("scorer_model").get<std::string>();
      g.temperature = it->at("temperature").get<double>();
      g.top_p = it->at("top_p").get<double>();
      g.max_output_tokens = it->at("max_output_tokens").get<int>();
      m.gateway = g;
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("manifest: ") + e.what());
  }
}

void write_manifest(const ExperimentManifest& manifest, const std::filesystem::path& path) {
  write_file_atomic(path, manifest_to_json(manifest));
}

ExperimentManifest read_manifest(const std::filesystem::path& path) {
  return manifest_from_json(read_file(path));
}

std::filesystem::path manifest_path_for(const std::filesystem::path& artifact) {
  if (std::filesystem::is_directory(artifact)) return artifact / "manifest.json";
  auto p = artifact;
  p += ".manifest.json";
  return p;
}

VerifyResult verify_manifest(const ExperimentManifest& recorded,
                             const ExperimentManifest& current) {
  VerifyResult result;
  diff_json(to_json_value(recorded), to_json_value(current), "", result.diffs);
  return result;
}

VerifyResult verify_manifest_files(const ExperimentManifest& recorded) {
  ExperimentManifest current = recorded;
  auto rehash = [](std::map<std::string, FileFingerprint>& files) {
    for (auto& [_, fp] : files) {
      if (std::filesystem::exists(fp.path)) {
        fp.sha256 = sha256_file(fp.path);
      } else {
        fp.sha256 = "<missing>";
      }
    }
  };
  rehash(current.inputs);
  rehash(current.outputs);
  return verify_manifest(recorded, current);
}

}  // namespace qgsynth
