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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qgsynth {

struct FileFingerprint {
  std::string path;
  std::string sha256;

  friend bool operator==(const FileFingerprint&, const FileFingerprint&) = default;
};

// Sampling configuration of the endpoint(s) a run talked to. Credentials are
// deliberately not representable here.
struct GatewayFingerprint {
  std::string endpoint;
  std::string model_name;
  std::string scorer_model;
  double temperature = 0.0;
  double top_p = 1.0;
  int max_output_tokens = 0;

  friend bool operator==(const GatewayFingerprint&, const GatewayFingerprint&) = default;
};

// Reproducibility record written beside every output artifact.
struct ExperimentManifest {
  static constexpr int kSchemaVersion = 1;

  int schema_version = kSchemaVersion;
  std::string run_id;  // derived from every other field
  std::string command;
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, FileFingerprint> inputs;
  std::map<std::string, FileFingerprint> outputs;
  std::optional<std::string> style_preset;
  std::optional<std::string> style_fingerprint;
  std::optional<std::string> mode;
  std::optional<std::size_t> subset_size;
  std::optional<double> mix_fraction;
  std::optional<GatewayFingerprint> gateway;
  std::map<std::string, std::string> parameters;
  std::string toolkit_version;

  friend bool operator==(const ExperimentManifest&, const ExperimentManifest&) = default;
};

// Everything a caller knows about a run; files are hashed when the manifest
// is built.
struct RunParameters {
  std::string command;
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, std::filesystem::path> inputs;
  std::map<std::string, std::filesystem::path> outputs;
  std::optional<std::string> style_preset;
  std::optional<std::string> style_fingerprint;
  std::optional<std::string> mode;
  std::optional<std::size_t> subset_size;
  std::optional<double> mix_fraction;
  std::optional<GatewayFingerprint> gateway;
  std::map<std::string, std::string> parameters;
};

ExperimentManifest manifest_for(const RunParameters& params);

// Deterministic JSON (sorted keys, 2-space indent).
std::string manifest_to_json(const ExperimentManifest& manifest);
ExperimentManifest manifest_from_json(std::string_view text);

void write_manifest(const ExperimentManifest& manifest, const std::filesystem::path& path);
ExperimentManifest read_manifest(const std::filesystem::path& path);

// "<artifact>.manifest.json", or "<dir>/manifest.json" for directories.
std::filesystem::path manifest_path_for(const std::filesystem::path& artifact);

struct ManifestDiff {
  std::string field;  // JSON pointer, e.g. "/inputs/corpus/sha256"
  std::string recorded;
  std::string current;
};

struct VerifyResult {
  std::vector<ManifestDiff> diffs;
  bool ok() const noexcept { return diffs.empty(); }
};

// Field-by-field comparison; run_id is ignored since it is derived.
VerifyResult verify_manifest(const ExperimentManifest& recorded,
                             const ExperimentManifest& current);

// Re-hashes every recorded input and output file and compares.
VerifyResult verify_manifest_files(const ExperimentManifest& recorded);

}  // namespace qgsynth
