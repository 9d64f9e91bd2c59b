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
#include <string>
#include <string_view>
#include <vector>

namespace qgsynth {

// Unicode NFC normalization. Invalid UTF-8 sequences are replaced with U+FFFD.
std::string nfc(std::string_view text);

// Full Unicode lowercase mapping (root locale).
std::string to_lower(std::string_view text);

std::string_view trim(std::string_view text);

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

// Writes through a sibling temp file and renames, so readers never observe a
// half-written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::vector<std::string> split(std::string_view text, char delimiter);

// Splits on runs of Unicode whitespace.
std::vector<std::string> split_whitespace(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view separator);

// floor(value + 0.5); the single rounding rule for every count derived from
// a fraction.
std::size_t round_half_up(double value);

// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

// Fisher-Yates permutation of [0, n) driven by mt19937_64 with rejection
// sampling, so the result is identical across standard libraries.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

// Mixes a seed with a string (e.g. a content hash) into a new 64-bit seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view salt);

}  // namespace qgsynth
