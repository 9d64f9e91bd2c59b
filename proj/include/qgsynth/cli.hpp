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

#include <iosfwd>
#include <stop_token>
#include <string>
#include <vector>

#include "qgsynth/error.hpp"

namespace qgsynth::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kIoFailure = 3,
  kParseFailure = 4,
  kEmptyInput = 5,
  kInvalidData = 6,
  kIdMismatch = 7,
  kAuthFailure = 8,
  kRateLimitedFailure = 9,
  kBadPayload = 10,
  kEndpointUnavailable = 11,
  kContextOverflow = 12,
  kTooManyFailures = 13,
  kVerifyFailed = 14,
  kInterrupted = 130,
};

int exit_code_for(ErrorKind kind);

// Runs one command line (without the program name). Environment variables
// named QGSYNTH_<FLAG> fill flags that were not given explicitly; they win
// over values from --config.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        std::stop_token stop = {});

}  // namespace qgsynth::cli
