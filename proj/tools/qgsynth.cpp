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

#include <csignal>
#include <iostream>
#include <stop_token>
#include <string>
#include <vector>

#include "qgsynth/cli.hpp"

namespace {

std::stop_source g_stop;
volatile std::sig_atomic_t g_signalled = 0;

extern "C" void on_signal(int) {
  // A second signal terminates immediately.
  if (g_signalled) std::_Exit(qgsynth::cli::kInterrupted);
  g_signalled = 1;
  g_stop.request_stop();
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::vector<std::string> args(argv + 1, argv + argc);
  return qgsynth::cli::run(args, std::cout, std::cerr, g_stop.get_token());
}
