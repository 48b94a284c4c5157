// Copyright 2026 The dtrsum Authors
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

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace dtrsum::tools {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitNumerical = 2,
  kExitIo = 3,
};

// Per-video frame scores in file order.
using ScoreTable = std::vector<std::pair<std::string, std::vector<double>>>;

// video_id,frame_index,score with round-trip precision.
std::string ScoresCsv(const ScoreTable& table);
// Frame indices must run 0..T-1 per video; videos may not repeat.
ScoreTable ParseScoresCsv(const std::string& text, const std::string& source);

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int RunCli(int argc, char** argv);

}  // namespace dtrsum::tools
