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

#include <span>
#include <string>
#include <vector>

#include "dtrsum/evaluation.hpp"

namespace dtrsum::tools {

// One overlay row per frame.
struct CurveRow {
  std::size_t frame = 0;
  double score = 0.0;
  bool ground_truth = false;
  bool selected = false;
};

std::vector<CurveRow> BuildCurve(std::span<const double> scores,
                                 std::span<const std::uint8_t> ground_truth,
                                 std::span<const std::uint8_t> selected);

// frame_index,score,ground_truth,selected
std::string CurveCsv(std::span<const CurveRow> rows);

// Ground-truth bars, selected keyshot spans and the score polyline.
std::string CurveSvg(const std::string& title, std::span<const CurveRow> rows);

}  // namespace dtrsum::tools
