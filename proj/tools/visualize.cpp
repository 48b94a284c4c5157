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

#include "visualize.hpp"

#include <cstdio>

namespace dtrsum::tools {

std::vector<CurveRow> BuildCurve(std::span<const double> scores,
                                 std::span<const std::uint8_t> ground_truth,
                                 std::span<const std::uint8_t> selected) {
  if (scores.size() != ground_truth.size() || scores.size() != selected.size()) {
    throw ValidationError("visualize: " + std::to_string(scores.size()) + " scores, " +
                          std::to_string(ground_truth.size()) + " ground-truth frames, " +
                          std::to_string(selected.size()) + " selection frames");
  }
  std::vector<CurveRow> rows(scores.size());
  for (std::size_t t = 0; t < scores.size(); ++t) {
    rows[t] = {t, scores[t], ground_truth[t] != 0, selected[t] != 0};
  }
  return rows;
}

std::string CurveCsv(std::span<const CurveRow> rows) {
  std::string out = "frame_index,score,ground_truth,selected\n";
  char buf[96];
  for (const CurveRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%d,%d\n", r.frame, r.score,
                  r.ground_truth ? 1 : 0, r.selected ? 1 : 0);
    out += buf;
  }
  return out;
}

namespace {

std::string Escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Emits one rect per maximal run of flagged frames.
template <typename Pred>
void Spans(std::string& out, std::span<const CurveRow> rows, Pred flagged, double x0,
           double dx, double y, double h, const char* fill) {
  char buf[256];
  std::size_t t = 0;
  while (t < rows.size()) {
    if (!flagged(rows[t])) {
      ++t;
      continue;
    }
    std::size_t end = t;
    while (end < rows.size() && flagged(rows[end])) ++end;
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\" fill=\"%s\"/>\n",
                  x0 + dx * static_cast<double>(t), y, dx * static_cast<double>(end - t), h,
                  fill);
    out += buf;
    t = end;
  }
}

}  // namespace

std::string CurveSvg(const std::string& title, std::span<const CurveRow> rows) {
  constexpr double kWidth = 800.0, kHeight = 240.0, kLeft = 40.0, kTop = 30.0;
  constexpr double kPlotW = 740.0, kPlotH = 160.0, kStripH = 12.0;
  const double dx = rows.empty() ? 0.0 : kPlotW / static_cast<double>(rows.size());
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                "viewBox=\"0 0 %.0f %.0f\">\n",
                kWidth, kHeight, kWidth, kHeight);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof(buf), "<text x=\"%.0f\" y=\"18\" font-size=\"13\">", kLeft);
  out += buf;
  out += Escape(title) + "</text>\n";

  // Ground-truth frames as dark bars behind the curve.
  out += "<g id=\"ground-truth\">\n";
  Spans(out, rows, [](const CurveRow& r) { return r.ground_truth; }, kLeft, dx, kTop,
        kPlotH, "#1f3b73");
  out += "</g>\n<g id=\"keyshots\">\n";
  Spans(out, rows, [](const CurveRow& r) { return r.selected; }, kLeft, dx,
        kTop + kPlotH + 6.0, kStripH, "#e08a1e");
  out += "</g>\n";

  std::snprintf(buf, sizeof(buf),
                "<rect x=\"%.0f\" y=\"%.0f\" width=\"%.0f\" height=\"%.0f\" fill=\"none\" "
                "stroke=\"#888\"/>\n",
                kLeft, kTop, kPlotW, kPlotH);
  out += buf;
  if (!rows.empty()) {
    out += "<polyline id=\"scores\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\" "
           "points=\"";
    for (std::size_t t = 0; t < rows.size(); ++t) {
      std::snprintf(buf, sizeof(buf), "%s%.3f,%.3f", t ? " " : "",
                    kLeft + dx * (static_cast<double>(t) + 0.5),
                    kTop + kPlotH * (1.0 - rows[t].score));
      out += buf;
    }
    out += "\"/>\n";
  }
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.0f\" y=\"%.0f\" font-size=\"11\">frames 0..%zu</text>\n", kLeft,
                kHeight - 8.0, rows.empty() ? 0 : rows.size() - 1);
  out += buf;
  out += "</svg>\n";
  return out;
}

}  // namespace dtrsum::tools
