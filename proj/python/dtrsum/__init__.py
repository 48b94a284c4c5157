# Copyright 2026 The dtrsum Authors
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Video summarization with dilated temporal relational networks."""

from dtrsum._core import (
    IoError,
    NumericalError,
    ValidationError,
    budget_frames,
    evaluate_video,
    f_measure,
    infer,
    knapsack_select,
    kts_segment,
    load_annotation,
    load_features,
    precision_recall,
    receptive_field,
    run_cli,
    synth,
    time_span,
    write_features,
)

__all__ = [
    "IoError",
    "NumericalError",
    "ValidationError",
    "budget_frames",
    "evaluate_video",
    "f_measure",
    "infer",
    "knapsack_select",
    "kts_segment",
    "load_annotation",
    "load_features",
    "precision_recall",
    "receptive_field",
    "run_cli",
    "synth",
    "time_span",
    "write_features",
]
