# Copyright 2026 The runfuzz Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Directed greybox fuzzing over simulated programs."""

from ._runfuzz import (
    Campaign,
    Config,
    Error,
    Program,
    approach_ratio,
    cli,
    load_program,
    parse_program,
)

__all__ = [
    "Campaign",
    "Config",
    "Error",
    "Program",
    "approach_ratio",
    "cli",
    "load_program",
    "parse_program",
]
