// Copyright 2026 The runfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Program documents (JSON):
//
//   {
//     "blocks": ["A", "B", ...],
//     "entry": "A",
//     "edges": [{"src": "A", "dst": "B", "kind": "cf" | "call"}, ...],
//     "guards": {
//       "A": {"offset": 0, "op": "==", "value": 77, "then": "B", "else": "C"},
//       "D": {"cases": [{"offset": 1, "op": "range", "lo": 0, "hi": 3, "to": "E"}],
//             "default": "F"}
//     },
//     "targets": {"file.c:12": ["B"]},
//     "target_weights": {"file.c:12": 1.0},
//     "locations": {"file.c:40": ["C"]},
//     "crash_rules": [{"block": "E", "requires": "B"}],
//     "seeds": ["00ff10"]
//   }
//
// `op` is one of ==, !=, <, >, range. A guard value may be an integer or a
// one-character string. Targets files list one `location [weight]` per line.

#ifndef RUNFUZZ_PROGRAM_HPP_
#define RUNFUZZ_PROGRAM_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "runfuzz/harness.hpp"

namespace runfuzz {

// Throws ParseError with the line (for syntax errors) or the field path.
SimProgram parse_program(std::string_view text);
SimProgram load_program(const std::string& path);

struct TargetsFileResult {
  TargetSpec spec;
  std::vector<std::string> warnings;  // unresolved locations, dropped
};

// Resolves each listed location against the program's targets and
// locations tables.
TargetsFileResult parse_targets_file(std::string_view text, const SimProgram& program);
TargetsFileResult load_targets_file(const std::string& path, const SimProgram& program);

std::string read_text_file(const std::string& path);

}  // namespace runfuzz

#endif  // RUNFUZZ_PROGRAM_HPP_
