// Copyright 2026 The mcagg Authors
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

// Reading and writing problems in the common LP text format.

#ifndef MCAGG_LP_FORMAT_H_
#define MCAGG_LP_FORMAT_H_

#include <string>

#include "mcagg/mip.h"

namespace mcagg {

// Ranged rows are written as two rows named <name> and <name>_hi. Columns
// without a usable name are written as x<index>. The objective constant and the
// column order are stored in comment lines that read_lp_text understands.
std::string write_lp_text(const MipProblem& p);

// Parses the subset emitted by write_lp_text: Minimize/Maximize, Subject To,
// Bounds, Generals, Binaries, End. Throws ParseError.
MipProblem read_lp_text(const std::string& text);

}  // namespace mcagg

#endif  // MCAGG_LP_FORMAT_H_
