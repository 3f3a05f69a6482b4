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

#ifndef MCAGG_ERRORS_H_
#define MCAGG_ERRORS_H_

#include <stdexcept>
#include <string>

namespace mcagg {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define MCAGG_DEFINE_ERROR(Name)                             \
  class Name : public Error {                                \
   public:                                                   \
    explicit Name(const std::string& what) : Error(what) {} \
  }

MCAGG_DEFINE_ERROR(UnknownState);
MCAGG_DEFINE_ERROR(UnknownNode);
MCAGG_DEFINE_ERROR(Overflow);
MCAGG_DEFINE_ERROR(DimensionMismatch);
MCAGG_DEFINE_ERROR(NumericalFailure);
MCAGG_DEFINE_ERROR(InvalidStage);
MCAGG_DEFINE_ERROR(MissingDuals);
MCAGG_DEFINE_ERROR(MissingCertificate);
MCAGG_DEFINE_ERROR(InfeasiblePolicy);
MCAGG_DEFINE_ERROR(InfeasibleModel);
MCAGG_DEFINE_ERROR(InvalidArgument);
MCAGG_DEFINE_ERROR(ParseError);

#undef MCAGG_DEFINE_ERROR

}  // namespace mcagg

#endif  // MCAGG_ERRORS_H_
