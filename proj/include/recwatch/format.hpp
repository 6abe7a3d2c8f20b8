// Copyright 2026 The recwatch Authors
//
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


#ifndef RECWATCH_FORMAT_HPP_
#define RECWATCH_FORMAT_HPP_

#include <cstdio>
#include <string>

namespace recwatch {

/// Shortest stable text form used in every CSV artifact.
inline std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace recwatch

#endif  // RECWATCH_FORMAT_HPP_
