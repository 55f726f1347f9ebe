// Copyright 2026 The ldpfreq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LDPFREQ_VERIFY_H_
#define LDPFREQ_VERIFY_H_

#include <string>
#include <string_view>
#include <vector>

namespace ldpfreq {

struct CheckResult {
  std::string name;
  bool passed;
  std::string detail;
};

// closed-form, symmetric, fisher, urp, hash-census, encoding, all.
std::vector<std::string> verify_suite_names();

// Runs the named oracle suite. Throws std::invalid_argument for an unknown name.
std::vector<CheckResult> run_verify_suite(std::string_view name);

}  // namespace ldpfreq

#endif  // LDPFREQ_VERIFY_H_
