// Copyright 2026 The vfm Authors
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

#ifndef VFM_SENSITIVITY_AUDIT_H_
#define VFM_SENSITIVITY_AUDIT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "vfm/dataset.h"
#include "vfm/partition.h"

namespace vfm {

struct SensitivityAuditConfig {
  TaskKind task = TaskKind::kLinear;
  int d = 4;
  int num_parties = 2;
  int pairs = 1000;
  // Records per dataset; neighbors differ in one of them.
  int records = 10;
  std::uint64_t seed = 1;
  // Fault injection: the first pair's replacement record gets x_0 = 2.
  bool inject_out_of_range = false;
};

struct SensitivityCheck {
  std::string scope;  // "global", "P2 closed-form", "P2 definitional", ...
  double bound = 0.0;
  double max_distance = 0.0;
  std::size_t violations = 0;
};

struct SensitivityAuditReport {
  int pairs = 0;
  std::vector<SensitivityCheck> checks;
  // Pairs containing a record outside the input domain. They are excluded
  // from the bound checks: the bounds only hold on the domain.
  std::size_t ingestion_faults = 0;
  // Human-readable description of each offending pair (capped).
  std::vector<std::string> offending;
  std::size_t Violations() const;
  bool Passed() const { return Violations() == 0 && ingestion_faults == 0; }
};

// L1 distance between the full coefficient vectors of two datasets.
double CoefficientDistance(const std::vector<double>& a,
                           const std::vector<double>& b);

// Coefficients of a record set computed straight from the loss formulas,
// without any domain validation.
std::vector<double> UncheckedCoefficients(const std::vector<Record>& records,
                                          TaskKind task, int d);

// Draws random neighboring dataset pairs from the input domain and checks
// the coefficient distance against the global sensitivity, each party's
// closed-form sensitivity and each party's definitional sensitivity.
SensitivityAuditReport RunSensitivityAudit(const SensitivityAuditConfig& config);

}  // namespace vfm

#endif  // VFM_SENSITIVITY_AUDIT_H_
