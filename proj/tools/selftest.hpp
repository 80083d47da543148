// Copyright 2026 The listdec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

#ifndef LISTDEC_TOOLS_SELFTEST_HPP
#define LISTDEC_TOOLS_SELFTEST_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace listdec::selftest {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;  // "k/n instances" style counters
};

/// Runs every module's invariant sweep at the suite's instance counts.
/// suite is "fast" or "full". Honors LISTDEC_SELFTEST_INJECT_FAIL=1 by
/// registering one known-bad check (harness sanity hook).
std::vector<CheckResult> run_all(const std::string& suite, std::uint64_t seed);

}  // namespace listdec::selftest

#endif  // LISTDEC_TOOLS_SELFTEST_HPP
