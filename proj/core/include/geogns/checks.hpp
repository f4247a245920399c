#pragma once

#include <string>
#include <vector>

namespace geogns::checks {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Fast invariant sweeps over every module (seconds in total), used by the
// `check` CLI verb.
std::vector<CheckResult> run_invariant_suite(unsigned seed = 1);

}  // namespace geogns::checks
