#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace muskat {

struct VerifyCheck {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_pass = true;
};

/// Runs every property suite on seeded inputs at grid size n. Deterministic:
/// the same (seed, n) reproduces the measured residuals bit for bit.
VerifyReport run_verification(std::uint64_t seed, std::size_t n);

/// Fixed-format table of the report, one line per check.
std::string format_verify_report(const VerifyReport& report);

}  // namespace muskat
