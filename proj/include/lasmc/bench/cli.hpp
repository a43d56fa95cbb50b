#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lasmc::bench {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

// `smc run | reference | selftest`; returns the process exit code.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SelftestResult {
  std::string name;
  bool ok = false;
  std::string detail;
};

// Deterministic oracle cross-checks, fast enough for every build.
std::vector<SelftestResult> run_selftest();

}  // namespace lasmc::bench
