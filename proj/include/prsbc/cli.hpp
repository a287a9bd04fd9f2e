#pragma once

namespace prsbc::cli {

enum ExitCode : int {
  kOk = 0,
  kOracleFailure = 1,
  kInvalidInput = 2,
  kSafetyViolation = 3,
};

/// `prsbc run|trials|selfcheck ...`; returns the process exit code.
int main(int argc, char** argv);

}  // namespace prsbc::cli
