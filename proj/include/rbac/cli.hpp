#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "rbac/admin_action.hpp"

namespace rbac::cli {

enum ExitStatus : int {
  kOk = 0,         // success or allow
  kDenied = 1,     // deny, or violations found
  kUsage = 2,      // bad command line
  kPolicy = 3,     // policy or trace file does not parse
  kIo = 4,         // file or audit store I/O
};

/// Runs one subcommand. `args` excludes the program name. Data goes to `out`,
/// diagnostics to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Translates admin words ("grant alice Doctor", "add-sod dynamic pay t1 t2")
/// into a recordable action. Throws rbac::Error(INVALID_ARGUMENT).
AdminAction parse_admin_words(const std::vector<std::string>& words);

}  // namespace rbac::cli
