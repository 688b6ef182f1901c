#pragma once

// Subcommands of the hfq front end.  Each returns a deterministic report;
// the exit code follows 0 pass, 1 check failure, 2 config error, 3 math error.

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"
#include "hfq/checks.hpp"

namespace hfq::cli {

enum ExitCode { kExitPass = 0, kExitCheckFailed = 1, kExitConfig = 2, kExitMath = 3 };

struct CommandResult {
  int exit_code = kExitPass;
  nlohmann::ordered_json report;
  std::string csv;  // flow trajectories or check tables, when requested
};

CommandResult cmd_inspect(const JobConfig& c);
CommandResult cmd_flow(const JobConfig& c, bool csv);
CommandResult cmd_star(const JobConfig& c);
CommandResult cmd_check(const JobConfig& c);
// inspect + flow summary + star + check in one document
CommandResult cmd_report(const JobConfig& c);

std::string checks_csv(const CheckSuite& s);

// Full front end: argv without the program name.  Writes the report to
// --out or out, diagnostics to err, and returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hfq::cli
