#pragma once

#include <iosfwd>

#include "compstat/report.hpp"

namespace compstat {

// Exit codes: 0 all checks pass, 1 check failure, 2 solver failure, 3 config error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// The analyze command body: every point of cfg, run concurrently, merged in input order.
RunReport run_analyze(const RunConfig& cfg);
// Every selected benchmark at its default point, in each selected mode.
RunReport run_verify_all(const RunConfig& cfg);

}  // namespace compstat
