#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "choquard/config.hpp"
#include "choquard/diagnostics.hpp"

namespace choq {

/// Exit-code contract: 0 success, 1 runtime/solver failure, 2 validation or
/// regime refusal.  These functions throw (std::invalid_argument for refusals,
/// std::runtime_error for failures); run_command maps exceptions to codes.

void cmd_validate(const RunConfig& cfg, std::ostream& out);
void cmd_solve_limit(const RunConfig& cfg, const std::vector<double>& lambdas, std::ostream& out);
void cmd_concentrate(const RunConfig& cfg, std::ostream& out);
void cmd_nonexist(const RunConfig& cfg, std::ostream& out);

int run_command(const std::string& name, const RunConfig& cfg,
                const std::vector<double>& lambdas, std::ostream& out, std::ostream& err);

}  // namespace choq
