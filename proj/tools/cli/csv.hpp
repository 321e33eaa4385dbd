#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "genopt/harness.hpp"

namespace genopt::cli {

/// 17 significant digits, scientific ("%.16e"); inf/nan spelled by printf.
[[nodiscard]] std::string format_real(double x);
[[nodiscard]] std::string format_optional(const std::optional<double>& x);

inline constexpr const char* kTrajectoryHeader = "step,loss,eta,eta_candidate,fit_accepted,fit_r2,grad_norm,status";

/// Rows joined with ',' and terminated by '\n' (LF only).
void write_row(std::ostream& out, const std::vector<std::string>& cells);

void write_trajectory(std::ostream& out, const RunResult& result);

}  // namespace genopt::cli
