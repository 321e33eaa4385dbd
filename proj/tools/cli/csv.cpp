#include "cli/csv.hpp"

#include <cstdio>

namespace genopt::cli {

std::string format_real(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

std::string format_optional(const std::optional<double>& x) { return x ? format_real(*x) : std::string(); }

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        out << cells[i];
    }
    out << '\n';
}

void write_trajectory(std::ostream& out, const RunResult& result) {
    out << kTrajectoryHeader << '\n';
    for (const auto& r : result.records) {
        write_row(out, {std::to_string(r.step), format_real(r.loss), format_real(r.eta),
                        format_optional(r.eta_candidate), r.fit_accepted ? "1" : "0", format_optional(r.fit_r2),
                        format_real(r.grad_norm), to_string(r.status)});
    }
}

}  // namespace genopt::cli
