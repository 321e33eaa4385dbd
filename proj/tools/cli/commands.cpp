#include "cli/commands.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>

#include "cli/config.hpp"
#include "cli/csv.hpp"

namespace genopt::cli {
namespace fs = std::filesystem;

namespace {

/// Runtime failure with a code, reported as exit status 3.
class RuntimeFailure : public Error {
public:
    RuntimeFailure(std::string code, const std::string& message) : Error(message), code_(std::move(code)) {}
    [[nodiscard]] const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

void report(std::ostream& err, const std::string& code, const std::string& message) {
    err << "error[" << code << "]: " << message << '\n';
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        report(err, e.code(), e.what());
        return kExitConfig;
    } catch (const RuntimeFailure& e) {
        report(err, e.code(), e.what());
        return kExitRuntime;
    } catch (const std::exception& e) {
        report(err, "E_RUNTIME", e.what());
        return kExitRuntime;
    }
}

Config load(const CommandOptions& opts) {
    Config c = load_config(opts.config_path);
    if (opts.seed_override) {
        for (auto& e : c.experiments) e.spec.seed = *opts.seed_override;
    }
    return c;
}

fs::path prepare_out_dir(const CommandOptions& opts, const Config& c) {
    fs::path dir = opts.out_dir ? *opts.out_dir : c.output_dir.value_or(".");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw RuntimeFailure("E_OUTPUT_DIR", "cannot create output directory '" + dir.string() + "'");
    }
    return dir;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw RuntimeFailure("E_OUTPUT_DIR", "cannot write '" + path.string() + "'");
    return f;
}

std::vector<ExperimentSpec> specs_of(const Config& c) {
    std::vector<ExperimentSpec> specs;
    for (const auto& e : c.experiments) specs.push_back(e.spec);
    return specs;
}

std::string iters_to_tol_cell(const ExperimentSpec& spec, const RunResult& r) {
    const auto obj = make_problem(spec.problem);
    const auto opt = obj->optimum();
    if (!opt) return "";
    const auto m = convergence_metrics(r, *opt);
    return m.iters_to_tol ? std::to_string(*m.iters_to_tol) : "";
}

std::string gen_label(const ExperimentSpec& s) {
    if (!s.gen) return "off";
    return s.gen->estimator == Estimator::curve_fit ? "fit" : "hvp";
}

}  // namespace

int cmd_run(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Config c = load(opts);
        const fs::path dir = prepare_out_dir(opts, c);
        const auto specs = specs_of(c);
        const auto results = run_experiments(specs, opts.jobs);

        for (std::size_t i = 0; i < specs.size(); ++i) {
            auto f = open_output(dir / (specs[i].name + ".csv"));
            write_trajectory(f, results[i]);
        }
        auto summary = open_output(dir / "summary.csv");
        write_row(summary, {"name", "problem", "optimizer", "gen", "iterations", "steps_run", "final_loss",
                            "fit_attempts", "iters_to_tol", "status"});
        for (std::size_t i = 0; i < specs.size(); ++i) {
            const auto& s = specs[i];
            const auto& r = results[i];
            const std::size_t steps = r.records.empty() ? 0 : r.records.back().step;
            write_row(summary, {s.name, to_string(s.problem.kind), to_string(s.optimizer.kind), gen_label(s),
                                std::to_string(s.iterations), std::to_string(steps), format_real(r.final_loss),
                                std::to_string(r.fit_attempts), iters_to_tol_cell(s, r), to_string(r.status)});
            out << s.name << ": final_loss=" << format_real(r.final_loss) << " status=" << to_string(r.status)
                << " wall_ms=" << std::fixed << std::setprecision(3)
                << std::chrono::duration<double, std::milli>(r.wall_time).count() << std::defaultfloat << '\n';
        }
        return kExitOk;
    });
}

int cmd_grid_search(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Config c = load(opts);
        for (const auto& e : c.experiments) {
            if (e.spec.gen) {
                throw ConfigError("E_CONFIG_INVALID",
                                  e.spec.name + ": grid search needs a baseline optimizer without 'gen'");
            }
        }
        const fs::path dir = prepare_out_dir(opts, c);
        for (const auto& e : c.experiments) {
            GridSearchResult g;
            try {
                g = grid_search_baseline(e.spec, opts.jobs);
            } catch (const InvalidArgument&) {
                throw;
            } catch (const Error& ex) {
                throw RuntimeFailure("E_ALL_DIVERGED", ex.what());
            }
            auto f = open_output(dir / (e.spec.name + "_grid.csv"));
            write_row(f, {"eta", "final_loss", "status", "winner"});
            out << e.spec.name << " (" << to_string(e.spec.optimizer.kind) << " on "
                << to_string(e.spec.problem.kind) << ", " << e.spec.iterations << " iterations)\n";
            for (const auto& p : g.table) {
                const bool winner = p.eta == g.best_eta;
                write_row(f, {format_real(p.eta), format_real(p.final_loss), to_string(p.status), winner ? "1" : "0"});
                out << "  " << format_real(p.eta) << "  " << format_real(p.final_loss) << "  "
                    << to_string(p.status) << (winner ? "  <= best" : "") << '\n';
            }
            out << "  best eta " << format_real(g.best_eta) << " final loss " << format_real(g.best_final_loss)
                << '\n';
        }
        return kExitOk;
    });
}

int cmd_compare(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Config c = load(opts);
        std::map<std::string, const ExperimentEntry*> by_name;
        for (const auto& e : c.experiments) by_name[e.spec.name] = &e;

        std::set<std::string> claimed;
        for (const auto& e : c.experiments) {
            if (e.spec.gen) {
                if (!e.base) {
                    throw ConfigError("E_CONFIG_PAIRING", e.spec.name + ": GeN experiment has no 'base' pair");
                }
                const auto it = by_name.find(*e.base);
                if (it == by_name.end()) {
                    throw ConfigError("E_CONFIG_PAIRING",
                                      e.spec.name + ": base '" + *e.base + "' is not in the config");
                }
                if (it->second->spec.gen) {
                    throw ConfigError("E_CONFIG_PAIRING", e.spec.name + ": base '" + *e.base + "' must not use GeN");
                }
                claimed.insert(*e.base);
            } else if (e.base) {
                throw ConfigError("E_CONFIG_PAIRING", e.spec.name + ": only GeN experiments take a 'base'");
            }
        }
        for (const auto& e : c.experiments) {
            if (!e.spec.gen && !claimed.count(e.spec.name)) {
                throw ConfigError("E_CONFIG_PAIRING", e.spec.name + ": baseline has no GeN counterpart");
            }
            if (e.spec.iterations != c.experiments.front().spec.iterations) {
                throw ConfigError("E_CONFIG_INVALID", "compare: every experiment needs the same iteration count");
            }
        }

        const fs::path dir = prepare_out_dir(opts, c);
        auto specs = specs_of(c);
        for (auto& s : specs) s.log_every = 1;
        const auto results = run_experiments(specs, opts.jobs);

        auto f = open_output(dir / "compare.csv");
        std::vector<std::string> header{"iter"};
        for (const auto& s : specs) header.push_back(s.name);
        write_row(f, header);
        const std::size_t iterations = specs.front().iterations;
        for (std::size_t t = 1; t <= iterations; ++t) {
            std::vector<std::string> row{std::to_string(t)};
            for (const auto& r : results) {
                row.push_back(t <= r.records.size() ? format_real(r.records[t - 1].loss) : std::string());
            }
            write_row(f, row);
        }

        auto summary = open_output(dir / "compare_summary.csv");
        write_row(summary, {"name", "base", "final_loss", "iters_to_tol", "status"});
        for (std::size_t i = 0; i < specs.size(); ++i) {
            const auto& base = c.experiments[i].base;
            const std::string tol = iters_to_tol_cell(specs[i], results[i]);
            write_row(summary, {specs[i].name, base.value_or(""), format_real(results[i].final_loss), tol,
                                to_string(results[i].status)});
            out << std::left << std::setw(24) << specs[i].name << " final_loss=" << format_real(results[i].final_loss)
                << " iters_to_tol=" << (tol.empty() ? "-" : tol) << " status=" << to_string(results[i].status)
                << '\n';
        }
        return kExitOk;
    });
}

}  // namespace genopt::cli
