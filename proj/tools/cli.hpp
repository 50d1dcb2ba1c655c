#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hpl/estimators.hpp"
#include "hpl/pulse_simulator.hpp"
#include "hpl/tagstream.hpp"

namespace hpl::cli {

enum class Command { theory, simulate, tags, sweep, reproduce };
enum class Format { csv, tsv };

struct RunConfig {
    Command command = Command::theory;
    SimConfig sim;
    double mean = 0.0104471;   // CAR ~ 97 with the default efficiencies
    int modes = 1;
    std::uint64_t gate_ps = 500;
    std::vector<double> grid;      ///< mean_total values
    std::vector<double> car_grid;  ///< CAR targets, mapped to mean_total by the oracle
    std::optional<std::string> out;
    std::optional<std::string> input;
    std::optional<std::string> tags_out;
    Format format = Format::csv;
    TriggerMode trigger_mode = TriggerMode::explicit_trigger;
    bool skip_unknown = false;
    bool theory_only = false;
};

/// Thrown for invalid flag values and grids; maps to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A CSV table whose empty cells mark undefined values.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::optional<double>>> rows;
};

void write_table(std::ostream &out, const Table &table, Format format);
/// `method_tag,value,std_err`, one row per estimator.
void write_figures(std::ostream &out, const std::vector<FigureRow> &rows, Format format);

/// Grid of mean_total values: explicit means, or CAR targets mapped by the oracle.
std::vector<double> resolve_grid(const RunConfig &config);

Table theory_table(const RunConfig &config, std::ostream &warnings);
Table sweep_table(const RunConfig &config);

/// Parses argv and runs the command. Returns the process exit code:
/// 0 success, 1 runtime/I-O/parse failure, 2 usage error.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace hpl::cli
