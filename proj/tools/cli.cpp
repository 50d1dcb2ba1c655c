#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hpl/errors.hpp"

namespace hpl::cli {
namespace {

namespace fs = std::filesystem;

char delimiter(Format f) { return f == Format::csv ? ',' : '\t'; }

std::string extension(Format f) { return f == Format::csv ? ".csv" : ".tsv"; }

std::string format_value(double v) { return fmt::format("{:.12g}", v); }

ExperimentModel model_at(const RunConfig &config, double mean) {
    ExperimentModel m = config.sim.model;
    m.source = TwinBeamState(mean, config.modes);
    return m;
}

SimConfig sim_at(const RunConfig &config, double mean, std::uint64_t seed_offset) {
    SimConfig s = config.sim;
    s.model = model_at(config, mean);
    s.seed = config.sim.seed + seed_offset;
    return s;
}

std::ofstream open_output(const fs::path &path) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return f;
}

void finish(std::ofstream &f, const fs::path &path) {
    f.flush();
    if (!f)
        throw std::runtime_error("write to '" + path.string() + "' failed");
}

template <class Write>
void emit(const std::optional<std::string> &path, std::ostream &fallback, Write &&write) {
    if (!path) {
        write(fallback);
        return;
    }
    auto f = open_output(*path);
    write(f);
    finish(f, *path);
}

void warn_undefined(const std::vector<FigureRow> &rows, std::ostream &err) {
    for (const auto &row : rows)
        if (!row.value)
            err << "warning: " << row.tag << " undefined: " << row.error << "\n";
}

std::optional<double> value_of(const std::vector<FigureRow> &rows, std::string_view tag) {
    for (const auto &row : rows)
        if (row.tag == tag && row.value)
            return row.value->value;
    return std::nullopt;
}

std::optional<double> error_of(const std::vector<FigureRow> &rows, std::string_view tag) {
    for (const auto &row : rows)
        if (row.tag == tag && row.value)
            return row.value->std_err;
    return std::nullopt;
}

template <class F>
std::optional<double> try_value(F &&f) {
    try {
        const double v = f();
        return std::isfinite(v) ? std::optional(v) : std::nullopt;
    } catch (const std::exception &) {
        return std::nullopt;
    }
}

std::vector<double> log_grid(double lo, double hi, int points) {
    std::vector<double> g;
    for (int k = 0; k < points; ++k)
        g.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (points - 1)));
    return g;
}

/// Checks model and simulator parameters up front so bad flags exit with 2.
void validate(const RunConfig &config) {
    try {
        const auto sim = sim_at(config, config.mean, 0);
        sim.validate();
        GateConfig gate;
        gate.rep_period_ps = sim.rep_period_ps();
        gate.gate_window_ps = config.gate_ps;
        gate.validate();
    } catch (const DomainError &e) {
        throw UsageError(e.what());
    }
    for (double m : config.grid)
        if (!(m >= 0.0) || !std::isfinite(m))
            throw UsageError(fmt::format("grid value {} is not a finite mean photon number >= 0", m));
    for (double c : config.car_grid)
        if (!(c > 1.0) || !std::isfinite(c))
            throw UsageError(fmt::format("CAR target {} must be finite and > 1", c));
    if (!config.grid.empty() && !config.car_grid.empty())
        throw UsageError("--grid and --car-grid are mutually exclusive");
}

// --- reproduce -------------------------------------------------------------

constexpr double kBandLow = 0.01;
constexpr double kBandHigh = 1.0;

struct Point {
    double mean;
    std::optional<std::vector<FigureRow>> sim;
};

std::vector<Point> simulate_points(const RunConfig &config, const std::vector<double> &means,
                                   std::uint64_t seed_base) {
    std::vector<Point> points;
    for (std::size_t k = 0; k < means.size(); ++k) {
        Point p{means[k], std::nullopt};
        if (!config.theory_only)
            p.sim = estimate_all(run_simulation(sim_at(config, means[k], seed_base + k)));
        points.push_back(std::move(p));
    }
    return points;
}

void push_sim(std::vector<std::optional<double>> &row, const Point &p, std::string_view tag) {
    if (p.sim) {
        row.push_back(value_of(*p.sim, tag));
        row.push_back(error_of(*p.sim, tag));
    } else {
        row.push_back(std::nullopt);
        row.push_back(std::nullopt);
    }
}

Table fig2a(const RunConfig &config, const std::vector<Point> &points) {
    Table t{{"mean_total", "car_theory", "car_sim", "car_sim_err"}, {}};
    for (const auto &p : points) {
        std::vector<std::optional<double>> row{p.mean,
                                               try_value([&] { return car_theory(model_at(config, p.mean)); })};
        push_sim(row, p, "car");
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table fig2b(const RunConfig &config, const std::vector<Point> &points) {
    Table t{{"mean_total", "klyshko_raw_signal_theory", "klyshko_raw_idler_theory",
             "klyshko_corrected_signal_theory", "klyshko_corrected_idler_theory",
             "klyshko_raw_signal_sim", "klyshko_raw_signal_sim_err", "klyshko_raw_idler_sim",
             "klyshko_raw_idler_sim_err", "klyshko_corrected_signal_sim",
             "klyshko_corrected_signal_sim_err", "klyshko_corrected_idler_sim",
             "klyshko_corrected_idler_sim_err"},
            {}};
    for (const auto &p : points) {
        const auto f = estimate_from_probabilities(pulse_probabilities(model_at(config, p.mean)));
        // The theory lumps each arm into one efficiency, which is what the
        // corrected coefficient estimates.
        std::vector<std::optional<double>> row{p.mean, f.mu_s, f.mu_i, config.sim.model.eta_signal,
                                               config.sim.model.eta_idler};
        for (auto tag : {"klyshko_raw_signal", "klyshko_raw_idler", "klyshko_corrected_signal",
                         "klyshko_corrected_idler"})
            push_sim(row, p, tag);
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table fig3(const RunConfig &config, const std::vector<double> &cars, const std::vector<Point> &points) {
    Table t{{"car", "mean_total", "g2_theory", "schmidt_k_theory", "g2_sim", "g2_sim_err", "schmidt_k_sim",
             "schmidt_k_sim_err"},
            {}};
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto &p = points[k];
        const auto g2 = try_value([&] { return g2_unconditional_theory(model_at(config, p.mean)); });
        std::optional<double> schmidt;
        if (g2 && *g2 > 1.0)
            schmidt = 1.0 / (*g2 - 1.0);
        std::vector<std::optional<double>> row{cars[k], p.mean, g2, schmidt};
        push_sim(row, p, "g2_unconditional");
        push_sim(row, p, "schmidt_k");
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table fig4(const RunConfig &config, const std::vector<double> &cars, const std::vector<Point> &points) {
    Table t{{"car", "mean_total", "g2h_theory", "g2h_herald_eta_0.01", "g2h_herald_eta_1",
             "g2h_signal_eta_0.01", "g2h_signal_eta_1", "g2h_sim", "g2h_sim_err"},
            {}};
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto &p = points[k];
        const auto base = model_at(config, p.mean);
        const auto with = [&](double ExperimentModel::*field, double eta) {
            return try_value([&] {
                auto m = base;
                m.*field = eta;
                return g2h_theory(m);
            });
        };
        std::vector<std::optional<double>> row{cars[k],
                                               p.mean,
                                               try_value([&] { return g2h_theory(base); }),
                                               with(&ExperimentModel::eta_idler, kBandLow),
                                               with(&ExperimentModel::eta_idler, kBandHigh),
                                               with(&ExperimentModel::eta_signal, kBandLow),
                                               with(&ExperimentModel::eta_signal, kBandHigh)};
        push_sim(row, p, "g2_heralded");
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table fig5(const RunConfig &config, const std::vector<double> &cars, const std::vector<Point> &points) {
    Table t{{"car", "mean_total", "mean_n_exact", "parity_exact", "mean_n_first", "mean_n_second",
             "parity_first", "parity_second", "mean_n_first_sim", "mean_n_first_sim_err",
             "mean_n_second_sim", "mean_n_second_sim_err", "parity_first_sim", "parity_first_sim_err",
             "parity_second_sim", "parity_second_sim_err"},
            {}};
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto &p = points[k];
        const auto model = model_at(config, p.mean);
        const auto f = estimate_from_probabilities(pulse_probabilities(model));
        const auto exact_mean = try_value([&] { return heralded_mean_and_parity_theory(model).mean_n; });
        const auto exact_parity = try_value([&] { return heralded_mean_and_parity_theory(model).parity; });
        std::vector<std::optional<double>> row{cars[k],           p.mean,           exact_mean,
                                               exact_parity,      f.mean_n_first,   f.mean_n_second,
                                               f.parity_first,    f.parity_second};
        for (auto tag : {"mean_n_first", "mean_n_second", "parity_first", "parity_second"})
            push_sim(row, p, tag);
        t.rows.push_back(std::move(row));
    }
    return t;
}

void reproduce(const RunConfig &config, std::ostream &log) {
    const fs::path dir = config.out.value_or(".");
    const auto means = config.grid.empty() ? log_grid(1e-3, 1e-1, 11) : config.grid;
    const auto cars = config.car_grid.empty()
                          ? std::vector<double>{10, 15, 20, 30, 50, 70, 97.14, 150, 200, 300, 500, 700, 1000}
                          : config.car_grid;
    std::vector<double> car_means;
    for (double c : cars) {
        try {
            car_means.push_back(solve_mean_for_car(model_at(config, config.mean), c));
        } catch (const std::exception &e) {
            throw UsageError(fmt::format("CAR target {}: {}", c, e.what()));
        }
    }

    const auto power_points = simulate_points(config, means, 0);
    const auto car_points = simulate_points(config, car_means, means.size());

    const std::pair<const char *, Table> figures[] = {
        {"fig2a", fig2a(config, power_points)},
        {"fig2b", fig2b(config, power_points)},
        {"fig3", fig3(config, cars, car_points)},
        {"fig4", fig4(config, cars, car_points)},
        {"fig5", fig5(config, cars, car_points)},
    };
    for (const auto &[name, table] : figures) {
        const fs::path path = dir / (std::string(name) + extension(config.format));
        auto f = open_output(path);
        write_table(f, table, config.format);
        finish(f, path);
        log << "wrote " << path.string() << "\n";
    }
}

// --- commands ----------------------------------------------------------------

void simulate(const RunConfig &config, std::ostream &out, std::ostream &err) {
    const auto sim = sim_at(config, config.mean, 0);
    const auto record = run_simulation(sim);
    const auto rows = estimate_all(record);
    warn_undefined(rows, err);

    if (config.out) {
        const fs::path dir = *config.out;
        fs::create_directories(dir);
        const auto counts_path = dir / "counts.csv";
        auto counts = open_output(counts_path);
        write_count_record(counts, record);
        finish(counts, counts_path);
        const auto figures_path = dir / ("figures" + extension(config.format));
        auto figures = open_output(figures_path);
        write_figures(figures, rows, config.format);
        finish(figures, figures_path);
    } else {
        write_count_record(out, record);
        out << "\n";
        write_figures(out, rows, config.format);
    }

    if (config.tags_out) {
        auto tagged = sim;
        tagged.emit_tags = true;
        auto f = open_output(*config.tags_out);
        emit_tag_stream(tagged, f);
        finish(f, *config.tags_out);
    }
}

void analyse_tags(const RunConfig &config, std::ostream &out, std::ostream &err) {
    std::ifstream in(*config.input);
    if (!in)
        throw std::runtime_error("cannot open '" + *config.input + "'");
    GateConfig gate;
    gate.rep_period_ps = config.sim.rep_period_ps();
    gate.gate_window_ps = config.gate_ps;
    gate.trigger_mode = config.trigger_mode;
    gate.unknown_channels = config.skip_unknown ? UnknownChannelPolicy::skip : UnknownChannelPolicy::error;

    ParseOptions options;
    options.channels = gate.channels;
    options.unknown_channels = gate.unknown_channels;
    const auto parsed = parse_tags(in, options);
    if (parsed.skipped_unknown > 0)
        err << "warning: skipped " << parsed.skipped_unknown << " tags on unknown channels\n";

    const auto rows = estimate_all(gate_and_count(parsed.tags, gate));
    warn_undefined(rows, err);
    emit(config.out, out, [&](std::ostream &o) { write_figures(o, rows, config.format); });
}

void dispatch(const RunConfig &config, std::ostream &out, std::ostream &err) {
    switch (config.command) {
    case Command::theory: {
        const auto table = theory_table(config, err);
        emit(config.out, out, [&](std::ostream &o) { write_table(o, table, config.format); });
        break;
    }
    case Command::simulate:
        simulate(config, out, err);
        break;
    case Command::tags:
        analyse_tags(config, out, err);
        break;
    case Command::sweep: {
        const auto table = sweep_table(config);
        emit(config.out, out, [&](std::ostream &o) { write_table(o, table, config.format); });
        break;
    }
    case Command::reproduce:
        reproduce(config, err);
        break;
    }
}

} // namespace

void write_table(std::ostream &out, const Table &table, Format format) {
    const char d = delimiter(format);
    for (std::size_t c = 0; c < table.header.size(); ++c)
        out << (c ? std::string(1, d) : "") << table.header[c];
    out << "\n";
    for (const auto &row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c)
                out << d;
            if (row[c])
                out << format_value(*row[c]);
        }
        out << "\n";
    }
}

void write_figures(std::ostream &out, const std::vector<FigureRow> &rows, Format format) {
    const char d = delimiter(format);
    out << "method_tag" << d << "value" << d << "std_err\n";
    for (const auto &row : rows) {
        out << row.tag << d;
        if (row.value)
            out << format_value(row.value->value) << d << format_value(row.value->std_err);
        else
            out << d;
        out << "\n";
    }
}

std::vector<double> resolve_grid(const RunConfig &config) {
    if (!config.grid.empty())
        return config.grid;
    std::vector<double> means;
    for (double target : config.car_grid) {
        try {
            means.push_back(solve_mean_for_car(model_at(config, config.mean), target));
        } catch (const std::exception &e) {
            throw UsageError(fmt::format("CAR target {}: {}", target, e.what()));
        }
    }
    return means;
}

Table theory_table(const RunConfig &config, std::ostream &warnings) {
    auto means = resolve_grid(config);
    if (means.empty())
        means.push_back(config.mean);

    Table t{{"mean_total", "car", "g2_unconditional", "g2h", "mean_n_exact", "parity_exact", "mean_n_first",
             "mean_n_second", "parity_second"},
            {}};
    for (double mean : means) {
        const auto model = model_at(config, mean);
        const auto f = estimate_from_probabilities(pulse_probabilities(model));
        std::optional<HeraldedMoments> exact;
        try {
            exact = heralded_mean_and_parity_theory(model);
        } catch (const UndefinedResult &) {
        }
        if (!f.car)
            warnings << "warning: mean_total=" << format_value(mean) << ": CAR undefined (no clicks)\n";
        t.rows.push_back({mean, f.car, f.g2_unconditional, f.g2h,
                          exact ? std::optional(exact->mean_n) : std::nullopt,
                          exact ? std::optional(exact->parity) : std::nullopt, f.mean_n_first,
                          f.mean_n_second, f.parity_second});
    }
    return t;
}

Table sweep_table(const RunConfig &config) {
    const auto means = resolve_grid(config);
    if (means.empty())
        throw UsageError("sweep needs a non-empty --grid or --car-grid");

    Table t{{"mean_total", "pulses"}, {}};
    for (const auto &row : estimate_all(CountRecord{1})) {
        t.header.push_back(row.tag);
        t.header.push_back(row.tag + "_err");
    }
    // Grid points run one after another; each simulation uses every worker,
    // so the table comes out in grid order.
    for (std::size_t k = 0; k < means.size(); ++k) {
        const auto sim = sim_at(config, means[k], k);
        std::vector<std::optional<double>> row{means[k], static_cast<double>(sim.pulses)};
        for (const auto &fig : estimate_all(run_simulation(sim))) {
            row.push_back(fig.value ? std::optional(fig.value->value) : std::nullopt);
            row.push_back(fig.value ? std::optional(fig.value->std_err) : std::nullopt);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    RunConfig config;
    CLI::App app{"Heralded single-photon source characterisation: theory, simulation and tag analysis", "hpl"};
    app.set_config("--config", "", "Flat `key = value` file; command-line flags win");
    app.allow_config_extras(false);
    app.require_subcommand(1, 1);

    std::string format = "csv";
    std::string trigger = "explicit";
    app.add_option("--seed", config.sim.seed, "Random seed");
    app.add_option("--pulses", config.sim.pulses, "Simulated pulses")->check(CLI::PositiveNumber);
    app.add_option("--mean", config.mean, "Mean photon-pair number per pulse (pump-power proxy)");
    app.add_option("--modes", config.modes, "Schmidt mode number K");
    app.add_option("--eta-idler", config.sim.model.eta_idler, "Lumped idler (herald) efficiency");
    app.add_option("--eta-signal", config.sim.model.eta_signal, "Lumped signal efficiency");
    app.add_option("--split", config.sim.model.signal_split, "Fraction of signal routed to s1");
    app.add_option("--dark", config.sim.model.dark_prob, "Dark-count probability per gate");
    app.add_option("--n-max", config.sim.model.n_max, "Fock cutoff (0: automatic)");
    app.add_option("--gate-ps", config.gate_ps, "Detection window in ps");
    app.add_option("--rep-hz", config.sim.rep_rate, "Pulse repetition rate in Hz");
    app.add_option("--grid", config.grid, "Comma-separated mean_total values")->delimiter(',');
    app.add_option("--car-grid", config.car_grid, "Comma-separated CAR targets")->delimiter(',');
    app.add_option("--out", config.out, "Output file (directory for simulate and reproduce)");
    app.add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "tsv"}));

    auto *theory = app.add_subcommand("theory", "Oracle predictions on a brightness grid");
    auto *simulate = app.add_subcommand("simulate", "Monte Carlo run: counts and figures of merit");
    simulate->add_option("--tags-out", config.tags_out, "Also write the synthetic tag stream");
    auto *tags = app.add_subcommand("tags", "Gate a tag file and estimate figures of merit");
    tags->add_option("input", config.input, "Tag file (channel,timestamp_ps lines)")->required();
    tags->add_option("--trigger", trigger, "Slot timing: explicit trigger tags or fixed clock")
        ->check(CLI::IsMember({"explicit", "clock"}));
    tags->add_flag("--skip-unknown", config.skip_unknown, "Skip tags on unmapped channels");
    auto *sweep = app.add_subcommand("sweep", "Simulated sweep over a brightness grid");
    auto *reproduce = app.add_subcommand("reproduce", "Figure-ready CSVs for the characterisation plots");
    reproduce->add_flag("--theory-only", config.theory_only, "Skip the simulated columns");
    for (auto *sub : {theory, simulate, tags, sweep, reproduce})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    config.format = format == "tsv" ? Format::tsv : Format::csv;
    config.trigger_mode = trigger == "clock" ? TriggerMode::fixed_clock : TriggerMode::explicit_trigger;
    config.sim.gate_window = static_cast<double>(config.gate_ps) * 1e-12;
    if (theory->parsed()) config.command = Command::theory;
    if (simulate->parsed()) config.command = Command::simulate;
    if (tags->parsed()) config.command = Command::tags;
    if (sweep->parsed()) config.command = Command::sweep;
    if (reproduce->parsed()) config.command = Command::reproduce;

    try {
        validate(config);
        dispatch(config, out, err);
    } catch (const UsageError &e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace hpl::cli
