#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hpl/analytic_oracle.hpp"
#include "hpl/detector_model.hpp"
#include "hpl/errors.hpp"
#include "hpl/estimators.hpp"
#include "hpl/photon_statistics.hpp"
#include "hpl/pulse_simulator.hpp"
#include "hpl/tagstream.hpp"

namespace py = pybind11;
using namespace hpl;

namespace {

py::array_t<double> to_array(std::span<const double> v) {
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

using TagTuple = std::pair<std::uint32_t, std::uint64_t>;

std::vector<TimeTag> to_tags(const std::vector<TagTuple> &in) {
    std::vector<TimeTag> out;
    out.reserve(in.size());
    for (const auto &[ch, t] : in)
        out.push_back({ch, t});
    return out;
}

py::dict figures_dict(const std::vector<FigureRow> &rows) {
    py::dict d;
    for (const auto &row : rows) {
        if (row.value)
            d[py::str(row.tag)] = py::make_tuple(row.value->value, row.value->std_err);
        else
            d[py::str(row.tag)] = py::none();
    }
    return d;
}

template <class T>
py::object opt(const std::optional<T> &v) {
    return v ? py::cast(*v) : py::none();
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "C++ core of the heralded single-photon characterisation toolkit";
    m.attr("__version__") = HPL_VERSION;

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<UndefinedResult>(m, "UndefinedResult", PyExc_ArithmeticError);
    py::register_exception<TruncationError>(m, "TruncationError", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

    py::class_<TwinBeamState>(m, "TwinBeamState")
        .def(py::init<double, int>(), py::arg("mean_total"), py::arg("mode_count") = 1)
        .def_property_readonly("mean_total", &TwinBeamState::mean_total)
        .def_property_readonly("mode_count", &TwinBeamState::mode_count)
        .def_property_readonly("mode_mean", &TwinBeamState::mode_mean)
        .def("__repr__", [](const TwinBeamState &s) {
            return "TwinBeamState(mean_total=" + std::to_string(s.mean_total()) +
                   ", mode_count=" + std::to_string(s.mode_count()) + ")";
        });

    py::class_<PhotonNumberDistribution>(m, "PhotonNumberDistribution")
        .def_property_readonly("probs", [](const PhotonNumberDistribution &d) { return to_array(d.probs()); })
        .def_property_readonly("tail_bound", &PhotonNumberDistribution::tail_bound)
        .def_property_readonly("n_max", &PhotonNumberDistribution::n_max)
        .def("mean", &PhotonNumberDistribution::mean)
        .def("factorial_moment", &PhotonNumberDistribution::factorial_moment, py::arg("order"))
        .def("parity", &PhotonNumberDistribution::parity);

    m.def("thermal_pmf", &thermal_pmf, py::arg("mean"), py::arg("n_max"));
    m.def("multimode_total_pmf",
          [](const TwinBeamState &s, std::optional<int> n_max) {
              return n_max ? multimode_total_pmf(s, *n_max) : multimode_total_pmf(s);
          },
          py::arg("state"), py::arg("n_max") = py::none(),
          "Total photon number of a K-mode twin beam; automatic cutoff when n_max is None.");

    m.def("povm_click_diagonal",
          [](int bins, double efficiency, double dark_prob, int k, int n_max) {
              return to_array(povm_click_diagonal({bins, efficiency, dark_prob}, k, n_max).weights);
          },
          py::arg("bins"), py::arg("efficiency"), py::arg("dark_prob"), py::arg("k"), py::arg("n_max"));
    m.def("reduced_O1_diagonal",
          [](double efficiency, int n_max) { return to_array(reduced_O1_diagonal(efficiency, n_max).weights); },
          py::arg("efficiency"), py::arg("n_max"));

    py::class_<ExperimentModel>(m, "ExperimentModel")
        .def(py::init([](double mean_total, int modes, double eta_idler, double eta_signal, double signal_split,
                         double dark_prob, int n_max) {
                 ExperimentModel e;
                 e.source = TwinBeamState(mean_total, modes);
                 e.eta_idler = eta_idler;
                 e.eta_signal = eta_signal;
                 e.signal_split = signal_split;
                 e.dark_prob = dark_prob;
                 e.n_max = n_max;
                 e.validate();
                 return e;
             }),
             py::arg("mean_total"), py::arg("modes") = 1, py::arg("eta_idler") = 0.321,
             py::arg("eta_signal") = 0.378, py::arg("signal_split") = 0.5, py::arg("dark_prob") = 0.0,
             py::arg("n_max") = 0)
        .def_readwrite("source", &ExperimentModel::source)
        .def_readwrite("eta_idler", &ExperimentModel::eta_idler)
        .def_readwrite("eta_signal", &ExperimentModel::eta_signal)
        .def_readwrite("signal_split", &ExperimentModel::signal_split)
        .def_readwrite("dark_prob", &ExperimentModel::dark_prob)
        .def_readwrite("n_max", &ExperimentModel::n_max)
        .def("with_mean", &ExperimentModel::with_mean, py::arg("mean_total"))
        .def("with_idler_split", &ExperimentModel::with_idler_split);

    py::class_<PulseProbabilities>(m, "PulseProbabilities")
        .def_readonly("p_i", &PulseProbabilities::p_i)
        .def_readonly("p_s1", &PulseProbabilities::p_s1)
        .def_readonly("p_s2", &PulseProbabilities::p_s2)
        .def_readonly("p_s", &PulseProbabilities::p_s)
        .def_readonly("p_is1", &PulseProbabilities::p_is1)
        .def_readonly("p_is2", &PulseProbabilities::p_is2)
        .def_readonly("p_s1s2", &PulseProbabilities::p_s1s2)
        .def_readonly("p_is1s2", &PulseProbabilities::p_is1s2)
        .def_readonly("p_coinc", &PulseProbabilities::p_coinc);

    m.def("pulse_probabilities", &pulse_probabilities, py::arg("model"));
    m.def("car_theory", &car_theory, py::arg("model"));
    m.def("g2h_theory", &g2h_theory, py::arg("model"));
    m.def("g2_unconditional_theory", &g2_unconditional_theory, py::arg("model"));
    m.def("heralded_mean_and_parity_theory",
          [](const ExperimentModel &model) {
              const auto r = heralded_mean_and_parity_theory(model);
              return py::make_tuple(r.mean_n, r.parity);
          },
          py::arg("model"), "(mean photon number, parity) of the heralded signal state");
    m.def("solve_mean_for_car", &solve_mean_for_car, py::arg("model"), py::arg("target_car"));

    py::class_<CountRecord>(m, "CountRecord")
        .def(py::init<>())
        .def_readwrite("pulses", &CountRecord::pulses)
        .def_readwrite("s_i", &CountRecord::s_i)
        .def_readwrite("s_s1", &CountRecord::s_s1)
        .def_readwrite("s_s2", &CountRecord::s_s2)
        .def_readwrite("c_is", &CountRecord::c_is)
        .def_readwrite("c_is1", &CountRecord::c_is1)
        .def_readwrite("c_is2", &CountRecord::c_is2)
        .def_readwrite("c_s1s2", &CountRecord::c_s1s2)
        .def_readwrite("c_is1s2", &CountRecord::c_is1s2)
        .def_property_readonly("s_s", &CountRecord::s_s)
        .def("patterns", &CountRecord::patterns)
        .def_static("from_patterns", &CountRecord::from_patterns, py::arg("patterns"))
        .def("__eq__", [](const CountRecord &a, const CountRecord &b) { return a == b; })
        .def("__repr__", [](const CountRecord &r) {
            std::ostringstream s;
            write_count_record(s, r);
            return s.str();
        });

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init([](const ExperimentModel &model, std::uint64_t pulses, std::uint64_t seed, double rep_rate,
                         double gate_window, unsigned workers) {
                 SimConfig c;
                 c.model = model;
                 c.pulses = pulses;
                 c.seed = seed;
                 c.rep_rate = rep_rate;
                 c.gate_window = gate_window;
                 c.workers = workers;
                 return c;
             }),
             py::arg("model"), py::arg("pulses") = 10'000'000, py::arg("seed") = 0, py::arg("rep_rate") = 41e6,
             py::arg("gate_window") = 0.5e-9, py::arg("workers") = 0)
        .def_readwrite("model", &SimConfig::model)
        .def_readwrite("pulses", &SimConfig::pulses)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("rep_rate", &SimConfig::rep_rate)
        .def_readwrite("gate_window", &SimConfig::gate_window)
        .def_readwrite("workers", &SimConfig::workers)
        .def_property_readonly("rep_period_ps", &SimConfig::rep_period_ps)
        .def_property_readonly("gate_window_ps", &SimConfig::gate_window_ps);

    m.def("run_simulation", &run_simulation, py::arg("config"), py::call_guard<py::gil_scoped_release>());
    m.def("simulate_tags",
          [](SimConfig config) {
              config.emit_tags = true;
              std::vector<TagTuple> tags;
              emit_tag_stream(config, [&](const TimeTag &t) { tags.emplace_back(t.channel, t.timestamp_ps); });
              return tags;
          },
          py::arg("config"), "Synthetic (channel, timestamp_ps) stream of the same pulses as run_simulation.");

    m.def("parse_tags",
          [](const std::string &text) {
              std::istringstream in(text);
              std::vector<TagTuple> out;
              for (const auto &t : parse_tags(in).tags)
                  out.emplace_back(t.channel, t.timestamp_ps);
              return out;
          },
          py::arg("text"), "Parses `channel,timestamp_ps` lines.");
    m.def("gate_and_count",
          [](const std::vector<TagTuple> &tags, std::uint64_t rep_period_ps, std::uint64_t gate_window_ps,
             bool fixed_clock) {
              GateConfig g;
              g.rep_period_ps = rep_period_ps;
              g.gate_window_ps = gate_window_ps;
              g.trigger_mode = fixed_clock ? TriggerMode::fixed_clock : TriggerMode::explicit_trigger;
              return gate_and_count(to_tags(tags), g);
          },
          py::arg("tags"), py::arg("rep_period_ps") = 24390, py::arg("gate_window_ps") = 500,
          py::arg("fixed_clock") = false);

    py::class_<FigureOfMerit>(m, "FigureOfMerit")
        .def(py::init([](double value, double std_err) { return FigureOfMerit{value, std_err, Method::car}; }),
             py::arg("value"), py::arg("std_err") = 0.0)
        .def_readonly("value", &FigureOfMerit::value)
        .def_readonly("std_err", &FigureOfMerit::std_err)
        .def_property_readonly("method", [](const FigureOfMerit &f) { return std::string(to_string(f.method)); })
        .def("__repr__", [](const FigureOfMerit &f) {
            return std::string(to_string(f.method)) + ": " + std::to_string(f.value) + " +- " +
                   std::to_string(f.std_err);
        });

    m.def("car", &car, py::arg("record"));
    m.def("klyshko", &klyshko, py::arg("record"), py::arg("corrected") = false,
          "(signal, idler) Klyshko efficiencies");
    m.def("g2_unconditional", [](const CountRecord &r) { return g2_unconditional(r); }, py::arg("record"));
    m.def("g2_heralded", &g2_heralded, py::arg("record"));
    m.def("schmidt_k", &schmidt_k, py::arg("g2"));
    m.def("mean_photon_first", &mean_photon_first, py::arg("car"));
    m.def("mean_photon_second", &mean_photon_second, py::arg("g2h"), py::arg("mu_s"), py::arg("mu_sc"));
    m.def("parity", &parity, py::arg("mean_n"), py::arg("g2h"));
    m.def("estimate_all", [](const CountRecord &r) { return figures_dict(estimate_all(r)); }, py::arg("record"),
          "{tag: (value, std_err) or None}");
    m.def("estimate_from_probabilities",
          [](const PulseProbabilities &p) {
              const auto f = estimate_from_probabilities(p);
              py::dict d;
              d["car"] = opt(f.car);
              d["g2_unconditional"] = opt(f.g2_unconditional);
              d["g2h"] = opt(f.g2h);
              d["mu_s"] = opt(f.mu_s);
              d["mu_i"] = opt(f.mu_i);
              d["mu_sc"] = opt(f.mu_sc);
              d["mu_ic"] = opt(f.mu_ic);
              d["mean_n_first"] = opt(f.mean_n_first);
              d["mean_n_second"] = opt(f.mean_n_second);
              d["parity_first"] = opt(f.parity_first);
              d["parity_second"] = opt(f.parity_second);
              return d;
          },
          py::arg("probabilities"));
}
