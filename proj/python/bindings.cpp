#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hawkesmm/config.hpp"
#include "hawkesmm/hawkes.hpp"
#include "hawkesmm/hjb.hpp"
#include "hawkesmm/kernels.hpp"
#include "hawkesmm/pipeline.hpp"

namespace py = pybind11;
using namespace hawkesmm;

namespace {

void run_stage(const std::string& stage, const std::filesystem::path& config, const std::filesystem::path& out,
               unsigned threads) {
    const auto cfg = ExperimentConfig::load(config);
    const pipeline::RunContext ctx{out, threads};
    std::filesystem::create_directories(out);
    py::gil_scoped_release release;
    if (stage == "kernel-approx") {
        pipeline::kernel_approx(cfg, ctx);
    } else if (stage == "solve") {
        pipeline::solve(cfg, ctx);
    } else if (stage == "simulate") {
        pipeline::simulate(cfg, ctx);
    } else if (stage == "compare") {
        pipeline::compare(cfg, ctx);
    } else if (stage == "branching") {
        pipeline::branching_run(cfg, ctx);
    } else {
        throw std::invalid_argument("unknown stage '" + stage + "'");
    }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hawkes market-making core: kernels, HJB solver, simulation and pipeline stages.";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<ExpSumKernel>(m, "ExpSumKernel")
        .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("weights"), py::arg("rates"))
        .def_property_readonly("weights", &ExpSumKernel::weights)
        .def_property_readonly("rates", &ExpSumKernel::rates)
        .def("__call__", &ExpSumKernel::eval, py::arg("t"))
        .def("at_zero", &ExpSumKernel::at_zero)
        .def("l1_norm", &ExpSumKernel::l1_norm)
        .def("__len__", &ExpSumKernel::size);

    py::class_<PowerLawKernel>(m, "PowerLawKernel")
        .def(py::init<double, double, double, double>(), py::arg("lam"), py::arg("alpha"), py::arg("beta"),
             py::arg("eps"))
        .def("__call__", &PowerLawKernel::eval, py::arg("t"))
        .def("at_zero", &PowerLawKernel::at_zero)
        .def("l1_norm", &PowerLawKernel::l1_norm);

    m.def(
        "approximate_power_law",
        [](const PowerLawKernel& k, std::size_t n) { return approximate_power_law(k, n).kernel; }, py::arg("kernel"),
        py::arg("n"), "Exponential-sum approximation with matched K(0) and L1 norm.");

    m.def(
        "hamiltonian_max",
        [](double increment, double phi, double k_over_sigma) {
            const auto h = hjb::hamiltonian_max(increment, phi, k_over_sigma);
            return py::make_tuple(h.spread, h.value);
        },
        py::arg("increment"), py::arg("phi"), py::arg("k_over_sigma"), "(spread, value) of the maximised Hamiltonian.");

    py::class_<MarketState>(m, "MarketState")
        .def(py::init([](int inventory, std::vector<double> c_ask, std::vector<double> c_bid) {
                 return MarketState{inventory, std::move(c_ask), std::move(c_bid), 0.0};
             }),
             py::arg("inventory"), py::arg("c_ask"), py::arg("c_bid"))
        .def_readwrite("inventory", &MarketState::inventory)
        .def_readwrite("c_ask", &MarketState::c_ask)
        .def_readwrite("c_bid", &MarketState::c_bid);

    py::class_<hjb::GridSpec>(m, "GridSpec")
        .def(py::init<>())
        .def_readwrite("i_min", &hjb::GridSpec::i_min)
        .def_readwrite("i_max", &hjb::GridSpec::i_max)
        .def_readwrite("c_max", &hjb::GridSpec::c_max)
        .def_readwrite("m_c", &hjb::GridSpec::m_c)
        .def_readwrite("dt", &hjb::GridSpec::dt)
        .def_readwrite("T", &hjb::GridSpec::T)
        .def_readwrite("r", &hjb::GridSpec::r)
        .def_readwrite("mu_penalty", &hjb::GridSpec::mu_penalty)
        .def_readwrite("k_over_sigma", &hjb::GridSpec::k_over_sigma)
        .def_readwrite("mu_base", &hjb::GridSpec::mu_base)
        .def_readwrite("kernel", &hjb::GridSpec::kernel)
        .def_readwrite("snapshot_stride", &hjb::GridSpec::snapshot_stride);

    py::class_<hjb::Solution>(m, "Solution")
        .def("value", [](const hjb::Solution& s, double t, const MarketState& x) { return s.values.value_at(t, x); },
             py::arg("t"), py::arg("state"))
        .def(
            "spreads",
            [](const hjb::Solution& s, double t, const MarketState& x) {
                const auto q = s.feedback.at(t, x);
                return py::make_tuple(q.ask, q.bid);
            },
            py::arg("t"), py::arg("state"))
        .def_property_readonly("steps", [](const hjb::Solution& s) { return s.values.grid().steps(); });

    m.def(
        "solve",
        [](const hjb::GridSpec& g, unsigned threads) {
            py::gil_scoped_release release;
            return hjb::solve(g, {threads});
        },
        py::arg("grid"), py::arg("threads") = 0);

    m.def(
        "simulate_constant",
        [](double mu, const ExpSumKernel& kernel, double k_over_sigma, double ask, double bid, double T,
           std::uint64_t seed, const MarketState& initial) {
            const IntensitySpec spec{mu, kernel, k_over_sigma, {}};
            ConstantQuoter q(ask, bid);
            const auto res = simulate(spec, q, T, seed, initial);
            py::list events;
            for (const auto& e : res.log.events) events.append(py::make_tuple(e.time, to_string(e.side), e.spread));
            return events;
        },
        py::arg("mu"), py::arg("kernel"), py::arg("k_over_sigma"), py::arg("ask"), py::arg("bid"), py::arg("T"),
        py::arg("seed"), py::arg("initial"), "Event list (time, side, spread) under constant spreads.");

    m.def("run_stage", &run_stage, py::arg("stage"), py::arg("config"), py::arg("out"), py::arg("threads") = 0,
          "Run one pipeline stage and write its files into `out`.");
}
