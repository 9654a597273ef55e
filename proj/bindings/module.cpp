#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

#include "spnl/analytic.hpp"
#include "spnl/experiment.hpp"
#include "spnl/fock.hpp"
#include "spnl/schemes.hpp"
#include "spnl/version.hpp"

namespace py = pybind11;
using namespace spnl;

namespace {

fock::OutcomePattern pattern_from_dict(const py::dict& d) {
    fock::OutcomePattern p;
    for (auto item : d)
        p.occupations.emplace_back(fock::ModeId{item.first.cast<int>()},
                                   item.second.cast<int>());
    return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Fock-basis linear-optics simulator and Monte Carlo CHSH harness";
    m.attr("__version__") = SPNL_VERSION;

    // ---- fock ----
    py::class_<fock::BeamSplitterParams>(m, "BeamSplitterParams")
        .def(py::init([](double theta, bool conjugated) {
                 return fock::BeamSplitterParams{theta, conjugated};
             }),
             py::arg("theta"), py::arg("conjugated") = false)
        .def_readonly("theta", &fock::BeamSplitterParams::theta)
        .def_readonly("conjugated", &fock::BeamSplitterParams::conjugated)
        .def_static("fifty_fifty", &fock::BeamSplitterParams::fifty_fifty)
        .def_static("from_reflectivity", &fock::BeamSplitterParams::from_reflectivity)
        .def_static("from_transmittivity", &fock::BeamSplitterParams::from_transmittivity)
        .def("inverse", &fock::BeamSplitterParams::inverse)
        .def_property_readonly("reflectivity", &fock::BeamSplitterParams::reflectivity)
        .def_property_readonly("transmittivity", &fock::BeamSplitterParams::transmittivity);

    py::class_<fock::StateVector>(m, "StateVector")
        .def(py::init([](const std::vector<int>& modes, int cutoff) {
                 std::vector<fock::ModeId> ids;
                 for (int v : modes) ids.push_back({v});
                 return fock::StateVector(std::move(ids), cutoff);
             }),
             py::arg("modes"), py::arg("cutoff"))
        .def_property_readonly("modes",
                               [](const fock::StateVector& s) {
                                   std::vector<int> out;
                                   for (auto m : s.modes()) out.push_back(m.value);
                                   return out;
                               })
        .def_property_readonly("cutoff", &fock::StateVector::cutoff)
        .def("__len__", &fock::StateVector::size)
        .def("norm", &fock::StateVector::norm)
        .def("normalized", &fock::StateVector::normalized)
        .def("amplitude", &fock::StateVector::amplitude, py::arg("ket"))
        .def("add_term", &fock::StateVector::add_term, py::arg("ket"), py::arg("amplitude"))
        .def("terms", [](const fock::StateVector& s) {
            py::dict out;
            for (const auto& [ket, amp] : s.sorted_terms())
                out[py::tuple(py::cast(ket))] = amp;
            return out;
        });

    m.def(
        "make_vacuum",
        [](const std::vector<int>& modes, int cutoff) {
            std::vector<fock::ModeId> ids;
            for (int v : modes) ids.push_back({v});
            return fock::make_vacuum(ids, cutoff);
        },
        py::arg("modes"), py::arg("cutoff"));
    m.def(
        "make_fock", [](int mode, int n, int cutoff) { return fock::make_fock({mode}, n, cutoff); },
        py::arg("mode"), py::arg("n"), py::arg("cutoff"));
    m.def(
        "make_coherent",
        [](int mode, std::complex<double> alpha, int cutoff, double tail_tolerance) {
            return fock::make_coherent({mode}, alpha, cutoff, tail_tolerance);
        },
        py::arg("mode"), py::arg("alpha"), py::arg("cutoff"), py::arg("tail_tolerance") = 1e-10);
    m.def("tensor", &fock::tensor, py::arg("a"), py::arg("b"));
    m.def(
        "apply_beam_splitter",
        [](const fock::StateVector& s, int m1, int m2, const fock::BeamSplitterParams& p) {
            return fock::apply_beam_splitter(s, {m1}, {m2}, p);
        },
        py::arg("state"), py::arg("mode1"), py::arg("mode2"), py::arg("params"));
    m.def(
        "apply_phase",
        [](const fock::StateVector& s, int mode, double phi) {
            return fock::apply_phase(s, {mode}, phi);
        },
        py::arg("state"), py::arg("mode"), py::arg("phi"));
    m.def(
        "outcome_probability",
        [](const fock::StateVector& s, const py::dict& pattern) {
            return fock::outcome_probability(s, pattern_from_dict(pattern));
        },
        py::arg("state"), py::arg("pattern"));
    m.def(
        "postselect",
        [](const fock::StateVector& s, const std::vector<int>& subset,
           const std::function<bool(const std::vector<int>&)>& predicate) {
            std::vector<fock::ModeId> ids;
            for (int v : subset) ids.push_back({v});
            auto result = fock::postselect(s, ids, [&](const fock::OutcomePattern& p) {
                std::vector<int> occ;
                for (const auto& [mode, n] : p.occupations) occ.push_back(n);
                return predicate(occ);
            });
            return py::make_tuple(result.probability,
                                  result.state ? py::cast(*result.state) : py::none());
        },
        py::arg("state"), py::arg("subset"), py::arg("predicate"));
    m.def(
        "sample_outcome",
        [](const fock::StateVector& s, std::uint64_t seed) {
            std::mt19937_64 rng(seed);
            return fock::sample_outcome(s, rng);
        },
        py::arg("state"), py::arg("seed"));
    m.def(
        "mean_occupation",
        [](const fock::StateVector& s, int mode) { return fock::mean_occupation(s, {mode}); },
        py::arg("state"), py::arg("mode"));

    // ---- analytic ----
    auto an = m.def_submodule("analytic", "Closed-form probabilities and CHSH values");
    an.def("scheme1_pattern_probs",
           [](double xi, double eta, double dphi) {
               return analytic::scheme1_pattern_probs(xi, eta, dphi).as_array();
           },
           py::arg("xi"), py::arg("eta"), py::arg("delta_phi"));
    an.def("scheme1_correlation", &analytic::scheme1_correlation, py::arg("xi"), py::arg("eta"),
           py::arg("delta_phi"));
    an.def("s_scheme1", &analytic::s_scheme1, py::arg("xi_minus_eta"), py::arg("delta_phi"));
    an.def("s_scheme1_phase_averaged", &analytic::s_scheme1_phase_averaged,
           py::arg("xi_minus_eta"));
    an.def("s_scheme2", &analytic::s_scheme2, py::arg("xi_minus_eta"));
    an.def("scheme3_remainder_intensities",
           [](double dphi, double mag) {
               const auto r = analytic::scheme3_remainder_intensities(dphi, mag);
               return py::make_tuple(r.n15, r.n16, r.ratio);
           },
           py::arg("delta_phi"), py::arg("alpha_mag"));
    an.def("delta_phi_cos_from_ratio", &analytic::delta_phi_cos_from_ratio, py::arg("ratio"));
    an.def("s_at_optimum_from_cos", &analytic::s_at_optimum_from_cos, py::arg("c"));
    an.def("violation_window", &analytic::violation_window);

    // ---- schemes ----
    py::class_<schemes::ReferenceSpec>(m, "ReferenceSpec")
        .def_static("coherent", &schemes::ReferenceSpec::coherent, py::arg("alpha"),
                    py::arg("cutoff") = 8)
        .def_static("phase_averaged", &schemes::ReferenceSpec::phase_averaged,
                    py::arg("alpha_mag"), py::arg("cutoff") = 8)
        .def_static("number", &schemes::ReferenceSpec::number, py::arg("n"))
        .def_static("number_mixture", &schemes::ReferenceSpec::number_mixture, py::arg("weights"))
        .def_property_readonly("mean_photon_number", &schemes::ReferenceSpec::mean_photon_number)
        .def_property_readonly("skim_transmittivity", &schemes::ReferenceSpec::skim_transmittivity);

    py::class_<schemes::CircuitResult>(m, "CircuitResult")
        .def_readonly("conditional", &schemes::CircuitResult::conditional)
        .def_readonly("acceptance", &schemes::CircuitResult::acceptance);

    m.def("run_scheme1_exact", &schemes::run_scheme1_exact, py::arg("xi"), py::arg("eta"),
          py::arg("phi_a"), py::arg("phi_b"), py::arg("cutoff") = 8);
    m.def("run_scheme2_exact", &schemes::run_scheme2_exact, py::arg("xi"), py::arg("eta"),
          py::arg("phi"), py::arg("cutoff") = 8);
    m.def(
        "run_scheme3_exact",
        [](double xi, double eta, const schemes::ReferenceSpec& a,
           const schemes::ReferenceSpec& b, int quadrature_points) {
            schemes::Scheme3Options opts;
            opts.quadrature_points = quadrature_points;
            return schemes::run_scheme3_exact(xi, eta, a, b, opts);
        },
        py::arg("xi"), py::arg("eta"), py::arg("ref_a"), py::arg("ref_b"),
        py::arg("quadrature_points") = 64);

    // ---- experiment ----
    py::enum_<experiment::ReadoutMode>(m, "ReadoutMode")
        .value("DETERMINISTIC", experiment::ReadoutMode::kDeterministic)
        .value("SAMPLED", experiment::ReadoutMode::kSampled);
    py::enum_<experiment::BinVariable>(m, "BinVariable")
        .value("C", experiment::BinVariable::kCos)
        .value("DELTA_PHI", experiment::BinVariable::kDeltaPhi);
    py::enum_<experiment::RatioConvention>(m, "RatioConvention")
        .value("DERIVED", experiment::RatioConvention::kDerived)
        .value("PAPER_FACTOR2", experiment::RatioConvention::kPaperFactor2);

    py::class_<experiment::ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init(&experiment::ExperimentConfig::defaults_for_scheme), py::arg("scheme"))
        .def_readwrite("scheme", &experiment::ExperimentConfig::scheme)
        .def_readwrite("xi", &experiment::ExperimentConfig::xi)
        .def_readwrite("eta", &experiment::ExperimentConfig::eta)
        .def_readwrite("alpha_mag", &experiment::ExperimentConfig::alpha_mag)
        .def_readwrite("ref_a", &experiment::ExperimentConfig::ref_a)
        .def_readwrite("ref_b", &experiment::ExperimentConfig::ref_b)
        .def_readwrite("shots", &experiment::ExperimentConfig::shots)
        .def_readwrite("bins", &experiment::ExperimentConfig::bins)
        .def_readwrite("seed", &experiment::ExperimentConfig::seed)
        .def_readwrite("readout", &experiment::ExperimentConfig::readout)
        .def_readwrite("ratio_convention", &experiment::ExperimentConfig::ratio_convention)
        .def_readwrite("bin_variable", &experiment::ExperimentConfig::bin_variable)
        .def_readwrite("cutoff", &experiment::ExperimentConfig::cutoff)
        .def_readwrite("threads", &experiment::ExperimentConfig::threads);

    py::class_<experiment::ShotRecord>(m, "ShotRecord")
        .def_readonly("index", &experiment::ShotRecord::index)
        .def_readonly("alice_primed", &experiment::ShotRecord::alice_primed)
        .def_readonly("bob_primed", &experiment::ShotRecord::bob_primed)
        .def_readonly("accepted", &experiment::ShotRecord::accepted)
        .def_readonly("alice_sign", &experiment::ShotRecord::alice_sign)
        .def_readonly("bob_sign", &experiment::ShotRecord::bob_sign)
        .def_readonly("n15", &experiment::ShotRecord::n15)
        .def_readonly("n16", &experiment::ShotRecord::n16)
        .def_readonly("c_est", &experiment::ShotRecord::c_est)
        .def_readonly("c_valid", &experiment::ShotRecord::c_valid);

    py::class_<experiment::PairStat>(m, "PairStat")
        .def_readonly("e", &experiment::PairStat::e)
        .def_readonly("se", &experiment::PairStat::se)
        .def_readonly("n", &experiment::PairStat::n);

    py::class_<experiment::BinnedEstimate>(m, "BinnedEstimate")
        .def_readonly("bin_center", &experiment::BinnedEstimate::bin_center)
        .def_readonly("c_center", &experiment::BinnedEstimate::c_center)
        .def_readonly("delta_phi", &experiment::BinnedEstimate::delta_phi)
        .def_readonly("mean_c", &experiment::BinnedEstimate::mean_c)
        .def_readonly("ab", &experiment::BinnedEstimate::ab)
        .def_readonly("apb", &experiment::BinnedEstimate::apb)
        .def_readonly("abp", &experiment::BinnedEstimate::abp)
        .def_readonly("apbp", &experiment::BinnedEstimate::apbp)
        .def_readonly("s", &experiment::BinnedEstimate::s)
        .def_readonly("s_err", &experiment::BinnedEstimate::s_err)
        .def_readonly("accepted", &experiment::BinnedEstimate::accepted)
        .def_readonly("valid", &experiment::BinnedEstimate::valid);

    py::class_<experiment::BinnedEstimates>(m, "BinnedEstimates")
        .def_readonly("bins", &experiment::BinnedEstimates::bins)
        .def_readonly("accepted", &experiment::BinnedEstimates::accepted)
        .def_readonly("unbinnable", &experiment::BinnedEstimates::unbinnable);

    m.def("run_chsh_experiment", &experiment::run_chsh_experiment, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def(
        "bin_and_estimate",
        [](const std::vector<experiment::ShotRecord>& records, int bins,
           experiment::BinVariable variable) {
            return experiment::bin_and_estimate(records, bins, variable);
        },
        py::arg("records"), py::arg("bins"), py::arg("variable") = experiment::BinVariable::kCos);
    m.def(
        "phase_average_estimate",
        [](const std::vector<experiment::ShotRecord>& records) {
            return experiment::phase_average_estimate(records);
        },
        py::arg("records"));
    m.def(
        "records_hash",
        [](const std::vector<experiment::ShotRecord>& records) {
            return experiment::records_hash(records);
        },
        py::arg("records"));
}
