#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "phientropy/concentration.hpp"
#include "phientropy/entropy.hpp"
#include "phientropy/errors.hpp"
#include "phientropy/io.hpp"
#include "phientropy/operator.hpp"
#include "phientropy/phi_class.hpp"

namespace py = pybind11;
using namespace phientropy;

namespace {

// Models cross the boundary as JSON text; the Python side does the dumps/loads.
ProductModel model_of(const std::string& text, bool psd) { return model_from_json(Json::parse(text), psd); }

py::dict entropy_dict(const EntropyReport& r) {
  py::dict out;
  out["phi"] = r.phi;
  out["h_phi"] = r.h_phi;
  out["per_coordinate_terms"] = r.per_coordinate_terms;
  out["conditional_sum"] = r.conditional_sum;
  out["rhs_exchangeability"] = r.rhs_exchangeability;
  out["subadditivity_gap"] = r.subadditivity_gap;
  out["exchangeability_gap"] = r.exchangeability_gap;
  out["scale"] = r.scale;
  out["shift"] = r.shift;
  return out;
}

std::string ensemble_json(const Ensemble& e) { return model_to_json(e.law()).dump(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "matrix phi-entropy kernels";
  py::register_exception<Error>(m, "PhiEntropyError", PyExc_ValueError);

  m.def("phi_value", [](const std::string& phi, double t) { return PhiFunction::parse(phi).phi(t); });
  m.def("psi_value", [](const std::string& phi, double t) { return PhiFunction::parse(phi).psi(t); });

  m.def("entropy_report", [](const std::string& phi, const std::string& model) {
    return entropy_dict(phi_entropy_exact(PhiFunction::parse(phi), model_of(model, true)));
  }, py::arg("phi"), py::arg("model_json"));
  m.def("subadditivity_gap", [](const std::string& phi, const std::string& model) {
    return subadditivity_gap(PhiFunction::parse(phi), model_of(model, true));
  }, py::arg("phi"), py::arg("model_json"));
  m.def("symmetrized_bound", [](const std::string& phi, const std::string& model) {
    return symmetrized_bound(PhiFunction::parse(phi), model_of(model, true)).value;
  }, py::arg("phi"), py::arg("model_json"));

  m.def("membership_check", [](const std::string& phi, int d, std::size_t trials, std::uint64_t seed) {
    const MembershipReport r = membership_concavity_check(PhiFunction::parse(phi), d, trials, seed);
    py::dict out;
    out["passed"] = r.passed;
    out["trials"] = r.trials;
    out["min_gap"] = r.min_gap;
    out["min_ratio"] = r.min_ratio;
    out["gaps"] = r.gaps;
    return out;
  }, py::arg("phi"), py::arg("d"), py::arg("trials"), py::arg("seed"));

  m.def("derivative_operator", [](const std::string& f, const CMatrix& a) {
    ScalarFunction g = f == "log" ? ScalarFunction::log() : f == "exp" ? ScalarFunction::exp()
                                                          : ScalarFunction::power(std::stod(f));
    return derivative_operator(g, HermitianMatrix(a)).rep();
  }, py::arg("f"), py::arg("a"), "f is 'log', 'exp' or a power exponent such as '0.5'");
  m.def("integral_inverse_derivative", [](const std::string& phi, const CMatrix& a, int nodes) {
    return integral_inverse_derivative(PhiFunction::parse(phi), HermitianMatrix(a), nodes).rep();
  }, py::arg("phi"), py::arg("a"), py::arg("nodes") = 64);

  m.def("variance_measure", [](const std::string& model) {
    return variance_measure(model_of(model, false)).v_scalar;
  }, py::arg("model_json"));
  m.def("tail_bound", &tail_bound_value, py::arg("d"), py::arg("v"), py::arg("t"));
  m.def("exact_tail", [](const std::string& model, const std::vector<double>& grid) {
    return exact_tail(model_of(model, false), grid);
  }, py::arg("model_json"), py::arg("t_grid"));
  m.def("herbst_slacks", [](const std::string& model, const std::vector<double>& grid) {
    const HerbstReport r = herbst_diagnostic(model_of(model, false), grid);
    return py::make_tuple(r.worst_diff_slack, r.worst_herbst_slack, r.scale);
  }, py::arg("model_json"), py::arg("theta_grid"));
  m.def("moment_bound", [](const std::string& model, int q) {
    const MomentReport r = moment_bound_check(model_of(model, true), q);
    py::dict out;
    out["q"] = r.q;
    out["lhs"] = r.lhs;
    out["rhs"] = r.rhs;
    out["c_star"] = r.c_star;
    out["passed"] = r.passed;
    return out;
  }, py::arg("model_json"), py::arg("q"));

  m.def("rademacher_diagonal", [](int d, int n, std::uint64_t seed) { return ensemble_json(rademacher_diagonal(d, n, seed)); });
  m.def("wigner_sign", [](int d) { return ensemble_json(wigner_sign(d)); });
}
