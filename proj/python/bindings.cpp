#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/eigen.h>

#include "equitest/mathcore.hpp"
#include "equitest/model.hpp"
#include "equitest/report.hpp"
#include "equitest/sim.hpp"
#include "equitest/testing.hpp"
#include "equitest/verify.hpp"

namespace py = pybind11;
using namespace equitest;

namespace {

CutoffMode mode_from(const std::string& text) { return parse_cutoff_mode(text); }

TestKind kind_from(const std::string& text) {
  if (text == "fixed" || text == "fixed-cutoff") return TestKind::FixedCutoff;
  if (text == "np" || text == "np-exact") return TestKind::NpExact;
  throw DomainError("kind must be 'fixed-cutoff' or 'np-exact'");
}

}  // namespace

PYBIND11_MODULE(_equitest, m) {
  m.doc() = "Fixed-cutoff conditional tests for equicorrelated multiple testing";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<AggregationError>(m, "AggregationError", PyExc_RuntimeError);

  m.def("normal_pdf", &normal_pdf, py::arg("x"));
  m.def("normal_cdf", &normal_cdf, py::arg("x"));
  m.def("normal_quantile", &normal_quantile, py::arg("gamma"),
        "Upper quantile z with normal_cdf(z) = 1 - gamma.");
  m.def(
      "trimmed_mean",
      [](const std::vector<double>& xs, double beta) { return trimmed_mean(xs, TrimOrder(beta)); },
      py::arg("xs"), py::arg("beta"));
  m.def(
      "solve_size_t",
      [](double alpha, double mu0, double phi0) { return solve_size_t(Probability(alpha), mu0, phi0); },
      py::arg("alpha"), py::arg("mu0"), py::arg("phi0"));

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init([](int n, double p, double sigma_eps, double sigma0, double tau, double rho1,
                       double rho2) {
             return ModelParams{n, p, sigma_eps, sigma0, tau, rho1, rho2};
           }),
           py::arg("n") = 500, py::arg("p") = 0.1, py::arg("sigma_eps") = 1.0, py::arg("sigma0") = 1.0,
           py::arg("tau") = 1.0, py::arg("rho1") = 0.0, py::arg("rho2") = 0.0)
      .def_readwrite("n", &ModelParams::n)
      .def_readwrite("p", &ModelParams::p)
      .def_readwrite("sigma_eps", &ModelParams::sigma_eps)
      .def_readwrite("sigma0", &ModelParams::sigma0)
      .def_readwrite("tau", &ModelParams::tau)
      .def_readwrite("rho1", &ModelParams::rho1)
      .def_readwrite("rho2", &ModelParams::rho2)
      .def_property_readonly("phi0", &ModelParams::null_variance);

  py::class_<ConditionalParams>(m, "ConditionalParams")
      .def_readonly("mu0", &ConditionalParams::mu0)
      .def_readonly("phi0", &ConditionalParams::phi0)
      .def_readonly("mu_alt", &ConditionalParams::mu_alt)
      .def_readonly("phi_alt", &ConditionalParams::phi_alt);

  py::class_<FixedCutoffTest>(m, "FixedCutoffTest")
      .def_readonly("k_cutoff", &FixedCutoffTest::k_cutoff)
      .def_readonly("t", &FixedCutoffTest::t)
      .def_readonly("center", &FixedCutoffTest::center)
      .def_property_readonly("alpha", [](const FixedCutoffTest& t) { return t.alpha.value(); });

  py::class_<NPRegion>(m, "NPRegion")
      .def_readonly("k1", &NPRegion::k1)
      .def_readonly("k2", &NPRegion::k2)
      .def_readonly("lr_constant", &NPRegion::lr_constant)
      .def_readonly("tau", &NPRegion::tau);

  py::class_<PowerReport>(m, "PowerReport")
      .def_readonly("power", &PowerReport::power)
      .def_readonly("type2", &PowerReport::type2);

  m.def("validate", [](const ModelParams& p) { return validate(p); }, py::arg("params"));
  m.def("conditional_params", &conditional_params, py::arg("params"), py::arg("q1"), py::arg("q2"));
  m.def("covariance_given_eta", &covariance_given_eta, py::arg("params"), py::arg("eta"));
  m.def(
      "sample_dataset",
      [](const ModelParams& params, std::uint64_t seed, std::uint64_t stream) {
        RandomStream s(seed, stream);
        Indicators eta = sample_eta(params, s);
        const DatasetDraw d = assemble_observations(params, sample_latent(params, std::move(eta), s));
        return py::make_tuple(d.x, std::vector<int>(d.truth.begin(), d.truth.end()));
      },
      py::arg("params"), py::arg("seed"), py::arg("stream") = 0,
      "Returns (x, truth) for one replication stream.");

  m.def(
      "fixed_cutoff",
      [](double alpha, const ConditionalParams& c) { return fixed_cutoff(Probability(alpha), c); },
      py::arg("alpha"), py::arg("cond"));
  m.def(
      "apply_cutoff",
      [](const std::vector<double>& x, double center, double k) {
        const Indicators f = apply_cutoff(x, center, k);
        return std::vector<int>(f.begin(), f.end());
      },
      py::arg("x"), py::arg("center"), py::arg("k_abs"));
  m.def(
      "fixed_test_power",
      [](const ModelParams& p, double q1, double q2, double alpha) {
        return fixed_test_power(p, q1, q2, Probability(alpha));
      },
      py::arg("params"), py::arg("q1"), py::arg("q2"), py::arg("alpha"));
  m.def(
      "np_asymptotic_thresholds",
      [](double alpha, const ConditionalParams& c) { return np_asymptotic_thresholds(Probability(alpha), c); },
      py::arg("alpha"), py::arg("cond"));
  m.def(
      "np_exact_region",
      [](double alpha, const ModelParams& p, double q1, double q2) {
        return np_exact_region(Probability(alpha), p, q1, q2);
      },
      py::arg("alpha"), py::arg("params"), py::arg("q1"), py::arg("q2"));
  m.def("np_power", &np_power, py::arg("region"), py::arg("params"), py::arg("q1"), py::arg("q2"));
  m.def(
      "expected_type2_closed",
      [](double tau, double alpha, double phi0) { return expected_type2_closed(tau, Probability(alpha), phi0); },
      py::arg("tau"), py::arg("alpha"), py::arg("phi0"));
  m.def(
      "expected_type2_quadrature",
      [](const ModelParams& p, double alpha, const std::string& kind, int nodes) {
        return expected_type2_quadrature(p, Probability(alpha), kind_from(kind), nodes);
      },
      py::arg("params"), py::arg("alpha"), py::arg("kind") = "fixed-cutoff", py::arg("nodes") = 64);

  py::class_<TableRow>(m, "TableRow")
      .def_readonly("tau", &TableRow::tau)
      .def_readonly("pfp_mean", &TableRow::pfp_mean)
      .def_readonly("pfp_se", &TableRow::pfp_se)
      .def_readonly("pfn_mean", &TableRow::pfn_mean)
      .def_readonly("pfn_se", &TableRow::pfn_se)
      .def_readonly("e_type2", &TableRow::e_type2)
      .def_readonly("used_reps", &TableRow::used_reps)
      .def_readonly("excluded_reps", &TableRow::excluded_reps);

  m.def(
      "run_table",
      [](const ModelParams& base, const std::vector<double>& taus, int reps, double alpha, double beta,
         const std::string& mode, std::uint64_t seed, int workers) {
        std::vector<SimConfig> configs;
        for (double tau : taus) {
          SimConfig c;
          c.params = base;
          c.params.tau = tau;
          c.reps = reps;
          c.alpha = Probability(alpha);
          c.beta = TrimOrder(beta);
          c.cutoff_mode = mode_from(mode);
          c.master_seed = seed;
          c.workers = workers;
          configs.push_back(validate(c));
        }
        py::gil_scoped_release release;
        return run_grid(configs);
      },
      py::arg("params"), py::arg("taus"), py::arg("reps") = 500, py::arg("alpha") = 0.05,
      py::arg("beta") = 0.05, py::arg("mode") = "empirical", py::arg("seed") = 2024,
      py::arg("workers") = 1);

  m.def(
      "table_csv",
      [](const std::vector<TableRow>& rows) { return render_table_csv(rows, RunManifest{"python", {}, 0}); },
      py::arg("rows"));

  m.def(
      "verify",
      [](bool quick, std::uint64_t seed) {
        VerifyOptions o;
        o.quick = quick;
        o.seed = seed;
        std::vector<py::tuple> out;
        for (const auto& r : run_verification(o)) out.push_back(py::make_tuple(r.name, r.passed, r.detail));
        return out;
      },
      py::arg("quick") = true, py::arg("seed") = 2024);

  m.attr("__version__") = code_version();
}
