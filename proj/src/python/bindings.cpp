#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fgbp/bp.hpp"
#include "fgbp/constructions.hpp"
#include "fgbp/decomposed_mp.hpp"
#include "fgbp/exact.hpp"
#include "fgbp/graph.hpp"
#include "fgbp/ldpc.hpp"
#include "fgbp/lowrank.hpp"
#include "fgbp/synthetic.hpp"
#include "fgbp/train.hpp"

namespace py = pybind11;

namespace {

fgbp::BpConfig make_config(const std::string& mode, int max_iterations,
                           double convergence_tol, double damping) {
  fgbp::BpConfig cfg;
  if (mode == "sum") {
    cfg.mode = fgbp::BpMode::kSumProduct;
  } else if (mode == "max") {
    cfg.mode = fgbp::BpMode::kMaxSum;
  } else {
    throw std::invalid_argument("mode must be 'sum' or 'max'");
  }
  cfg.max_iterations = max_iterations;
  cfg.convergence_tol = convergence_tol;
  cfg.damping = damping;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Discrete factor-graph inference engine";

  py::class_<fgbp::FactorGraph>(m, "FactorGraph")
      .def_property_readonly("num_variables", &fgbp::FactorGraph::num_variables)
      .def_property_readonly("num_factors", &fgbp::FactorGraph::num_factors)
      .def("to_json", [](const fgbp::FactorGraph& g) {
        return fgbp::graph_to_json(g);
      });

  m.def("graph_from_json", &fgbp::graph_from_json, py::arg("text"));

  m.def(
      "run_bp",
      [](const fgbp::FactorGraph& g, const std::string& mode,
         int max_iterations, double convergence_tol, double damping) {
        const auto r =
            fgbp::run_bp(g, make_config(mode, max_iterations, convergence_tol,
                                        damping));
        py::dict out;
        out["beliefs"] = r.beliefs;
        out["map"] = fgbp::decode_map_from_beliefs(r.beliefs);
        out["converged"] = r.converged;
        out["iterations"] = r.iterations;
        return out;
      },
      py::arg("graph"), py::arg("mode") = "sum",
      py::arg("max_iterations") = 100, py::arg("convergence_tol") = 1e-9,
      py::arg("damping") = 0.0);

  m.def("exact_marginals",
        [](const fgbp::FactorGraph& g) { return fgbp::exact_marginals(g); },
        py::arg("graph"));
  m.def(
      "exact_map",
      [](const fgbp::FactorGraph& g) {
        const auto r = fgbp::exact_map(g);
        py::dict out;
        out["assignment"] = r.assignment;
        out["log_score"] = r.log_score;
        return out;
      },
      py::arg("graph"));
  m.def("log_partition_function",
        [](const fgbp::FactorGraph& g) { return fgbp::log_partition_function(g); },
        py::arg("graph"));

  m.def(
      "gen_synthetic_instance",
      [](const std::string& kind, int n, int window, int budget,
         std::uint64_t seed) {
        fgbp::SyntheticSpec spec;
        spec.kind = fgbp::kind_from_name(kind);
        spec.n = n;
        spec.window = window;
        spec.budget = budget;
        spec.seed = seed;
        auto inst = fgbp::gen_synthetic_instance(spec);
        return py::make_tuple(std::move(inst.graph), inst.labels);
      },
      py::arg("kind") = "D1", py::arg("n") = 14, py::arg("window") = 8,
      py::arg("budget") = 5, py::arg("seed") = 0);

  m.def(
      "gen_tree_instance",
      [](int min_depth, int max_depth, std::uint64_t seed) {
        auto inst = fgbp::gen_tree_instance(min_depth, max_depth, seed);
        return py::make_tuple(std::move(inst.graph), inst.labels);
      },
      py::arg("min_depth") = 3, py::arg("max_depth") = 6, py::arg("seed") = 0);

  m.def(
      "run_construction_certifiers",
      [](std::uint64_t seed) {
        py::list out;
        for (const auto& r : fgbp::run_construction_certifiers(seed)) {
          py::dict entry;
          entry["name"] = r.name;
          entry["pass"] = r.pass;
          entry["max_err"] = r.max_err;
          out.append(std::move(entry));
        }
        return out;
      },
      py::arg("seed") = 0);

  m.def(
      "ldpc_ber_sweep",
      [](const std::vector<std::string>& decoders,
         const std::vector<int>& snr_grid,
         const std::vector<double>& sigma_b_grid, int trials,
         std::uint64_t seed) {
        const auto code = fgbp::ldpc_make_code(96, 3, 6, seed);
        return fgbp::ber_rows_to_csv(fgbp::ldpc_decode_eval(
            code, decoders, snr_grid, sigma_b_grid, trials, seed));
      },
      py::arg("decoders"), py::arg("snr_grid"), py::arg("sigma_b_grid"),
      py::arg("trials") = 10, py::arg("seed") = 0);
}
