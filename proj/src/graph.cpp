#include "fgbp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace fgbp {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error("factor graph json: " + path + ": " + what);
}

json encode_doubles(const std::vector<double>& v) {
  json arr = json::array();
  for (double x : v) {
    if (std::isfinite(x)) {
      arr.push_back(x);
    } else if (x < 0) {
      arr.push_back("-inf");
    } else {
      arr.push_back("inf");
    }
  }
  return arr;
}

std::vector<double> decode_doubles(const json& arr, const std::string& path) {
  if (!arr.is_array()) fail(path, "expected array of numbers");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& e : arr) {
    if (e.is_number()) {
      out.push_back(e.get<double>());
    } else if (e.is_string() && e.get<std::string>() == "-inf") {
      out.push_back(kNegInf);
    } else if (e.is_string() && e.get<std::string>() == "inf") {
      out.push_back(-kNegInf);
    } else {
      fail(path, "entry is not a number or \"[-]inf\"");
    }
  }
  return out;
}

std::vector<int> decode_ints(const json& arr, const std::string& path) {
  if (!arr.is_array()) fail(path, "expected array of integers");
  std::vector<int> out;
  for (const auto& e : arr) {
    if (!e.is_number_integer()) fail(path, "entry is not an integer");
    out.push_back(e.get<int>());
  }
  return out;
}

}  // namespace

FactorGraph::FactorGraph(std::vector<VariableNode> variables,
                         std::vector<FactorNode> factors)
    : variables_(std::move(variables)), factors_(std::move(factors)) {
  if (variables_.empty()) {
    throw std::invalid_argument("factor graph must have >= 1 variable");
  }
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i].id != static_cast<int>(i)) {
      throw std::invalid_argument("variable ids must be dense 0..|V|-1");
    }
    if (variables_[i].cardinality < 2) {
      throw std::invalid_argument("variable cardinality must be >= 2");
    }
  }
  var_adjacency_.assign(variables_.size(), {});
  for (std::size_t fi = 0; fi < factors_.size(); ++fi) {
    const auto& f = factors_[fi];
    const std::string tag = "factor " + std::to_string(f.id);
    if (f.id != static_cast<int>(fi)) {
      throw std::invalid_argument(tag + ": ids must be dense 0..|C|-1");
    }
    if (f.scope.empty()) throw std::invalid_argument(tag + ": empty scope");
    for (std::size_t j = 0; j < f.scope.size(); ++j) {
      if (f.scope[j] < 0 || f.scope[j] >= num_variables()) {
        throw std::invalid_argument(tag + ": scope variable out of range");
      }
      if (j > 0 && f.scope[j] <= f.scope[j - 1]) {
        throw std::invalid_argument(tag + ": scope not strictly ascending");
      }
    }
    const auto shape = variable_shape(f);
    if (const auto* dl = std::get_if<DenseLogPotential>(&f.potential)) {
      if (dl->log_values.shape() != shape) {
        throw std::invalid_argument(tag + ": dense table shape mismatch");
      }
    } else if (const auto* cp = std::get_if<CpPotential>(&f.potential)) {
      if (cp->values.dims() != shape) {
        throw std::invalid_argument(tag + ": CP dims mismatch");
      }
    } else if (const auto* md = std::get_if<MaxDecompPotential>(&f.potential)) {
      if (md->decomp.dims != shape) {
        throw std::invalid_argument(tag + ": max-decomp dims mismatch");
      }
    } else if (std::holds_alternative<BudgetPotential>(f.potential) ||
               std::holds_alternative<ParityPotential>(f.potential)) {
      for (int v : f.scope) {
        if (cardinality(v) != 2) {
          throw std::invalid_argument(tag +
                                      ": budget/parity requires binary scope");
        }
      }
      if (const auto* b = std::get_if<BudgetPotential>(&f.potential)) {
        if (b->k < 0) throw std::invalid_argument(tag + ": negative budget");
      }
    }
    for (int v : f.scope) var_adjacency_[v].push_back(static_cast<int>(fi));
  }
}

std::vector<int> FactorGraph::variable_shape(const FactorNode& f) const {
  std::vector<int> shape;
  shape.reserve(f.scope.size());
  for (int v : f.scope) shape.push_back(cardinality(v));
  return shape;
}

std::size_t FactorGraph::num_edges() const {
  std::size_t n = 0;
  for (const auto& f : factors_) n += f.scope.size();
  return n;
}

FactorGraph build_graph(std::vector<VariableNode> variables,
                        std::vector<FactorNode> factors) {
  return FactorGraph(std::move(variables), std::move(factors));
}

DenseTensor materialize_log_table(const FactorGraph& g, const FactorNode& f) {
  const auto shape = g.variable_shape(f);
  if (const auto* dl = std::get_if<DenseLogPotential>(&f.potential)) {
    return dl->log_values;
  }
  if (const auto* cp = std::get_if<CpPotential>(&f.potential)) {
    DenseTensor dense = densify(cp->values);
    for (std::size_t i = 0; i < dense.size(); ++i) {
      if (!(dense[i] > 0.0)) {
        throw std::domain_error("factor " + std::to_string(f.id) +
                                ": CP potential densifies to a non-positive "
                                "entry");
      }
      dense[i] = std::log(dense[i]);
    }
    return dense;
  }
  if (const auto* md = std::get_if<MaxDecompPotential>(&f.potential)) {
    DenseTensor table = reconstruct_max(md->decomp);
    for (std::size_t i = 0; i < table.size(); ++i) {
      table[i] -= md->decomp.shift;
    }
    return table;
  }
  DenseTensor table(shape);
  const bool budget = std::holds_alternative<BudgetPotential>(f.potential);
  const int k = budget ? std::get<BudgetPotential>(f.potential).k : 0;
  Assignment a(shape.size(), 0);
  std::size_t flat = 0;
  do {
    int ones = 0;
    for (int x : a) ones += x;
    const bool ok = budget ? (ones <= k) : (ones % 2 == 0);
    table[flat++] = ok ? 0.0 : kNegInf;
  } while (next_assignment(shape, a));
  return table;
}

std::string graph_to_json(const FactorGraph& g) {
  json doc;
  doc["variables"] = json::array();
  for (const auto& v : g.variables()) {
    doc["variables"].push_back({{"id", v.id}, {"cardinality", v.cardinality}});
  }
  doc["factors"] = json::array();
  for (const auto& f : g.factors()) {
    json pot;
    if (const auto* dl = std::get_if<DenseLogPotential>(&f.potential)) {
      pot["kind"] = "dense_log";
      pot["values"] = encode_doubles(dl->log_values.data());
    } else if (const auto* cp = std::get_if<CpPotential>(&f.potential)) {
      pot["kind"] = "cp";
      pot["rank"] = cp->values.rank();
      json mats = json::array();
      for (const auto& m : cp->values.matrices()) {
        mats.push_back(encode_doubles(m));
      }
      pot["matrices"] = mats;
    } else if (const auto* md = std::get_if<MaxDecompPotential>(&f.potential)) {
      pot["kind"] = "max_decomp";
      pot["z_count"] = md->decomp.z_count;
      pot["shift"] = md->decomp.shift;
      json tabs = json::array();
      for (const auto& t : md->decomp.tables) {
        tabs.push_back(encode_doubles(t.data()));
      }
      pot["tables"] = tabs;
    } else if (const auto* b = std::get_if<BudgetPotential>(&f.potential)) {
      pot["kind"] = "budget";
      pot["k"] = b->k;
    } else {
      pot["kind"] = "parity";
    }
    doc["factors"].push_back(
        {{"id", f.id}, {"scope", f.scope}, {"potential", pot}});
  }
  return doc.dump();
}

FactorGraph graph_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("factor graph json: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("variables") ||
      !doc.contains("factors")) {
    fail("$", "expected object with \"variables\" and \"factors\"");
  }

  std::vector<VariableNode> variables;
  for (std::size_t i = 0; i < doc["variables"].size(); ++i) {
    const auto& v = doc["variables"][i];
    const std::string path = "variables[" + std::to_string(i) + "]";
    if (!v.is_object() || !v.contains("id") || !v.contains("cardinality")) {
      fail(path, "expected {id, cardinality}");
    }
    variables.push_back({v["id"].get<int>(), v["cardinality"].get<int>()});
  }

  std::vector<FactorNode> factors;
  for (std::size_t i = 0; i < doc["factors"].size(); ++i) {
    const auto& fj = doc["factors"][i];
    const std::string path = "factors[" + std::to_string(i) + "]";
    if (!fj.is_object() || !fj.contains("id") || !fj.contains("scope") ||
        !fj.contains("potential")) {
      fail(path, "expected {id, scope, potential}");
    }
    FactorNode f;
    f.id = fj["id"].get<int>();
    f.scope = decode_ints(fj["scope"], path + ".scope");

    std::vector<int> shape;
    for (int vid : f.scope) {
      if (vid < 0 || vid >= static_cast<int>(variables.size())) {
        fail(path + ".scope", "variable id out of range");
      }
      shape.push_back(variables[vid].cardinality);
    }

    const auto& pj = fj["potential"];
    const std::string ppath = path + ".potential";
    if (!pj.is_object() || !pj.contains("kind")) fail(ppath, "missing kind");
    const std::string kind = pj["kind"].get<std::string>();
    if (kind == "dense_log") {
      f.potential = DenseLogPotential{
          DenseTensor(shape, decode_doubles(pj["values"], ppath + ".values"))};
    } else if (kind == "cp") {
      if (!pj.contains("rank") || !pj.contains("matrices")) {
        fail(ppath, "cp requires rank and matrices");
      }
      const int rank = pj["rank"].get<int>();
      std::vector<std::vector<double>> mats;
      for (std::size_t m = 0; m < pj["matrices"].size(); ++m) {
        mats.push_back(decode_doubles(
            pj["matrices"][m], ppath + ".matrices[" + std::to_string(m) + "]"));
      }
      f.potential = CpPotential{CPTensor(shape, rank, std::move(mats))};
    } else if (kind == "max_decomp") {
      MaxDecompFactor md;
      md.dims = shape;
      md.z_count = pj["z_count"].get<int>();
      md.shift = pj["shift"].get<double>();
      for (std::size_t m = 0; m < pj["tables"].size(); ++m) {
        md.tables.emplace_back(
            std::vector<int>{shape[m], md.z_count},
            decode_doubles(pj["tables"][m],
                           ppath + ".tables[" + std::to_string(m) + "]"));
      }
      f.potential = MaxDecompPotential{std::move(md)};
    } else if (kind == "budget") {
      if (!pj.contains("k")) fail(ppath, "budget requires k");
      f.potential = BudgetPotential{pj["k"].get<int>()};
    } else if (kind == "parity") {
      f.potential = ParityPotential{};
    } else {
      fail(ppath + ".kind", "unknown potential kind \"" + kind + "\"");
    }
    factors.push_back(std::move(f));
  }
  try {
    return FactorGraph(std::move(variables), std::move(factors));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("factor graph json: $: ") + e.what());
  }
}

}  // namespace fgbp
