#include "fgbp/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fgbp {

namespace {

std::vector<int> full_shape(const FactorGraph& g) {
  std::vector<int> shape;
  shape.reserve(g.num_variables());
  for (const auto& v : g.variables()) shape.push_back(v.cardinality);
  return shape;
}

void check_cap(const std::vector<int>& shape, const ExactOptions& opts) {
  double total = 1.0;
  for (int d : shape) total *= d;
  if (total > static_cast<double>(opts.state_space_cap)) {
    throw std::runtime_error("exact inference refused: state space exceeds cap");
  }
}

std::vector<DenseTensor> all_log_tables(const FactorGraph& g) {
  std::vector<DenseTensor> tables;
  tables.reserve(g.factors().size());
  for (const auto& f : g.factors()) {
    tables.push_back(materialize_log_table(g, f));
  }
  return tables;
}

// Running log(exp(a) + exp(b)) tolerant of NEG_INF.
double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

double assignment_log_score(const FactorGraph& g, const Assignment& x) {
  double score = 0.0;
  std::vector<int> idx;
  for (const auto& f : g.factors()) {
    idx.clear();
    for (int v : f.scope) idx.push_back(x[v]);
    score += materialize_log_table(g, f).at(idx);
  }
  return score;
}

MarginalTable exact_marginals(const FactorGraph& g, const ExactOptions& opts) {
  const auto shape = full_shape(g);
  check_cap(shape, opts);
  const auto tables = all_log_tables(g);

  MarginalTable acc(g.num_variables());
  for (int i = 0; i < g.num_variables(); ++i) {
    acc[i].assign(shape[i], kNegInf);
  }
  double log_z = kNegInf;

  Assignment a(shape.size(), 0);
  std::vector<int> idx;
  do {
    double score = 0.0;
    for (std::size_t fi = 0; fi < tables.size(); ++fi) {
      const auto& f = g.factors()[fi];
      idx.clear();
      for (int v : f.scope) idx.push_back(a[v]);
      score += tables[fi].at(idx);
      if (score == kNegInf) break;
    }
    if (score == kNegInf) continue;
    log_z = log_add(log_z, score);
    for (int i = 0; i < g.num_variables(); ++i) {
      acc[i][a[i]] = log_add(acc[i][a[i]], score);
    }
  } while (next_assignment(shape, a));

  if (log_z == kNegInf) {
    throw std::runtime_error("degenerate model: all assignments forbidden");
  }
  for (int i = 0; i < g.num_variables(); ++i) {
    for (double& v : acc[i]) v = std::exp(v - log_z);
  }
  return acc;
}

MapResult exact_map(const FactorGraph& g, const ExactOptions& opts) {
  const auto shape = full_shape(g);
  check_cap(shape, opts);
  const auto tables = all_log_tables(g);

  MapResult best;
  best.log_score = kNegInf;
  bool found = false;

  Assignment a(shape.size(), 0);
  std::vector<int> idx;
  do {
    double score = 0.0;
    for (std::size_t fi = 0; fi < tables.size(); ++fi) {
      const auto& f = g.factors()[fi];
      idx.clear();
      for (int v : f.scope) idx.push_back(a[v]);
      score += tables[fi].at(idx);
      if (score == kNegInf) break;
    }
    // Enumeration is lexicographic, so strict improvement keeps the
    // lexicographically smallest argmax.
    if (score > best.log_score) {
      best.log_score = score;
      best.assignment = a;
      found = true;
    }
  } while (next_assignment(shape, a));

  if (!found) {
    throw std::runtime_error("degenerate model: all assignments forbidden");
  }
  return best;
}

double log_partition_function(const FactorGraph& g, const ExactOptions& opts) {
  const auto shape = full_shape(g);
  check_cap(shape, opts);
  const auto tables = all_log_tables(g);

  double log_z = kNegInf;
  Assignment a(shape.size(), 0);
  std::vector<int> idx;
  do {
    double score = 0.0;
    for (std::size_t fi = 0; fi < tables.size(); ++fi) {
      const auto& f = g.factors()[fi];
      idx.clear();
      for (int v : f.scope) idx.push_back(a[v]);
      score += tables[fi].at(idx);
      if (score == kNegInf) break;
    }
    log_z = log_add(log_z, score);
  } while (next_assignment(shape, a));

  if (log_z == kNegInf) {
    throw std::runtime_error("degenerate model: all assignments forbidden");
  }
  return log_z;
}

}  // namespace fgbp
