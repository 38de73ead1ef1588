#include "rabm/conjoint.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "rabm/error.hpp"
#include "rabm/io.hpp"
#include "rabm/rng.hpp"
#include "rabm/stats.hpp"

namespace rabm {

long long min_sample_size(long long l, long long j, long long t) {
  if (l <= 0 || j <= 0 || t <= 0) throw ContractError("sample-size inputs must be positive");
  const long long num = 500 * l;
  const long long den = j * t;
  return (num + den - 1) / den;
}

std::vector<ConjointAttribute> store_attributes() {
  return {{"P", "price_discount", 3}, {"v", "quality", 3}, {"A", "assortment", 3},
          {"S", "service", 3},        {"d", "distance", 3}};
}

namespace {

std::size_t attribute_count(const ChoiceDesign& d) { return d.attributes.size(); }

int parameter_count(const ChoiceDesign& d) {
  int n = 0;
  for (const auto& a : d.attributes) n += a.levels - 1;
  return n;
}

void check_design_shape(const ChoiceDesign& d) {
  if (d.attributes.empty()) throw ValidationError("design has no attributes");
  for (const auto& a : d.attributes)
    if (a.levels < 2) throw ValidationError("attribute " + a.name + " needs at least 2 levels");
  if (d.tasks < 1) throw ValidationError("design needs at least one task");
  if (d.alternatives < 2) throw ValidationError("a choice task needs at least 2 alternatives");
  const std::size_t expected =
      static_cast<std::size_t>(d.tasks) * static_cast<std::size_t>(d.alternatives) * d.attributes.size();
  if (d.cells.size() != expected) throw ContractError("design cell count does not match its shape");
}

// Same-level alternative pairs inside one task, plus a heavy charge per duplicate profile.
long long task_cost(const ChoiceDesign& d, int task, long long* duplicates = nullptr,
                    long long* overlaps = nullptr) {
  long long overlap = 0, dup = 0;
  for (int a = 0; a < d.alternatives; ++a)
    for (int b = a + 1; b < d.alternatives; ++b) {
      long long same = 0;
      for (std::size_t k = 0; k < attribute_count(d); ++k)
        if (d.level(task, a, static_cast<int>(k)) == d.level(task, b, static_cast<int>(k))) ++same;
      overlap += same;
      if (same == static_cast<long long>(attribute_count(d))) ++dup;
    }
  if (duplicates) *duplicates += dup;
  if (overlaps) *overlaps += overlap;
  return overlap + 1000 * dup;
}

}  // namespace

DesignDiagnostics diagnose(const ChoiceDesign& d) {
  check_design_shape(d);
  DesignDiagnostics out;
  for (std::size_t k = 0; k < attribute_count(d); ++k) {
    std::vector<int> freq(static_cast<std::size_t>(d.attributes[k].levels), 0);
    for (int t = 0; t < d.tasks; ++t)
      for (int a = 0; a < d.alternatives; ++a) ++freq[static_cast<std::size_t>(d.level(t, a, static_cast<int>(k)))];
    const auto [lo, hi] = std::minmax_element(freq.begin(), freq.end());
    out.balance_deviation = std::max(out.balance_deviation, *hi - *lo);
  }
  long long dup = 0, overlap = 0;
  for (int t = 0; t < d.tasks; ++t) task_cost(d, t, &dup, &overlap);
  const double pairs = static_cast<double>(d.tasks) * d.alternatives * (d.alternatives - 1) / 2.0 *
                       static_cast<double>(attribute_count(d));
  out.overlap_rate = static_cast<double>(overlap) / pairs;
  out.duplicate_profiles = static_cast<int>(dup);
  return out;
}

GeneratedDesign generate_design(std::vector<ConjointAttribute> attributes, int tasks, int alternatives,
                                std::uint64_t seed, const DesignOptions& options) {
  ChoiceDesign d;
  d.attributes = std::move(attributes);
  d.tasks = tasks;
  d.alternatives = alternatives;
  if (alternatives < 2) throw ValidationError("a choice task needs at least 2 alternatives");
  if (tasks < 1) throw ValidationError("design needs at least one task");
  long long profiles = 1;
  int max_levels = 0;
  for (const auto& a : d.attributes) {
    if (a.levels < 2) throw ValidationError("attribute " + a.name + " needs at least 2 levels");
    profiles = std::min<long long>(profiles * a.levels, 1'000'000'000LL);
    max_levels = std::max(max_levels, a.levels);
  }
  if (d.attributes.empty()) throw ValidationError("design has no attributes");
  if (alternatives > profiles)
    throw ValidationError("infeasible design: " + std::to_string(alternatives) +
                          " alternatives but only " + std::to_string(profiles) + " distinct profiles");
  const int n_cells = tasks * alternatives;
  if (n_cells < max_levels) throw ValidationError("tasks x alternatives must cover every level");

  Rng rng(seed);
  const std::size_t n_attr = d.attributes.size();
  d.cells.assign(static_cast<std::size_t>(n_cells) * n_attr, 0);
  std::vector<int> column(static_cast<std::size_t>(n_cells));
  for (std::size_t k = 0; k < n_attr; ++k) {
    // Deal levels in a randomly rotated cycle so the surplus levels vary by attribute.
    const int offset = static_cast<int>(rng.below(static_cast<std::uint64_t>(d.attributes[k].levels)));
    for (int c = 0; c < n_cells; ++c) column[static_cast<std::size_t>(c)] = (c + offset) % d.attributes[k].levels;
    for (int c = n_cells - 1; c > 0; --c)
      std::swap(column[static_cast<std::size_t>(c)], column[rng.below(static_cast<std::uint64_t>(c) + 1)]);
    for (int c = 0; c < n_cells; ++c) d.cells[static_cast<std::size_t>(c) * n_attr + k] = column[static_cast<std::size_t>(c)];
  }

  // Swapping two cells of one attribute keeps level balance; accept when cost does not rise.
  // Without overlap minimization only duplicate profiles are charged, and the search
  // stops as soon as none remain.
  auto cost = [&](int t) {
    long long dup = 0;
    const long long full = task_cost(d, t, &dup);
    return options.minimize_overlap ? full : dup;
  };
  auto total_duplicates = [&] {
    long long dup = 0;
    for (int t = 0; t < tasks; ++t) task_cost(d, t, &dup);
    return dup;
  };
  const long long proposals = 4000LL * n_cells;
  for (long long it = 0; it < proposals; ++it) {
    if (!options.minimize_overlap && it % n_cells == 0 && total_duplicates() == 0) break;
    const int c1 = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_cells)));
    const int c2 = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_cells)));
    const int k = static_cast<int>(rng.below(n_attr));
    const int t1 = c1 / alternatives, t2 = c2 / alternatives;
    if (t1 == t2) continue;
    int& x = d.level(t1, c1 % alternatives, k);
    int& y = d.level(t2, c2 % alternatives, k);
    if (x == y) continue;
    const long long before = cost(t1) + cost(t2);
    std::swap(x, y);
    const long long after = cost(t1) + cost(t2);
    if (after > before) std::swap(x, y);
  }

  GeneratedDesign out{d, diagnose(d)};
  if (out.diagnostics.duplicate_profiles > 0)
    throw ValidationError("could not remove duplicate profiles within tasks; add tasks or levels");
  return out;
}

Worths worths_of(const PartWorthTable& table) {
  Worths w;
  for (auto attr : kWorthAttributes) {
    std::vector<double> levels;
    for (auto lvl : kLevels) levels.push_back(table.at(attr, lvl));
    w.push_back(std::move(levels));
  }
  return w;
}

std::vector<double> choice_probabilities(std::span<const double> u) {
  std::vector<double> p(u.begin(), u.end());
  if (p.empty()) return p;
  const double top = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (auto& v : p) sum += (v = std::exp(v - top));
  for (auto& v : p) v /= sum;
  return p;
}

namespace {

void check_worths(const ChoiceDesign& d, const Worths& w) {
  if (w.size() != d.attributes.size()) throw ValidationError("worths do not match the design attributes");
  for (std::size_t k = 0; k < w.size(); ++k)
    if (w[k].size() != static_cast<std::size_t>(d.attributes[k].levels))
      throw ValidationError("worths for " + d.attributes[k].name + " have the wrong level count");
}

double profile_utility(const ChoiceDesign& d, const Worths& w, int task, int alt) {
  double u = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k)
    u += w[k][static_cast<std::size_t>(d.level(task, alt, static_cast<int>(k)))];
  return u;
}

// Effects-coded row for one alternative.
void code_row(const ChoiceDesign& d, int task, int alt, double* row) {
  int offset = 0;
  for (std::size_t k = 0; k < d.attributes.size(); ++k) {
    const int free = d.attributes[k].levels - 1;
    const int lvl = d.level(task, alt, static_cast<int>(k));
    for (int j = 0; j < free; ++j) row[offset + j] = lvl == free ? -1.0 : (lvl == j ? 1.0 : 0.0);
    offset += free;
  }
}

struct Evaluation {
  double loglik = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

// Per-respondent choices on a shared design: accumulate counts per (task, alternative)
// so the work is linear in tasks rather than in observations.
Evaluation evaluate(const ChoiceDataset& data, const Eigen::VectorXd& beta, bool with_hessian) {
  const ChoiceDesign& d = data.design;
  const int P = parameter_count(d);
  const int J = d.alternatives;
  Evaluation ev;
  ev.gradient = Eigen::VectorXd::Zero(P);
  if (with_hessian) ev.hessian = Eigen::MatrixXd::Zero(P, P);

  Eigen::MatrixXd X(J, P);
  Eigen::VectorXd counts(J);
  for (int t = 0; t < d.tasks; ++t) {
    for (int a = 0; a < J; ++a) {
      Eigen::VectorXd row(P);
      code_row(d, t, a, row.data());
      X.row(a) = row.transpose();
    }
    counts.setZero();
    for (int r = 0; r < data.respondents; ++r) counts[data.choice(r, t)] += 1.0;
    const double n = counts.sum();
    if (n == 0.0) continue;

    const Eigen::VectorXd u = X * beta;
    std::vector<double> uv(u.data(), u.data() + J);
    const auto pv = choice_probabilities(uv);
    const Eigen::Map<const Eigen::VectorXd> p(pv.data(), J);
    const double top = u.maxCoeff();
    double lse = 0.0;
    for (int a = 0; a < J; ++a) lse += std::exp(u[a] - top);
    lse = top + std::log(lse);

    ev.loglik += counts.dot(u) - n * lse;
    const Eigen::VectorXd mean = X.transpose() * p;
    ev.gradient += X.transpose() * counts - n * mean;
    if (with_hessian) {
      const Eigen::MatrixXd centred = X.rowwise() - mean.transpose();
      ev.hessian -= n * (centred.transpose() * p.asDiagonal() * centred);
    }
  }
  return ev;
}

void check_dataset(const ChoiceDataset& data) {
  check_design_shape(data.design);
  if (data.respondents < 1) throw ValidationError("dataset has no respondents");
  if (data.chosen.size() != static_cast<std::size_t>(data.respondents) * data.design.tasks)
    throw ContractError("dataset choice count does not match respondents x tasks");
  for (int c : data.chosen)
    if (c < 0 || c >= data.design.alternatives) throw ValidationError("chosen alternative out of range");
}

Eigen::VectorXd to_vector(const ChoiceDesign& d, std::span<const double> params) {
  if (params.size() != static_cast<std::size_t>(parameter_count(d)))
    throw ContractError("parameter vector has the wrong length");
  return Eigen::Map<const Eigen::VectorXd>(params.data(), static_cast<Eigen::Index>(params.size()));
}

}  // namespace

ChoiceDataset simulate_choices(const ChoiceDesign& design, const Worths& worths, int respondents,
                               std::uint64_t seed) {
  check_design_shape(design);
  check_worths(design, worths);
  if (respondents < 1) throw ValidationError("need at least one respondent");
  ChoiceDataset out{design, respondents, {}};
  out.chosen.reserve(static_cast<std::size_t>(respondents) * design.tasks);
  std::vector<std::vector<double>> probs;
  for (int t = 0; t < design.tasks; ++t) {
    std::vector<double> u;
    for (int a = 0; a < design.alternatives; ++a) u.push_back(profile_utility(design, worths, t, a));
    probs.push_back(choice_probabilities(u));
  }
  Rng rng(seed);
  for (int r = 0; r < respondents; ++r)
    for (int t = 0; t < design.tasks; ++t) {
      const double draw = rng.uniform();
      double acc = 0.0;
      int pick = design.alternatives - 1;
      for (int a = 0; a < design.alternatives; ++a) {
        acc += probs[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)];
        if (draw < acc) {
          pick = a;
          break;
        }
      }
      out.chosen.push_back(pick);
    }
  return out;
}

std::vector<double> effects_parameters(const ChoiceDesign& d, const Worths& w) {
  check_worths(d, w);
  std::vector<double> params;
  for (std::size_t k = 0; k < w.size(); ++k)
    for (int j = 0; j + 1 < d.attributes[k].levels; ++j) params.push_back(w[k][static_cast<std::size_t>(j)]);
  return params;
}

Worths expand_effects(const ChoiceDesign& d, std::span<const double> params) {
  if (params.size() != static_cast<std::size_t>(parameter_count(d)))
    throw ContractError("parameter vector has the wrong length");
  Worths w;
  std::size_t i = 0;
  for (const auto& a : d.attributes) {
    std::vector<double> levels;
    double sum = 0.0;
    for (int j = 0; j + 1 < a.levels; ++j) {
      levels.push_back(params[i]);
      sum += params[i++];
    }
    levels.push_back(-sum);
    w.push_back(std::move(levels));
  }
  return w;
}

double mnl_loglik(const ChoiceDataset& data, std::span<const double> params) {
  check_dataset(data);
  return evaluate(data, to_vector(data.design, params), false).loglik;
}

std::vector<double> mnl_gradient(const ChoiceDataset& data, std::span<const double> params) {
  check_dataset(data);
  const auto g = evaluate(data, to_vector(data.design, params), false).gradient;
  return {g.data(), g.data() + g.size()};
}

MnlFit fit_mnl(const ChoiceDataset& data, const FitOptions& options) {
  check_dataset(data);
  const ChoiceDesign& d = data.design;
  for (std::size_t k = 0; k < d.attributes.size(); ++k) {
    std::vector<int> seen(static_cast<std::size_t>(d.attributes[k].levels), 0);
    for (int t = 0; t < d.tasks; ++t)
      for (int a = 0; a < d.alternatives; ++a) seen[static_cast<std::size_t>(d.level(t, a, static_cast<int>(k)))] = 1;
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
      throw EstimationError("attribute " + d.attributes[k].name + " has a level that never appears");
  }

  const int P = parameter_count(d);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(P);
  Evaluation ev = evaluate(data, beta, true);
  MnlFit fit;
  fit.loglik_trace.push_back(ev.loglik);

  auto name_deficient = [&](const Eigen::MatrixXd& info) {
    std::string worst;
    double smallest = std::numeric_limits<double>::infinity();
    int offset = 0;
    for (const auto& a : d.attributes) {
      const int free = a.levels - 1;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info.block(offset, offset, free, free));
      if (es.eigenvalues().minCoeff() < smallest) {
        smallest = es.eigenvalues().minCoeff();
        worst = a.name;
      }
      offset += free;
    }
    return worst;
  };

  std::ostringstream trace;
  int it = 0;
  for (;; ++it) {
    const double gmax = ev.gradient.cwiseAbs().maxCoeff();
    trace << "iter " << it << " loglik " << format_double(ev.loglik) << " |grad| " << format_double(gmax) << '\n';
    if (gmax < options.gradient_tolerance) break;
    if (it >= options.max_iterations)
      throw EstimationError("conditional logit did not converge (possible separation)\n" + trace.str());

    const Eigen::MatrixXd info = -ev.hessian;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-12 * std::max(1.0, ldlt.vectorD().maxCoeff()))
      throw EstimationError("singular information matrix; deficient attribute: " + name_deficient(info));
    const Eigen::VectorXd direction = ldlt.solve(ev.gradient);

    double step = 1.0;
    Evaluation next;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
      const Eigen::VectorXd trial = beta + step * direction;
      next = evaluate(data, trial, true);
      // Near the optimum the gain drops below rounding of the log-likelihood; then a
      // smaller gradient decides.
      const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::fabs(ev.loglik);
      const bool flat = next.loglik >= ev.loglik - noise &&
                        next.gradient.cwiseAbs().maxCoeff() < gmax;
      if (std::isfinite(next.loglik) && (next.loglik >= ev.loglik || flat)) {
        beta = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No ascent along the Newton direction: already at numerical precision.
      if (gmax < 1e3 * options.gradient_tolerance) break;
      throw EstimationError("conditional logit line search failed\n" + trace.str());
    }
    ev = std::move(next);
    fit.loglik_trace.push_back(ev.loglik);
  }

  const Eigen::MatrixXd info = -ev.hessian;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw EstimationError("singular information matrix; deficient attribute: " + name_deficient(info));
  const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(P, P));

  fit.loglik = ev.loglik;
  fit.iterations = it;
  fit.gradient_max_norm = ev.gradient.cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ev.hessian, Eigen::EigenvaluesOnly);
  fit.hessian_eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + P);

  fit.worths = expand_effects(d, std::span<const double>(beta.data(), static_cast<std::size_t>(P)));
  int offset = 0;
  for (std::size_t k = 0; k < d.attributes.size(); ++k) {
    const int free = d.attributes[k].levels - 1;
    std::vector<double> se, p;
    for (int j = 0; j < free; ++j) se.push_back(std::sqrt(cov(offset + j, offset + j)));
    // Last level is minus the sum of the others.
    const double var_last = cov.block(offset, offset, free, free).sum();
    se.push_back(std::sqrt(std::max(var_last, 0.0)));
    for (int j = 0; j <= free; ++j)
      p.push_back(normal_two_sided_p(fit.worths[k][static_cast<std::size_t>(j)] / se[static_cast<std::size_t>(j)]));
    fit.se.push_back(std::move(se));
    fit.p.push_back(std::move(p));
    offset += free;
  }
  return fit;
}

namespace {

std::string name_for_code(const std::string& code) {
  for (const auto& a : store_attributes())
    if (a.code == code) return a.name;
  return code;
}

std::vector<ConjointAttribute> attributes_from_header(const CsvTable& table, std::size_t first,
                                                      std::string_view source) {
  std::vector<ConjointAttribute> attrs;
  for (std::size_t c = first; c < table.header.size(); ++c) {
    const std::string& col = table.header[c];
    if (col.rfind("level_", 0) != 0 || col.size() == 6)
      throw ParseError(std::string(source) + ": expected a level_<code> column, got '" + col + "'");
    const std::string code = col.substr(6);
    attrs.push_back({code, name_for_code(code), 0});
  }
  if (attrs.empty()) throw ParseError(std::string(source) + ": no level_ columns");
  return attrs;
}

int parse_positive(const CsvRow& row, std::size_t col, std::string_view source) {
  try {
    const long long v = parse_int(row.fields[col]);
    if (v < 1 || v > 1'000'000) throw ValidationError("out of range");
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw ParseError(std::string(source) + ":" + std::to_string(row.line) + ": expected a positive integer, got '" +
                     row.fields[col] + "'");
  }
}

// Fills design cells from rows keyed by (task, alt); level columns start at `first`.
void fill_design(ChoiceDesign& d, const std::vector<std::array<int, 2>>& keys, const CsvTable& table,
                 std::size_t first, std::string_view source) {
  const std::size_t n_attr = d.attributes.size();
  d.cells.assign(static_cast<std::size_t>(d.tasks) * d.alternatives * n_attr, -1);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const int t = keys[i][0], a = keys[i][1];
    for (std::size_t k = 0; k < n_attr; ++k) {
      const int lvl = parse_positive(row, first + k, source) - 1;
      int& cell = d.level(t, a, static_cast<int>(k));
      if (cell >= 0 && cell != lvl)
        throw ValidationError(std::string(source) + ":" + std::to_string(row.line) +
                              ": task/alternative levels differ between respondents");
      cell = lvl;
      d.attributes[k].levels = std::max(d.attributes[k].levels, lvl + 1);
    }
  }
  if (std::find(d.cells.begin(), d.cells.end(), -1) != d.cells.end())
    throw ValidationError(std::string(source) + ": some (task, alternative) cells are missing");
  for (auto& a : d.attributes) a.levels = std::max(a.levels, 2);
}

}  // namespace

void write_design_csv(std::ostream& out, const ChoiceDesign& d) {
  out << "task,alt";
  for (const auto& a : d.attributes) out << ",level_" << a.code;
  out << '\n';
  for (int t = 0; t < d.tasks; ++t)
    for (int a = 0; a < d.alternatives; ++a) {
      out << t + 1 << ',' << a + 1;
      for (std::size_t k = 0; k < d.attributes.size(); ++k) out << ',' << d.level(t, a, static_cast<int>(k)) + 1;
      out << '\n';
    }
}

ChoiceDesign read_design_csv(std::istream& in, std::string_view source) {
  const CsvTable table = read_csv(in, source);
  if (table.header.size() < 3 || table.header[0] != "task" || table.header[1] != "alt")
    throw ParseError(std::string(source) + ": expected header task,alt,level_...");
  ChoiceDesign d;
  d.attributes = attributes_from_header(table, 2, source);
  std::vector<std::array<int, 2>> keys;
  for (const auto& row : table.rows) {
    const int t = parse_positive(row, 0, source), a = parse_positive(row, 1, source);
    d.tasks = std::max(d.tasks, t);
    d.alternatives = std::max(d.alternatives, a);
    keys.push_back({t - 1, a - 1});
  }
  if (keys.size() != static_cast<std::size_t>(d.tasks) * d.alternatives)
    throw ValidationError(std::string(source) + ": expected one row per (task, alternative)");
  fill_design(d, keys, table, 2, source);
  check_design_shape(d);
  return d;
}

void write_dataset_csv(std::ostream& out, const ChoiceDataset& data) {
  const ChoiceDesign& d = data.design;
  out << "resp,task,alt,chosen";
  for (const auto& a : d.attributes) out << ",level_" << a.code;
  out << '\n';
  for (int r = 0; r < data.respondents; ++r)
    for (int t = 0; t < d.tasks; ++t)
      for (int a = 0; a < d.alternatives; ++a) {
        out << r + 1 << ',' << t + 1 << ',' << a + 1 << ',' << (data.choice(r, t) == a ? 1 : 0);
        for (std::size_t k = 0; k < d.attributes.size(); ++k) out << ',' << d.level(t, a, static_cast<int>(k)) + 1;
        out << '\n';
      }
}

ChoiceDataset read_dataset_csv(std::istream& in, std::string_view source) {
  const CsvTable table = read_csv(in, source);
  if (table.header.size() < 5 || table.header[0] != "resp" || table.header[1] != "task" ||
      table.header[2] != "alt" || table.header[3] != "chosen")
    throw ParseError(std::string(source) + ": expected header resp,task,alt,chosen,level_...");
  ChoiceDataset data;
  ChoiceDesign& d = data.design;
  d.attributes = attributes_from_header(table, 4, source);
  std::vector<std::array<int, 2>> keys;
  std::map<std::pair<int, int>, std::vector<int>> picks;  // (resp, task) -> chosen alternatives
  for (const auto& row : table.rows) {
    const int r = parse_positive(row, 0, source), t = parse_positive(row, 1, source),
              a = parse_positive(row, 2, source);
    const std::string& chosen = row.fields[3];
    if (chosen != "0" && chosen != "1")
      throw ParseError(std::string(source) + ":" + std::to_string(row.line) + ": chosen must be 0 or 1");
    data.respondents = std::max(data.respondents, r);
    d.tasks = std::max(d.tasks, t);
    d.alternatives = std::max(d.alternatives, a);
    keys.push_back({t - 1, a - 1});
    auto& list = picks[{r - 1, t - 1}];
    if (chosen == "1") list.push_back(a - 1);
  }
  if (table.rows.size() != static_cast<std::size_t>(data.respondents) * d.tasks * d.alternatives)
    throw ValidationError(std::string(source) + ": expected one row per (respondent, task, alternative)");
  fill_design(d, keys, table, 4, source);
  check_design_shape(d);
  data.chosen.assign(static_cast<std::size_t>(data.respondents) * d.tasks, -1);
  for (const auto& [key, list] : picks) {
    if (list.size() != 1)
      throw ValidationError(std::string(source) + ": respondent " + std::to_string(key.first + 1) + " task " +
                            std::to_string(key.second + 1) + " must have exactly one chosen alternative");
    data.chosen[static_cast<std::size_t>(key.first) * d.tasks + key.second] = list.front();
  }
  if (std::find(data.chosen.begin(), data.chosen.end(), -1) != data.chosen.end())
    throw ValidationError(std::string(source) + ": missing choices");
  return data;
}

void write_fit_csv(std::ostream& out, const ChoiceDesign& d, const MnlFit& fit) {
  out << "attribute,level,worth,se,p\n";
  for (std::size_t k = 0; k < d.attributes.size(); ++k)
    for (std::size_t j = 0; j < fit.worths[k].size(); ++j)
      out << d.attributes[k].name << ',' << j + 1 << ',' << format_fixed(fit.worths[k][j], 5) << ','
          << format_fixed(fit.se[k][j], 5) << ',' << format_fixed(fit.p[k][j], 4) << '\n';
}

}  // namespace rabm
