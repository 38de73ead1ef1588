#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rabm/choice.hpp"

namespace rabm {

/// ceil(500 * l / (J * T)): minimum respondents for a choice-based conjoint study.
long long min_sample_size(long long max_levels, long long alternatives, long long tasks);

struct ConjointAttribute {
  std::string code;  // short column tag, e.g. "P"
  std::string name;  // report name, e.g. "price_discount"
  int levels = 3;
};

/// The five store attributes with three levels each (P, v, A, S, d).
std::vector<ConjointAttribute> store_attributes();

struct ChoiceDesign {
  std::vector<ConjointAttribute> attributes;
  int tasks = 0;
  int alternatives = 0;
  /// 0-based level per (task, alternative, attribute), row-major in that order.
  std::vector<int> cells;

  int level(int task, int alt, int attr) const {
    return cells[(static_cast<std::size_t>(task) * alternatives + alt) * attributes.size() + attr];
  }
  int& level(int task, int alt, int attr) {
    return cells[(static_cast<std::size_t>(task) * alternatives + alt) * attributes.size() + attr];
  }
};

struct DesignDiagnostics {
  /// Largest gap between the most and least frequent level of any attribute.
  int balance_deviation = 0;
  /// Share of within-task alternative pairs that show the same level, over all attributes.
  double overlap_rate = 0.0;
  int duplicate_profiles = 0;
};

DesignDiagnostics diagnose(const ChoiceDesign& design);

struct GeneratedDesign {
  ChoiceDesign design;
  DesignDiagnostics diagnostics;
};

struct DesignOptions {
  /// Keep swapping to reduce within-task level overlap (a more efficient, less
  /// survey-like design). Off: swaps only repair duplicate profiles.
  bool minimize_overlap = false;
};

/// Randomized level-balanced design: each attribute's levels are dealt evenly over the
/// T*J cells and shuffled, then random same-attribute swaps remove duplicate profiles
/// inside a task (and optionally reduce overlap).
GeneratedDesign generate_design(std::vector<ConjointAttribute> attributes, int tasks,
                                int alternatives, std::uint64_t seed, const DesignOptions& options = {});

/// Part-worths per attribute, per level.
using Worths = std::vector<std::vector<double>>;

Worths worths_of(const PartWorthTable& table);

struct ChoiceDataset {
  ChoiceDesign design;
  int respondents = 0;
  /// Chosen alternative per (respondent, task).
  std::vector<int> chosen;

  int choice(int resp, int task) const {
    return chosen[static_cast<std::size_t>(resp) * design.tasks + task];
  }
};

/// Softmax over utilities, shifted by the maximum for stability.
std::vector<double> choice_probabilities(std::span<const double> utilities);

/// Every respondent answers every task of `design` by sampling from the logit
/// probabilities implied by `worths`.
ChoiceDataset simulate_choices(const ChoiceDesign& design, const Worths& worths, int respondents,
                               std::uint64_t seed);

/// Effects-coded parameter vector (levels - 1 entries per attribute) <-> full worths.
std::vector<double> effects_parameters(const ChoiceDesign& design, const Worths& worths);
Worths expand_effects(const ChoiceDesign& design, std::span<const double> params);

/// Conditional-logit log-likelihood and its gradient in the effects-coded parameters.
double mnl_loglik(const ChoiceDataset& data, std::span<const double> params);
std::vector<double> mnl_gradient(const ChoiceDataset& data, std::span<const double> params);

struct MnlFit {
  Worths worths;
  Worths se;
  Worths p;  // two-sided Wald p-values
  double loglik = 0.0;
  int iterations = 0;
  double gradient_max_norm = 0.0;
  /// Eigenvalues of the Hessian at the optimum (all negative on well-posed data).
  std::vector<double> hessian_eigenvalues;
  /// Log-likelihood after each accepted Newton step, starting from zero parameters.
  std::vector<double> loglik_trace;
};

struct FitOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-8;
};

/// Damped Newton maximum likelihood. Throws EstimationError on non-convergence (with
/// the iteration trace) or a singular information matrix (naming the attribute).
MnlFit fit_mnl(const ChoiceDataset& data, const FitOptions& options = {});

void write_design_csv(std::ostream& out, const ChoiceDesign& design);
ChoiceDesign read_design_csv(std::istream& in, std::string_view source);

/// One row per (respondent, task, alternative): resp,task,alt,chosen,level_<code>...
void write_dataset_csv(std::ostream& out, const ChoiceDataset& data);
ChoiceDataset read_dataset_csv(std::istream& in, std::string_view source);

/// attribute,level,worth,se,p
void write_fit_csv(std::ostream& out, const ChoiceDesign& design, const MnlFit& fit);

}  // namespace rabm
