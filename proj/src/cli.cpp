#include "rabm/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "rabm/config.hpp"
#include "rabm/conjoint.hpp"
#include "rabm/doe.hpp"
#include "rabm/engine.hpp"
#include "rabm/error.hpp"
#include "rabm/geo.hpp"
#include "rabm/io.hpp"
#include "rabm/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace rabm {
namespace {

// Collects outputs in a staging directory next to the target and moves them into place
// only when the command succeeds; anything staged is removed otherwise.
class Staging {
 public:
  explicit Staging(fs::path target) : target_(std::move(target)) {
    staging_ = target_;
    staging_ += ".partial";
    fs::remove_all(staging_);
    fs::create_directories(staging_);
  }
  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;
  ~Staging() {
    std::error_code ec;
    fs::remove_all(staging_, ec);
  }

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(staging_ / name, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + (staging_ / name).string());
    body(out);
    out.flush();
    if (!out) throw ValidationError("failed writing " + (staging_ / name).string());
    names_.push_back(name);
  }

  const std::vector<std::string>& names() const { return names_; }

  void commit() {
    fs::create_directories(target_);
    for (const auto& name : names_) fs::rename(staging_ / name, target_ / name);
    fs::remove_all(staging_);
  }

 private:
  fs::path target_;
  fs::path staging_;
  std::vector<std::string> names_;
};

// Single-file output: write to a sibling temporary, then rename over the target.
void write_file_atomically(const fs::path& target, const std::function<void(std::ostream&)>& body) {
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".partial";
  try {
    {
      std::ofstream out(tmp, std::ios::binary);
      if (!out) throw ValidationError("cannot write " + tmp.string());
      body(out);
      out.flush();
      if (!out) throw ValidationError("failed writing " + tmp.string());
    }
    fs::rename(tmp, target);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

json file_digests(const std::vector<fs::path>& files) {
  json list = json::array();
  for (const auto& f : files) list.push_back({{"path", f.generic_string()}, {"fnv1a64", fnv1a_hex(read_text_file(f))}});
  return list;
}

json manifest(const std::string& command, const Setup* setup, std::uint64_t seed, json extra,
              const std::vector<fs::path>& inputs, const std::vector<std::string>& outputs) {
  json m;
  m["tool"] = "rabm";
  m["version"] = kVersion;
  m["command"] = command;
  m["seed"] = seed;
  if (setup) {
    json cfg = json::object();
    for (const auto& [k, v] : setup->resolved) cfg[k] = v;
    m["config"] = cfg;
  }
  for (auto& [k, v] : extra.items()) m[k] = v;
  m["inputs"] = file_digests(inputs);
  json outs = json::array();
  for (const auto& o : outputs) outs.push_back(o);
  outs.push_back("manifest.json");
  m["outputs"] = outs;
  return m;
}

void write_manifest(Staging& stage, const json& m) {
  stage.write("manifest.json", [&](std::ostream& o) { o << m.dump(2) << '\n'; });
}

std::vector<fs::path> setup_inputs(const Setup& s, const fs::path& config) {
  auto files = s.input_files();
  files.insert(files.begin(), config);
  return files;
}

KeyValues overrides_from(long long horizon, std::optional<std::uint64_t> seed) {
  KeyValues kv;
  if (horizon > 0) kv["horizon_weeks"] = std::to_string(horizon);
  if (seed) kv["seed"] = std::to_string(*seed);
  return kv;
}

struct Options {
  // gen-town
  TownParams town;
  fs::path out;
  // simulate / sensitivity / sweep
  fs::path config;
  fs::path out_dir;
  long long horizon = 0;
  std::optional<std::uint64_t> seed;
  std::string mode = "discount";
  unsigned threads = 0;
  // anova
  std::string design = "standard27";
  fs::path response;
  std::string column;
  std::string factors = "none";
  // conjoint
  int tasks = 16;
  int alternatives = 4;
  bool min_overlap = false;
  fs::path design_file;
  fs::path worths_file;
  int respondents = 150;
  fs::path data_file;
  long long levels = 3;
};

int cmd_gen_town(const Options& o, std::ostream& out) {
  TownParams p = o.town;
  if (o.seed) p.seed = *o.seed;
  const auto sites = generate_town(p);
  write_file_atomically(o.out, [&](std::ostream& f) { write_sites(f, sites); });
  const SiteCounts c = count_sites(sites);
  out << "wrote " << sites.size() << " sites (" << c.households << " households, " << c.retailers[0]
      << " unorganized, " << c.retailers[1] << " organized, " << c.retailers[2] << " e-pharmacy) to "
      << o.out.string() << '\n';
  return 0;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  Setup setup = load_setup(o.config, overrides_from(o.horizon, o.seed));
  const auto town = build_town(setup);
  const RunSummary s = run(setup.scenario, town);
  Staging stage(o.out_dir);
  stage.write("weekly.csv", [&](std::ostream& f) { write_weekly_csv(f, s.weeks); });
  stage.write("summary.csv", [&](std::ostream& f) { write_summary_csv(f, s); });
  write_manifest(stage, manifest("simulate", &setup, setup.scenario.seed, json::object(),
                                 setup_inputs(setup, o.config), stage.names()));
  stage.commit();
  out << "unorganized share " << format_fixed(s.avg_share[0], 2) << "%, organized " << format_fixed(s.avg_share[1], 2)
      << "%, e-pharmacy " << format_fixed(s.avg_share[2], 2) << "%, shutdowns " << s.shutdowns << '\n';
  return 0;
}

int cmd_sensitivity(const Options& o, std::ostream& out) {
  Setup setup = load_setup(o.config, overrides_from(o.horizon, o.seed));
  const auto town = build_town(setup);
  const SensitivityResult r = sensitivity_suite(setup.scenario, town);
  const std::array<std::pair<const char*, const RunSummary*>, 3> cases = {
      {{"base", &r.base}, {"best", &r.best}, {"worst", &r.worst}}};
  Staging stage(o.out_dir);
  stage.write("sensitivity.csv", [&](std::ostream& f) {
    f << "scenario,avg_fp_unorg,avg_fp_org,avg_fp_eph,share_unorg,share_org,share_eph,shutdowns\n";
    for (const auto& [name, s] : cases) {
      std::ostringstream row;
      write_summary_csv(row, *s);
      const std::string text = row.str();
      const auto second = text.find('\n') + 1;
      f << name << ',' << text.substr(second);
    }
  });
  for (const auto& [name, s] : cases)
    stage.write(std::string("weekly_") + name + ".csv", [&](std::ostream& f) { write_weekly_csv(f, s->weeks); });
  write_manifest(stage, manifest("sensitivity", &setup, setup.scenario.seed, json::object(),
                                 setup_inputs(setup, o.config), stage.names()));
  stage.commit();
  for (const auto& [name, s] : cases)
    out << name << ": mean unorganized footprint " << format_fixed(s->avg_footprint[0], 2) << ", shutdowns "
        << s->shutdowns << '\n';
  return 0;
}

void write_analysis(Staging& stage, const FactorialDesign& design, std::span<const SweepRow> rows) {
  std::vector<std::pair<std::string, AnovaTable>> tables;
  for (auto r : kResponses) {
    const auto y = response_column(rows, r);
    const std::string name(to_string(r));
    AnovaTable t = anova3(design, y);
    stage.write("anova_" + name + ".csv", [&](std::ostream& f) { write_anova_csv(f, t); });
    stage.write("effects_" + name + ".csv",
                [&](std::ostream& f) { write_effects_csv(f, design, effect_tables(design, y)); });
    tables.emplace_back(name, std::move(t));
  }
  stage.write("anova_summary.csv", [&](std::ostream& f) {
    f << "response,r_squared,adj_r_squared,degenerate\n";
    for (const auto& [name, t] : tables) {
      std::ostringstream row;
      write_anova_summary_csv(row, t);
      const std::string text = row.str();
      f << name << ',' << text.substr(text.find('\n') + 1);
    }
  });
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const SweepMode mode = parse_sweep_mode(o.mode);
  Setup setup = load_setup(o.config, overrides_from(o.horizon, o.seed));
  const auto town = build_town(setup);
  const FactorialDesign design = full_factorial(factor_names(mode));
  const auto rows = sweep(setup.scenario, town, design, mode, setup.scenario.seed, o.threads);
  Staging stage(o.out_dir);
  stage.write("sweep.csv", [&](std::ostream& f) { write_sweep_csv(f, rows); });
  write_analysis(stage, design, rows);
  write_manifest(stage, manifest("sweep", &setup, setup.scenario.seed, json{{"mode", std::string(to_string(mode))}},
                                 setup_inputs(setup, o.config), stage.names()));
  stage.commit();
  out << "wrote " << rows.size() << " runs and " << kResponses.size() << " ANOVA tables to " << o.out_dir.string()
      << '\n';
  return 0;
}

int cmd_anova(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.design != "standard27") throw ValidationError("unknown design '" + o.design + "' (only standard27)");
  std::ifstream in(o.response);
  if (!in) throw ValidationError("cannot open response file " + o.response.string());
  const auto y = read_response_column(in, o.response.string(), o.column);
  std::array<std::string, 3> names = {"f1", "f2", "f3"};
  if (o.factors != "none") names = factor_names(parse_sweep_mode(o.factors));
  const FactorialDesign design = full_factorial(names);
  const AnovaTable t = anova3(design, y);
  if (t.degenerate) err << "warning: response has no variation; ANOVA is degenerate\n";
  if (o.out_dir.empty()) {
    write_anova_csv(out, t);
    write_anova_summary_csv(out, t);
    return 0;
  }
  Staging stage(o.out_dir);
  stage.write("anova.csv", [&](std::ostream& f) { write_anova_csv(f, t); });
  stage.write("anova_summary.csv", [&](std::ostream& f) { write_anova_summary_csv(f, t); });
  stage.write("effects.csv", [&](std::ostream& f) { write_effects_csv(f, design, effect_tables(design, y)); });
  write_manifest(stage, manifest("anova", nullptr, 0, json{{"column", o.column}}, {o.response}, stage.names()));
  stage.commit();
  write_anova_csv(out, t);
  return 0;
}

int cmd_conjoint_design(const Options& o, std::ostream& out) {
  const std::uint64_t seed = o.seed.value_or(1);
  const auto g = generate_design(store_attributes(), o.tasks, o.alternatives, seed, {o.min_overlap});
  write_file_atomically(o.out, [&](std::ostream& f) { write_design_csv(f, g.design); });
  out << "cells " << o.tasks * o.alternatives << ", balance deviation " << g.diagnostics.balance_deviation
      << ", overlap rate " << format_fixed(g.diagnostics.overlap_rate, 4) << ", duplicate profiles "
      << g.diagnostics.duplicate_profiles << '\n';
  return 0;
}

int cmd_conjoint_simulate(const Options& o, std::ostream& out) {
  std::ifstream in(o.design_file);
  if (!in) throw ValidationError("cannot open design file " + o.design_file.string());
  const ChoiceDesign design = read_design_csv(in, o.design_file.string());
  const fs::path worths_path = o.worths_file.empty() ? default_data_dir() / "partworths_he.csv" : o.worths_file;
  const Worths worths = worths_of(load_partworths(worths_path));
  const auto data = simulate_choices(design, worths, o.respondents, o.seed.value_or(1));
  write_file_atomically(o.out, [&](std::ostream& f) { write_dataset_csv(f, data); });
  out << "simulated " << o.respondents << " respondents x " << design.tasks << " tasks\n";
  return 0;
}

int cmd_conjoint_fit(const Options& o, std::ostream& out) {
  std::ifstream in(o.data_file);
  if (!in) throw ValidationError("cannot open dataset " + o.data_file.string());
  const ChoiceDataset data = read_dataset_csv(in, o.data_file.string());
  const MnlFit fit = fit_mnl(data);
  if (o.out.empty()) {
    write_fit_csv(out, data.design, fit);
  } else {
    write_file_atomically(o.out, [&](std::ostream& f) { write_fit_csv(f, data.design, fit); });
    out << "log-likelihood " << format_fixed(fit.loglik, 4) << " after " << fit.iterations << " iterations\n";
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pharmaceutical retail channel simulator and analysis tools", "rabm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Options o;

  auto* gen = app.add_subcommand("gen-town", "Generate a synthetic town as a site CSV");
  gen->add_option("--households", o.town.households)->check(CLI::NonNegativeNumber);
  gen->add_option("--unorganized", o.town.unorganized)->check(CLI::NonNegativeNumber);
  gen->add_option("--organized", o.town.organized)->check(CLI::NonNegativeNumber);
  gen->add_option("--epharm", o.town.epharm)->check(CLI::NonNegativeNumber);
  gen->add_option("--extent-km", o.town.extent_km)->check(CLI::PositiveNumber);
  gen->add_option("--clusters", o.town.clusters)->check(CLI::NonNegativeNumber);
  gen->add_option("--spacing-iterations", o.town.store_spacing_iterations)->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", o.seed);
  gen->add_option("--out", o.out)->required();

  auto add_run_options = [&](CLI::App* c) {
    c->add_option("--config", o.config)->required()->check(CLI::ExistingFile);
    c->add_option("--out-dir", o.out_dir)->required();
    c->add_option("--horizon", o.horizon, "Override horizon_weeks")->check(CLI::PositiveNumber);
    c->add_option("--seed", o.seed, "Override the config seed");
  };
  auto* sim = app.add_subcommand("simulate", "Run one scenario");
  add_run_options(sim);
  auto* sens = app.add_subcommand("sensitivity", "Run base, best and worst cases");
  add_run_options(sens);
  auto* sw = app.add_subcommand("sweep", "Run the 27-run factorial and analyse every response");
  add_run_options(sw);
  sw->add_option("--mode", o.mode)->check(CLI::IsMember({"discount", "quality"}));
  sw->add_option("--threads", o.threads, "Worker threads (0 = hardware)");

  auto* an = app.add_subcommand("anova", "ANOVA of a 27-value response in standard order");
  an->add_option("--design", o.design)->check(CLI::IsMember({"standard27"}));
  an->add_option("--response", o.response)->required()->check(CLI::ExistingFile);
  an->add_option("--column", o.column, "Column name when the file has several");
  an->add_option("--factors", o.factors, "Factor names: discount, quality or none")
      ->check(CLI::IsMember({"discount", "quality", "none"}));
  an->add_option("--out-dir", o.out_dir, "Write anova, summary and effect CSVs here");

  auto* cj = app.add_subcommand("conjoint", "Choice-based conjoint tools");
  cj->require_subcommand(1);
  auto* cjd = cj->add_subcommand("design", "Generate a level-balanced choice design");
  cjd->add_option("--tasks", o.tasks)->check(CLI::PositiveNumber);
  cjd->add_option("--alternatives", o.alternatives)->check(CLI::PositiveNumber);
  cjd->add_option("--seed", o.seed);
  cjd->add_flag("--min-overlap", o.min_overlap, "Also minimise within-task level overlap");
  cjd->add_option("--out", o.out)->required();
  auto* cjs = cj->add_subcommand("simulate", "Simulate logit respondents on a design");
  cjs->add_option("--design", o.design_file)->required()->check(CLI::ExistingFile);
  cjs->add_option("--worths", o.worths_file, "Part-worth CSV (default: bundled HE table)")->check(CLI::ExistingFile);
  cjs->add_option("--respondents", o.respondents)->check(CLI::PositiveNumber);
  cjs->add_option("--seed", o.seed);
  cjs->add_option("--out", o.out)->required();
  auto* cjf = cj->add_subcommand("fit", "Fit an effects-coded conditional logit");
  cjf->add_option("--data", o.data_file)->required()->check(CLI::ExistingFile);
  cjf->add_option("--out", o.out, "Report CSV (default: stdout)");
  auto* cjn = cj->add_subcommand("sample-size", "Minimum respondents: ceil(500 l / (J T))");
  cjn->add_option("--levels", o.levels)->check(CLI::PositiveNumber);
  cjn->add_option("--alternatives", o.alternatives)->check(CLI::PositiveNumber);
  cjn->add_option("--tasks", o.tasks)->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    if (auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front()) err << sub->help();
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_town(o, out);
    if (sim->parsed()) return cmd_simulate(o, out);
    if (sens->parsed()) return cmd_sensitivity(o, out);
    if (sw->parsed()) return cmd_sweep(o, out);
    if (an->parsed()) return cmd_anova(o, out, err);
    if (cjd->parsed()) return cmd_conjoint_design(o, out);
    if (cjs->parsed()) return cmd_conjoint_simulate(o, out);
    if (cjf->parsed()) return cmd_conjoint_fit(o, out);
    if (cjn->parsed()) {
      out << min_sample_size(o.levels, o.alternatives, o.tasks) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace rabm
