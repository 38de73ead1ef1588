#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "rabm/choice.hpp"
#include "rabm/cli.hpp"
#include "rabm/config.hpp"
#include "rabm/conjoint.hpp"
#include "rabm/doe.hpp"
#include "rabm/error.hpp"
#include "rabm/geo.hpp"
#include "rabm/stats.hpp"
#include "rabm/version.hpp"

namespace py = pybind11;
using namespace rabm;

namespace {

py::dict summary_dict(const RunSummary& s) {
  py::list weeks;
  for (const auto& m : s.weeks) {
    py::dict w;
    w["week"] = m.week;
    w["activated"] = m.activated;
    w["footprint"] = m.footprint;
    w["share"] = m.share;
    w["active_unorganized"] = m.active_unorganized;
    w["mean_distance"] = m.mean_distance;
    weeks.append(w);
  }
  py::dict d;
  d["avg_footprint"] = s.avg_footprint;
  d["avg_share"] = s.avg_share;
  d["shutdowns"] = s.shutdowns;
  d["avg_distance_he"] = s.avg_distance_he;
  d["weeks"] = weeks;
  return d;
}

py::list anova_rows(const AnovaTable& t) {
  py::list rows;
  for (const auto& r : t.rows) {
    py::dict d;
    d["source"] = r.source;
    d["df"] = r.df;
    d["ss"] = r.ss;
    d["ms"] = r.ms;
    d["f"] = r.f;
    d["p"] = r.p;
    d["contribution"] = r.contribution;
    rows.append(d);
  }
  return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pharmacy retail agent-based model, conjoint and factorial-analysis tools";
  m.attr("__version__") = std::string(kVersion);

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<EstimationError>(m, "EstimationError", PyExc_RuntimeError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_RuntimeError);

  m.def("distance_km", [](double lat1, double lon1, double lat2, double lon2) {
    return distance_km({lat1, lon1}, {lat2, lon2});
  }, "Haversine distance between two lat/lon points in km");

  m.def("generate_town", [](long long households, long long unorganized, long long organized, long long epharm,
                            double extent_km, std::uint64_t seed) {
    TownParams p;
    p.households = households;
    p.unorganized = unorganized;
    p.organized = organized;
    p.epharm = epharm;
    p.extent_km = extent_km;
    p.seed = seed;
    py::list out;
    for (const auto& s : generate_town(p))
      out.append(py::make_tuple(s.id, std::string(to_string(s.kind)), s.point.lat(), s.point.lon()));
    return out;
  }, py::arg("households") = 20000, py::arg("unorganized") = 159, py::arg("organized") = 7, py::arg("epharm") = 4,
     py::arg("extent_km") = 10.0, py::arg("seed") = 7, "Synthetic town as (id, kind, lat, lon) tuples");

  m.def("min_sample_size", &min_sample_size, py::arg("levels"), py::arg("alternatives"), py::arg("tasks"));

  m.def("relative_importance", [](const std::filesystem::path& partworth_csv) {
    return relative_importance(load_partworths(partworth_csv));
  }, "Percent importance of price_discount, quality, assortment, service, distance");

  m.def("conjoint_recovery", [](const std::filesystem::path& partworth_csv, int respondents, int tasks,
                                int alternatives, std::uint64_t design_seed, std::uint64_t seed) {
    const auto truth = worths_of(load_partworths(partworth_csv));
    const auto design = generate_design(store_attributes(), tasks, alternatives, design_seed).design;
    const auto fit = fit_mnl(simulate_choices(design, truth, respondents, seed));
    py::dict d;
    d["truth"] = truth;
    d["worths"] = fit.worths;
    d["se"] = fit.se;
    d["p"] = fit.p;
    d["loglik"] = fit.loglik;
    d["iterations"] = fit.iterations;
    return d;
  }, py::arg("partworth_csv"), py::arg("respondents") = 150, py::arg("tasks") = 16, py::arg("alternatives") = 4,
     py::arg("design_seed") = 42, py::arg("seed") = 42,
     "Simulate logit respondents from a part-worth table and refit the conditional logit");

  m.def("anova3", [](const std::vector<double>& response, const std::string& factors) {
    std::array<std::string, 3> names = {"f1", "f2", "f3"};
    if (factors != "none") names = factor_names(parse_sweep_mode(factors));
    const auto t = anova3(full_factorial(names), response);
    py::dict d;
    d["rows"] = anova_rows(t);
    d["r_squared"] = t.r_squared;
    d["adj_r_squared"] = t.adj_r_squared;
    d["degenerate"] = t.degenerate;
    return d;
  }, py::arg("response"), py::arg("factors") = "none",
     "Two-way-interaction ANOVA of a 27-run 3^3 response in standard order");

  m.def("f_upper_tail", &f_upper_tail, py::arg("f"), py::arg("df1"), py::arg("df2"));

  m.def("simulate", [](const std::filesystem::path& config, std::optional<long long> horizon,
                       std::optional<std::uint64_t> seed) {
    KeyValues over;
    if (horizon) over["horizon_weeks"] = std::to_string(*horizon);
    if (seed) over["seed"] = std::to_string(*seed);
    auto setup = load_setup(config, over);
    const auto town = build_town(setup);
    RunSummary s;
    {
      py::gil_scoped_release release;
      s = run(setup.scenario, town);
    }
    return summary_dict(s);
  }, py::arg("config"), py::arg("horizon") = py::none(), py::arg("seed") = py::none(),
     "Run one scenario from a config file");

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = run_cli(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, "Run the command line tool in-process; returns (exit_code, stdout, stderr)");

  m.def("default_data_dir", &default_data_dir);
}
