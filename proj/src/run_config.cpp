#include "evsi/run_config.hpp"

#include "evsi/error.hpp"
#include "evsi/oracles.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace evsi {
namespace {

constexpr std::string_view kModule = "cli";
using nlohmann::json;

void check_keys(const json& object, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!object.is_object())
    throw SchemaError(kModule, "parse_config", std::string(where) + " must be an object");
  for (const auto& item : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      throw SchemaError(kModule, "parse_config",
                        "unknown key '" + item.key() + "' in " + std::string(where));
  }
}

template <typename T>
T get_as(const json& object, const char* key, std::string_view where) {
  try {
    return object.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(kModule, "parse_config",
                      "bad value for '" + std::string(key) + "' in " + std::string(where) + ": " + e.what());
  }
}

template <typename T>
void read_opt(const json& object, const char* key, std::string_view where, T& out) {
  if (object.contains(key)) out = get_as<T>(object, key, where);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

ConjugatePrior prior_from_json(const json& j) {
  check_keys(j, "spec.prior", {"family", "mean", "variance", "obs_variance", "alpha", "beta", "shape", "rate"});
  const auto family = get_as<std::string>(j, "family", "spec.prior");
  if (family == "normal")
    return GaussianPrior{get_as<double>(j, "mean", "spec.prior"), get_as<double>(j, "variance", "spec.prior"),
                         get_as<double>(j, "obs_variance", "spec.prior")};
  if (family == "beta")
    return BetaPrior{get_as<double>(j, "alpha", "spec.prior"), get_as<double>(j, "beta", "spec.prior")};
  if (family == "gamma")
    return GammaPrior{get_as<double>(j, "shape", "spec.prior"), get_as<double>(j, "rate", "spec.prior")};
  throw SchemaError(kModule, "parse_config", "unknown prior family '" + family + "'");
}

void parse_spec(const json& j, RunConfig& out) {
  check_keys(j, "spec", {"focal", "likelihood", "trials", "mu0", "sigma2", "n0", "prior"});
  DataCollectionSpec spec;
  spec.likelihood.family = likelihood_family_from_string(get_as<std::string>(j, "likelihood", "spec"));
  read_opt(j, "trials", "spec", spec.likelihood.trials);
  const json& focal = j.at("focal");
  if (!focal.is_array()) throw SchemaError(kModule, "parse_config", "spec.focal must be an array");
  for (const auto& f : focal) {
    if (f.is_string()) out.focal_names.push_back(f.get<std::string>());
    else if (f.is_number_integer()) spec.focal_indices.push_back(f.get<Index>());
    else throw SchemaError(kModule, "parse_config", "spec.focal entries must be names or indices");
  }
  if (!out.focal_names.empty() && !spec.focal_indices.empty())
    throw SchemaError(kModule, "parse_config", "spec.focal mixes names and indices");
  if (j.contains("prior")) {
    if (j.contains("mu0") || j.contains("sigma2") || j.contains("n0"))
      throw SchemaError(kModule, "parse_config", "spec.prior excludes mu0/sigma2/n0");
    for (const auto& p : j.at("prior")) {
      const PriorEss ess = conjugate_prior_ess(spec.likelihood, prior_from_json(p));
      spec.mu0.push_back(ess.mu0);
      spec.sigma2.push_back(ess.sigma2);
      spec.n0.push_back(ess.n0);
    }
  } else {
    spec.mu0 = get_as<std::vector<double>>(j, "mu0", "spec");
    spec.sigma2 = get_as<std::vector<double>>(j, "sigma2", "spec");
    spec.n0 = get_as<std::vector<double>>(j, "n0", "spec");
  }
  out.spec = std::move(spec);
}

void parse_input(const json& j, const std::filesystem::path& base, InputSource& in) {
  check_keys(j, "input", {"path", "builtin", "scenario", "exercise", "rows", "seed", "markov", "markov_config"});
  if (j.contains("path")) {
    if (j.contains("builtin"))
      throw SchemaError(kModule, "parse_config", "input takes either 'path' or 'builtin'");
    in.kind = InputSource::Kind::file;
    in.path = resolve(base, get_as<std::string>(j, "path", "input"));
    return;
  }
  const auto builtin = get_as<std::string>(j, "builtin", "input");
  if (builtin == "case1") {
    in.kind = InputSource::Kind::case1;
    in.rows = 100000;
    read_opt(j, "scenario", "input", in.scenario);
    StylizedScenario check(in.scenario);
    (void)check;
  } else if (builtin == "case2") {
    in.kind = InputSource::Kind::case2;
    in.rows = 10000;
    read_opt(j, "exercise", "input", in.exercise);
    if (in.exercise < 1 || in.exercise > 4)
      throw ValidationError(kModule, "parse_config", "input.exercise must be 1..4");
    if (j.contains("markov") && j.contains("markov_config"))
      throw SchemaError(kModule, "parse_config", "input takes either 'markov' or 'markov_config'");
    if (j.contains("markov")) in.markov = markov_config_from_json(j.at("markov"));
    if (j.contains("markov_config"))
      in.markov = load_markov_config(resolve(base, get_as<std::string>(j, "markov_config", "input")));
  } else {
    throw SchemaError(kModule, "parse_config", "unknown builtin '" + builtin + "'");
  }
  read_opt(j, "rows", "input", in.rows);
  read_opt(j, "seed", "input", in.seed);
}

void parse_grid(const json& j, RunConfig& out) {
  check_keys(j, "grid", {"n_min", "n_max", "step", "values"});
  if (j.contains("values")) {
    if (j.contains("n_min") || j.contains("n_max") || j.contains("step"))
      throw SchemaError(kModule, "parse_config", "grid takes either 'values' or a range");
    out.grid = get_as<std::vector<long>>(j, "values", "grid");
    return;
  }
  out.grid = make_grid(get_as<long>(j, "n_min", "grid"), get_as<long>(j, "n_max", "grid"),
                       get_as<long>(j, "step", "grid"));
}

void parse_spline(const json& j, BasisConfig& basis) {
  check_keys(j, "spline", {"degree", "interior_knots", "knot_rule", "ridge"});
  read_opt(j, "degree", "spline", basis.degree);
  read_opt(j, "interior_knots", "spline", basis.interior_knots);
  read_opt(j, "ridge", "spline", basis.ridge);
  if (j.contains("knot_rule")) {
    const auto rule = get_as<std::string>(j, "knot_rule", "spline");
    if (rule == "quantile") basis.knot_rule = KnotRule::quantile;
    else if (rule == "uniform") basis.knot_rule = KnotRule::uniform;
    else throw SchemaError(kModule, "parse_config", "unknown knot_rule '" + rule + "'");
  }
  basis.validate();
}

template <typename T, std::size_t N>
void read_array(const json& j, const char* key, std::array<T, N>& out) {
  if (!j.contains(key)) return;
  const auto values = get_as<std::vector<T>>(j, key, "markov");
  if (values.size() != N)
    throw SchemaError(kModule, "parse_config", std::string("markov.") + key + " needs 3 entries");
  std::copy(values.begin(), values.end(), out.begin());
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string read_file(const std::filesystem::path& path, std::string_view op) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(kModule, op, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, std::string_view op) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(kModule, op, e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  validate_grid(grid);
  if (methods.empty()) throw ValidationError(kModule, "parse_config", "methods must be nonempty");
  std::set<Method> seen(methods.begin(), methods.end());
  if (seen.size() != methods.size())
    throw ValidationError(kModule, "parse_config", "methods must not repeat");
  if (input.kind == InputSource::Kind::file && !spec)
    throw ValidationError(kModule, "parse_config", "file input needs a spec");
  if (input.rows < 2) throw ValidationError(kModule, "parse_config", "input.rows must be >= 2");
  if (nested_outer < 2 || nested_inner < 1)
    throw ValidationError(kModule, "parse_config", "nested_mc needs outer >= 2 and inner >= 1");
  tga.basis.validate();
  input.markov.validate();
}

std::vector<long> make_grid(long n_min, long n_max, long step) {
  if (step <= 0) throw ValidationError(kModule, "make_grid", "step must be > 0");
  if (n_min < 0) throw ValidationError(kModule, "make_grid", "n_min must be >= 0");
  if (n_min > n_max) throw ValidationError(kModule, "make_grid", "n_min must not exceed n_max");
  std::vector<long> grid;
  for (long n = n_min; n <= n_max; n += step) grid.push_back(n);
  return grid;
}

RunConfig parse_config(const json& document, const std::filesystem::path& base_dir) {
  check_keys(document, "config",
             {"input", "spec", "grid", "methods", "seed", "output_dir", "plot", "variance_adjustment",
              "variance_target", "spline", "nested_mc"});
  RunConfig out;
  parse_input(document.at("input"), base_dir, out.input);
  if (document.contains("spec")) parse_spec(document.at("spec"), out);
  if (!document.contains("grid")) throw SchemaError(kModule, "parse_config", "missing 'grid'");
  parse_grid(document.at("grid"), out);
  for (const auto& name : get_as<std::vector<std::string>>(document, "methods", "config"))
    out.methods.push_back(method_from_string(name));
  read_opt(document, "seed", "config", out.seed);
  if (document.contains("output_dir"))
    out.output_dir = resolve(base_dir, get_as<std::string>(document, "output_dir", "config"));
  read_opt(document, "plot", "config", out.plot);
  read_opt(document, "variance_adjustment", "config", out.tga.variance.adjust);
  if (document.contains("variance_target")) {
    const auto t = get_as<std::string>(document, "variance_target", "config");
    if (t == "total_variance") out.tga.variance.target = VarianceTarget::total_variance;
    else if (t == "paper_literal") out.tga.variance.target = VarianceTarget::paper_literal;
    else throw SchemaError(kModule, "parse_config", "unknown variance_target '" + t + "'");
  }
  if (document.contains("spline")) parse_spline(document.at("spline"), out.tga.basis);
  if (document.contains("nested_mc")) {
    const json& nm = document.at("nested_mc");
    check_keys(nm, "nested_mc", {"outer", "inner", "threads"});
    read_opt(nm, "outer", "nested_mc", out.nested_outer);
    read_opt(nm, "inner", "nested_mc", out.nested_inner);
    read_opt(nm, "threads", "nested_mc", out.threads);
  }
  out.validate();
  return out;
}

RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
  return parse_config(parse_json(text, "parse_config"), base_dir);
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config_text(read_file(path, "load_config"), path.parent_path());
}

MarkovModelConfig markov_config_from_json(const json& j) {
  check_keys(j, "markov",
             {"state_labels", "intervention_labels", "state_utility", "state_cost", "treatment_cost",
              "has_visits", "cost_per_visit", "p_death_on_treatment", "p_death_disabled",
              "p_failure_standard", "horizon", "discount_rate", "wtp"});
  MarkovModelConfig c;
  read_array(j, "state_labels", c.state_labels);
  read_array(j, "intervention_labels", c.intervention_labels);
  read_array(j, "state_utility", c.state_utility);
  read_array(j, "state_cost", c.state_cost);
  read_array(j, "treatment_cost", c.treatment_cost);
  read_array(j, "has_visits", c.has_visits);
  read_opt(j, "cost_per_visit", "markov", c.cost_per_visit);
  read_opt(j, "p_death_on_treatment", "markov", c.p_death_on_treatment);
  read_opt(j, "p_death_disabled", "markov", c.p_death_disabled);
  read_opt(j, "p_failure_standard", "markov", c.p_failure_standard);
  read_opt(j, "horizon", "markov", c.horizon);
  read_opt(j, "discount_rate", "markov", c.discount_rate);
  read_opt(j, "wtp", "markov", c.wtp);
  c.validate();
  return c;
}

json markov_config_to_json(const MarkovModelConfig& c) {
  return json{{"state_labels", c.state_labels},
              {"intervention_labels", c.intervention_labels},
              {"state_utility", c.state_utility},
              {"state_cost", c.state_cost},
              {"treatment_cost", c.treatment_cost},
              {"has_visits", c.has_visits},
              {"cost_per_visit", c.cost_per_visit},
              {"p_death_on_treatment", c.p_death_on_treatment},
              {"p_death_disabled", c.p_death_disabled},
              {"p_failure_standard", c.p_failure_standard},
              {"horizon", c.horizon},
              {"discount_rate", c.discount_rate},
              {"wtp", c.wtp}};
}

MarkovModelConfig load_markov_config(const std::filesystem::path& path) {
  return markov_config_from_json(parse_json(read_file(path, "load_markov_config"), "load_markov_config"));
}

AnalysisResult run_analysis(const RunConfig& config, const LogSink& log) {
  constexpr std::string_view op = "run_analysis";
  config.validate();
  const InputSource& in = config.input;

  std::optional<PaDataset> pa;
  std::optional<StylizedScenario> scenario;
  DataCollectionSpec spec;
  switch (in.kind) {
    case InputSource::Kind::file:
      pa = load_pa_dataset(in.path);
      break;
    case InputSource::Kind::case1:
      scenario.emplace(in.scenario);
      pa = generate_case1_pa(*scenario, in.rows, in.seed);
      spec = case1_spec(*scenario);
      break;
    case InputSource::Kind::case2:
      pa = generate_case2_pa(in.markov, in.rows, in.seed);
      spec = case2_spec(in.exercise);
      break;
  }
  if (config.spec) {
    spec = *config.spec;
    if (!config.focal_names.empty()) {
      spec.focal_indices.clear();
      for (const auto& name : config.focal_names) spec.focal_indices.push_back(pa->param_index(name));
    }
  }
  spec.validate(pa->params());

  AnalysisResult result;
  result.evppi = evppi(*pa, spec.focal_indices, config.tga.basis);
  if (log)
    log("evppi=" + format_double(result.evppi.evsi) + " mc_se=" + format_double(result.evppi.mc_se));

  std::optional<GaussianApproximation> ga;
  std::optional<NestedMcProblem> problem;
  for (Method method : config.methods) {
    if ((method == Method::tga || method == Method::ga) && !ga)
      ga.emplace(*pa, spec, config.tga);
    if (method == Method::analytic && !scenario)
      throw ValidationError(kModule, op, "analytic method needs builtin case1 input");
    if (method == Method::nested_mc && !problem) {
      if (in.kind == InputSource::Kind::file)
        throw ValidationError(kModule, op, "nested-mc needs a builtin case-study input");
      problem = scenario ? case1_problem(*scenario) : case2_problem(in.markov);
    }

    EvsiCurve curve{to_string(method), {}, spec.digest()};
    for (long n : config.grid) {
      EvsiEstimate est;
      switch (method) {
        case Method::tga: est = ga->tga(n); break;
        case Method::ga: est = ga->ga(n); break;
        case Method::npreg: est = evsi_nonparametric(*pa, spec, n, config.seed, config.tga.basis); break;
        case Method::analytic: est = analytic_evsi(*pa, scenario->id, spec, n, config.seed); break;
        case Method::nested_mc:
          est = nested_mc_evsi(*problem, spec, n, config.nested_outer, config.nested_inner,
                               derive_seed(config.seed, static_cast<std::uint64_t>(n)), config.threads);
          break;
        case Method::evppi: est = result.evppi; break;
      }
      curve.points.push_back({n, est.evsi, est.mc_se});
      if (log)
        log("[" + curve.method + "] n=" + std::to_string(n) + " evsi=" + format_double(est.evsi) +
            " mc_se=" + format_double(est.mc_se));
    }
    result.curves.push_back(std::move(curve));
  }
  return result;
}

std::string format_curve_csv(const EvsiCurve& curve) {
  std::string out = "method,n,evsi,mc_se\n";
  for (const auto& p : curve.points)
    out += curve.method + "," + std::to_string(p.n) + "," + format_double(p.evsi) + "," +
           format_double(p.mc_se) + "\n";
  return out;
}

std::string format_evppi_csv(const EvsiEstimate& evppi) {
  return "evppi,mc_se\n" + format_double(evppi.evsi) + "," + format_double(evppi.mc_se) + "\n";
}

std::string render_svg(const AnalysisResult& result) {
  constexpr double width = 720, height = 480, left = 70, right = 150, top = 30, bottom = 50;
  double n_lo = 0, n_hi = 1, y_hi = result.evppi.evsi;
  bool first = true;
  for (const auto& c : result.curves)
    for (const auto& p : c.points) {
      if (first) { n_lo = n_hi = static_cast<double>(p.n); first = false; }
      n_lo = std::min(n_lo, static_cast<double>(p.n));
      n_hi = std::max(n_hi, static_cast<double>(p.n));
      y_hi = std::max(y_hi, p.evsi);
    }
  if (n_hi <= n_lo) n_hi = n_lo + 1;
  if (!(y_hi > 0)) y_hi = 1;
  y_hi *= 1.05;
  const double pw = width - left - right, ph = height - top - bottom;
  auto sx = [&](double n) { return left + (n - n_lo) / (n_hi - n_lo) * pw; };
  auto sy = [&](double y) { return top + ph - y / y_hi * ph; };
  static constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double y = y_hi * k / 4.0;
    s << "<text x=\"" << left - 6 << "\" y=\"" << sy(y) + 4 << "\" text-anchor=\"end\">"
      << format_double(std::round(y)) << "</text>\n";
    const double n = n_lo + (n_hi - n_lo) * k / 4.0;
    s << "<text x=\"" << sx(n) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
      << format_double(std::round(n)) << "</text>\n";
  }
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10
    << "\" text-anchor=\"middle\">sample size n</text>\n";
  s << "<text x=\"16\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 16 " << top + ph / 2
    << ")\" text-anchor=\"middle\">EVSI</text>\n";
  s << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << sy(result.evppi.evsi)
    << "\" y2=\"" << sy(result.evppi.evsi) << "\" stroke=\"#000\" stroke-dasharray=\"6 4\"/>\n";
  s << "<text x=\"" << left + pw + 8 << "\" y=\"" << sy(result.evppi.evsi) + 4 << "\">EVPPI</text>\n";
  for (std::size_t c = 0; c < result.curves.size(); ++c) {
    const char* color = colors[c % std::size(colors)];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : result.curves[c].points)
      s << sx(static_cast<double>(p.n)) << "," << sy(p.evsi) << " ";
    s << "\"/>\n";
    s << "<text x=\"" << left + pw + 8 << "\" y=\"" << top + 16 + 16 * static_cast<double>(c)
      << "\" fill=\"" << color << "\">" << result.curves[c].method << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void emit_curves(const AnalysisResult& result, const std::filesystem::path& dir, bool plot) {
  constexpr std::string_view op = "emit_curve";
  if (result.curves.empty()) throw ValidationError(kModule, op, "no curves to write");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(kModule, op, "cannot create " + dir.string() + ": " + ec.message());
  auto write = [&](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(kModule, op, "cannot write " + path.string());
    out << text;
    if (!out) throw IoError(kModule, op, "write failed for " + path.string());
  };
  for (const auto& curve : result.curves) write(dir / ("evsi_" + curve.method + ".csv"), format_curve_csv(curve));
  write(dir / "evppi.csv", format_evppi_csv(result.evppi));
  if (plot) write(dir / "curves.svg", render_svg(result));
}

}  // namespace evsi
