#include "conic_lmcf/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "json.hpp"

#include "conic_lmcf/asymptotics.hpp"
#include "conic_lmcf/cone_catalog.hpp"
#include "conic_lmcf/cone_heat.hpp"
#include "conic_lmcf/errors.hpp"
#include "conic_lmcf/exponent_table.hpp"
#include "conic_lmcf/expression.hpp"
#include "conic_lmcf/link_spectrum.hpp"
#include "conic_lmcf/lmcf_flow.hpp"
#include "conic_lmcf/mesh.hpp"
#include "conic_lmcf/sl_cones.hpp"

#ifndef CONIC_LMCF_VERSION
#define CONIC_LMCF_VERSION "unknown"
#endif

namespace conic_lmcf::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct OptionDef {
  std::string name;
  std::string help;
  bool flag = false;
};

const std::vector<OptionDef> kCommon = {
    {"out", "output directory (default: out)"},
    {"config", "JSON file with option values; command-line flags take precedence"},
    {"seed", "seed for randomized sampling (default: 7)"},
};

const std::vector<OptionDef> kLink = {
    {"link", "sphere | torus | mesh (default: sphere)"},
    {"dim", "sphere dimension (default: 2)"},
    {"metric", "torus metric h11,h12,h22 (default: 1,0,1)"},
    {"mesh", "OFF file for --link mesh"},
    {"cone", "catalog cone whose link is used: hl-torus-3 | plane-3"},
    {"cone-json", "custom cone JSON file whose link is used"},
    {"m", "cone dimension (default: link dimension + 1)"},
    {"lmax", "largest eigenvalue to enumerate"},
};

const std::vector<OptionDef> kHeat = {
    {"m", "cone dimension (default: 3)"},
    {"lambda", "link eigenvalue of the mode (default: 0)"},
    {"R", "outer radius (default: 1)"},
    {"cells", "radial cells (default: 400)"},
    {"grading", "grading exponent q (default: 2)"},
    {"T", "final time (default: 0.1)"},
    {"dt", "time step (default: 1e-3)"},
    {"forcing", "r^a | t*r^a (default: r^0.5)"},
    {"forcing-csv", "tabulated forcing with columns t,r,f"},
    {"inner", "extrapolate | dirichlet-zero (default: extrapolate)"},
    {"every", "write every k-th time level (default: 1)"},
};

const std::vector<OptionDef> kFlow = {
    {"m", "torus dimension (default: 2)"},
    {"N", "grid points per axis (default: 64)"},
    {"init", "initial potential, e.g. 0.1*sin(x1)"},
    {"catalog", "named initial potential (see README)"},
    {"init-csv", "initial potential as CSV with columns node,u"},
    {"T", "final time"},
    {"dt", "time step (default: 0.25 dx^2)"},
};

std::vector<OptionDef> join(std::initializer_list<std::vector<OptionDef>> parts) {
  std::vector<OptionDef> all;
  for (const auto& p : parts)
    for (const auto& d : p)
      if (std::none_of(all.begin(), all.end(), [&](const OptionDef& o) { return o.name == d.name; }))
        all.push_back(d);
  return all;
}

struct Command {
  std::string name;
  std::string help;
  std::vector<OptionDef> options;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> list = {
      {"spectrum", "link Laplacian eigenvalues with multiplicities", join({kLink})},
      {"exponents", "exceptional exponents and counting functions",
       join({kLink,
             {{"window-lo", "exponent window lower end (default: -3)"},
              {"window-hi", "exponent window upper end (default: 3)"},
              {"delta", "weights at which to report M, N (comma separated)"}}})},
      {"stability", "stability index of a special Lagrangian cone",
       {{"cone", "catalog cone (default: hl-torus-3)"}, {"cone-json", "custom cone JSON file"}}},
      {"fredholm", "Fredholm index of the Laplacian on weighted spaces",
       join({kLink,
             {{"gamma", "weights, one per conical point (comma separated)"},
              {"asymptotics", "index on spaces with discrete asymptotics", true}}})},
      {"heat", "heat equation on one link mode of the cone", join({kHeat})},
      {"asymptotics", "discrete asymptotics of a heat solve",
       join({kHeat,
             {{"gamma", "weight"},
              {"window-outer", "fit window outer end as a fraction of R (default: 0.1)"},
              {"window-decades", "fit window width in decades (default: 2)"},
              {"all-times", "fit every written time level, not only the last", true}},
             kLink})},
      {"flow", "Lagrangian mean curvature flow of a graph over the flat torus",
       join({kFlow, {{"snapshots", "extra output times (comma separated)"}}})},
      {"defect", "nonlinear flow versus heat flow for scaled initial data",
       join({kFlow, {{"eps", "amplitudes, strictly decreasing (default: 0.1,0.05,0.025)"}}})},
  };
  return list;
}

// Option values after merging flags over the config file; every lookup is
// recorded so the report lists the resolved inputs.
class Params {
 public:
  std::map<std::string, std::string> values;
  json inputs = json::object();

  bool has(const std::string& key) const { return values.count(key) > 0; }

  std::string text(const std::string& key, const std::string& fallback) {
    const std::string v = has(key) ? values.at(key) : fallback;
    inputs[key] = v;
    return v;
  }
  std::string required_text(const std::string& key) {
    if (!has(key)) throw InvalidInput("missing required option --" + key);
    return text(key, "");
  }
  double real(const std::string& key, double fallback) {
    const double v = has(key) ? parse_real(key, values.at(key)) : fallback;
    inputs[key] = v;
    return v;
  }
  double required_real(const std::string& key) {
    if (!has(key)) throw InvalidInput("missing required option --" + key);
    return real(key, 0.0);
  }
  long integer(const std::string& key, long fallback) {
    long v = fallback;
    if (has(key)) {
      const double d = parse_real(key, values.at(key));
      if (d != std::floor(d) || std::abs(d) > 1e15) throw InvalidInput("--" + key + " must be an integer");
      v = static_cast<long>(d);
    }
    inputs[key] = v;
    return v;
  }
  std::vector<double> reals(const std::string& key, std::vector<double> fallback) {
    std::vector<double> v = std::move(fallback);
    if (has(key)) {
      v.clear();
      std::stringstream ss(values.at(key));
      std::string item;
      while (std::getline(ss, item, ',')) v.push_back(parse_real(key, item));
      if (v.empty()) throw InvalidInput("--" + key + " needs at least one value");
    }
    inputs[key] = v;
    return v;
  }
  bool flag(const std::string& key) {
    bool v = false;
    if (has(key)) {
      const auto& s = values.at(key);
      if (s == "true" || s == "1") v = true;
      else if (s == "false" || s == "0") v = false;
      else throw InvalidInput("--" + key + " is a flag (true/false)");
    }
    inputs[key] = v;
    return v;
  }

 private:
  static double parse_real(const std::string& key, const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw InvalidInput("--" + key + ": '" + s + "' is not a number");
    }
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
    if (used != s.size()) throw InvalidInput("--" + key + ": '" + s + "' is not a number");
    if (!std::isfinite(v)) throw InvalidInput("--" + key + " must be finite");
    return v;
  }
};

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

class Output {
 public:
  explicit Output(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw InvalidInput("cannot create output directory " + dir_.string() + ": " + ec.message());
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw InvalidInput("cannot write " + (dir_ / name).string());
    f << content;
    artifacts_.push_back(name);
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }
  const std::vector<std::string>& artifacts() const { return artifacts_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> artifacts_;
};

json load_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidInput("cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

// ---- links and tables ------------------------------------------------------

struct ResolvedLink {
  LinkSpec link;
  int m = 3;
  std::string description;
};

std::optional<SLCone> resolve_cone(Params& p, const std::string& fallback) {
  if (p.has("cone-json")) return cone_from_json(load_json_file(p.text("cone-json", "")));
  if (p.has("cone") || !fallback.empty()) return make_catalog_cone(p.text("cone", fallback));
  return std::nullopt;
}

ResolvedLink resolve_link(Params& p) {
  if (auto cone = resolve_cone(p, "")) {
    if (p.has("m") && p.integer("m", cone->m) != cone->m) throw InvalidInput("--m disagrees with the cone dimension");
    return {cone->link, cone->m, "cone " + cone->name};
  }
  ResolvedLink out;
  const std::string kind = p.text("link", "sphere");
  if (kind == "sphere") {
    out.link = RoundSphere{static_cast<int>(p.integer("dim", 2))};
  } else if (kind == "torus") {
    const auto h = p.reals("metric", {1.0, 0.0, 1.0});
    if (h.size() != 3) throw InvalidInput("--metric takes h11,h12,h22");
    Eigen::MatrixXd metric(2, 2);
    metric << h[0], h[1], h[1], h[2];
    out.link = FlatTorus{metric};
  } else if (kind == "mesh") {
    out.link = read_off(p.required_text("mesh"));
  } else {
    throw InvalidInput("--link must be sphere, torus or mesh");
  }
  validate_link(out.link);
  out.m = static_cast<int>(p.integer("m", link_dimension(out.link) + 1));
  if (out.m != link_dimension(out.link) + 1) throw InvalidInput("--m must equal the link dimension + 1");
  out.description = kind;
  return out;
}

// eigenvalue bound that makes the exponent window [lo, hi] complete
double lambda_for_window(double lo, double hi, int m) {
  return std::max({0.0, hi * (hi + m - 2.0), lo * (lo + m - 2.0)}) + 1e-6;
}

json spectrum_json(const Spectrum& s) {
  json entries = json::array();
  for (const auto& e : s.entries)
    entries.push_back({{"lambda", e.lambda}, {"multiplicity", e.multiplicity}, {"basis", e.basis_tag}});
  return {{"entries", entries}, {"lambda_max", s.lambda_max}, {"discrete", s.discrete}};
}

json table_json(const ExponentTable& t) {
  json entries = json::array();
  for (const auto& e : t.entries())
    entries.push_back({{"alpha", e.alpha}, {"multiplicity", e.multiplicity}, {"lambda", e.lambda}});
  return {{"m", t.m()},
          {"window", {{"lo", t.window().lo}, {"hi", t.window().hi}}},
          {"tolerance", t.tolerance()},
          {"entries", entries}};
}

// ---- commands ----------------------------------------------------------------

json cmd_spectrum(Params& p, Output& o, std::ostream& out) {
  const auto link = resolve_link(p);
  const double lmax = p.real("lmax", 20.0);
  const Spectrum s = eigenvalues(link.link, lmax);
  std::string csv = "lambda,multiplicity,alpha_plus,alpha_minus\n";
  for (const auto& e : s.entries) {
    const auto [plus, minus] = exponent_roots(e.lambda, link.m);
    csv += num(e.lambda) + "," + std::to_string(e.multiplicity) + "," + num(plus) + "," + num(minus) + "\n";
  }
  o.write("spectrum.csv", csv);
  o.write_json("spectrum.json", spectrum_json(s));
  out << csv;
  return {{"eigenvalues", s.entries.size()}, {"link", link.description}};
}

json cmd_exponents(Params& p, Output& o, std::ostream& out) {
  const auto link = resolve_link(p);
  const double lo = p.real("window-lo", -3.0), hi = p.real("window-hi", 3.0);
  const double lmax = p.real("lmax", lambda_for_window(lo, hi, link.m));
  const ExponentTable t = exponents(eigenvalues(link.link, lmax), link.m, {lo, hi});
  std::string csv = "alpha,multiplicity,lambda\n";
  for (const auto& e : t.entries()) csv += num(e.alpha) + "," + std::to_string(e.multiplicity) + "," + num(e.lambda) + "\n";
  json j = table_json(t);
  json counts = json::array();
  for (double d : p.reals("delta", {})) {
    const json c = {{"delta", d}, {"M", t.count_M(d)}, {"N", t.count_N(d)}, {"exceptional", t.in_D(d)}};
    counts.push_back(c);
    out << "delta " << num(d) << ": M = " << c["M"] << ", N = " << c["N"] << "\n";
  }
  j["counts"] = counts;
  o.write("exponents.csv", csv);
  o.write_json("exponents.json", j);
  out << csv;
  return {{"exponents", t.entries().size()}, {"window", j["window"]}, {"counts", counts}};
}

json cmd_stability(Params& p, Output& o, std::ostream& out, std::uint64_t seed) {
  const SLCone cone = *resolve_cone(p, "hl-torus-3");
  const double lmax = lambda_for_window(0.0, 2.5, cone.m);
  const ExponentTable t = exponents(eigenvalues(cone.link, lmax), cone.m, {-0.5, 2.5});
  const StabilityReport r = stability_index(cone, t, seed);
  json counts = json::array();
  out << "index " << r.index << "\nharmonic counts:";
  for (const auto& [order, mult] : r.harmonic_counts) {
    counts.push_back({{"order", order}, {"multiplicity", mult}});
    out << " " << mult << " (order " << num(order) << ")";
  }
  out << "\nmoment-map ranks: translations " << r.translation_rank << " (bound " << r.translation_bound << "), su "
      << r.su_rank << " (bound " << r.su_bound << ")\n";
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
  const json j = {{"cone", cone.name},       {"index", r.index},
                  {"closed_count", r.closed_count},
                  {"harmonic_counts", counts},
                  {"translation_rank", r.translation_rank},
                  {"translation_bound", r.translation_bound},
                  {"su_rank", r.su_rank},
                  {"su_bound", r.su_bound},
                  {"dim_G", cone.dim_G},
                  {"degenerate", r.degenerate},
                  {"warnings", r.warnings}};
  o.write_json("stability.json", j);
  return j;
}

json cmd_fredholm(Params& p, Output& o, std::ostream& out) {
  const auto link = resolve_link(p);
  const auto gammas = p.reals("gamma", {});
  if (gammas.empty()) throw InvalidInput("missing required option --gamma");
  const bool with_asymptotics = p.flag("asymptotics");
  const double lo = std::min(0.0, *std::min_element(gammas.begin(), gammas.end())) - 0.5;
  const double hi = std::max(0.0, *std::max_element(gammas.begin(), gammas.end())) + 0.5;
  const double lmax = p.real("lmax", lambda_for_window(lo, hi, link.m));
  const ExponentTable t = exponents(eigenvalues(link.link, lmax), link.m, {lo, hi});
  const std::vector<ExponentTable> tables(gammas.size(), t);
  const WeightVector w{gammas};
  const int index = with_asymptotics ? fredholm_index_with_asymptotics(tables, w) : fredholm_index(tables, w);
  out << index << "\n";
  const json j = {{"index", index}, {"gamma", gammas}, {"with_asymptotics", with_asymptotics}};
  o.write_json("fredholm.json", j);
  return j;
}

// bilinear interpolation on a tensor table, clamped at the edges
class TabulatedForcing {
 public:
  explicit TabulatedForcing(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InvalidInput("cannot open " + path);
    std::string line;
    std::getline(f, line);
    std::map<std::pair<double, double>, double> cells;
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      double v[3];
      std::string item;
      for (double& x : v) {
        if (!std::getline(ss, item, ',')) throw InvalidInput(path + ": rows need t,r,f");
        try {
          x = std::stod(item);
        } catch (const std::exception&) {
          throw InvalidInput(path + ": bad number '" + item + "'");
        }
      }
      cells[{v[0], v[1]}] = v[2];
      t_.push_back(v[0]);
      r_.push_back(v[1]);
    }
    auto uniq = [](std::vector<double>& a) {
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
    };
    uniq(t_);
    uniq(r_);
    if (t_.empty() || r_.size() < 2) throw InvalidInput(path + ": forcing table needs at least two radii");
    if (cells.size() != t_.size() * r_.size()) throw InvalidInput(path + ": forcing table must be a full t x r grid");
    values_.resize(t_.size() * r_.size());
    for (std::size_t i = 0; i < t_.size(); ++i)
      for (std::size_t j = 0; j < r_.size(); ++j) values_[i * r_.size() + j] = cells.at({t_[i], r_[j]});
  }

  double operator()(double t, double r) const {
    auto locate = [](const std::vector<double>& a, double x, std::size_t& i, double& w) {
      if (a.size() == 1 || x <= a.front()) {
        i = 0;
        w = 0.0;
        return;
      }
      if (x >= a.back()) {
        i = a.size() - 2;
        w = 1.0;
        return;
      }
      i = static_cast<std::size_t>(std::upper_bound(a.begin(), a.end(), x) - a.begin()) - 1;
      w = (x - a[i]) / (a[i + 1] - a[i]);
    };
    std::size_t i = 0, j = 0;
    double wt = 0.0, wr = 0.0;
    locate(t_, t, i, wt);
    locate(r_, r, j, wr);
    const std::size_t n = r_.size();
    auto at = [&](std::size_t a, std::size_t b) { return values_[std::min(a, t_.size() - 1) * n + b]; };
    const double lo = (1 - wr) * at(i, j) + wr * at(i, j + 1);
    const double hi = (1 - wr) * at(i + 1, j) + wr * at(i + 1, j + 1);
    return (1 - wt) * lo + wt * hi;
  }

 private:
  std::vector<double> t_, r_, values_;
};

Forcing parse_forcing(Params& p) {
  if (p.has("forcing-csv")) {
    auto table = std::make_shared<TabulatedForcing>(p.text("forcing-csv", ""));
    return [table](double t, double r) { return (*table)(t, r); };
  }
  const std::string s = p.text("forcing", "r^0.5");
  std::string rest = s;
  bool times_t = false;
  if (rest.rfind("t*", 0) == 0) {
    times_t = true;
    rest = rest.substr(2);
  }
  if (rest.rfind("r^", 0) != 0) throw InvalidInput("--forcing must be r^a or t*r^a");
  double a = 0.0;
  try {
    std::size_t used = 0;
    a = std::stod(rest.substr(2), &used);
    if (used != rest.size() - 2) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw InvalidInput("--forcing: bad exponent in '" + s + "'");
  }
  if (times_t) return [a](double t, double r) { return t * std::pow(r, a); };
  return [a](double, double r) { return std::pow(r, a); };
}

struct HeatRun {
  ModeSolution solution;
  std::vector<std::size_t> rows;  // time levels written
};

HeatRun heat_solve(Params& p) {
  LaplaceTypeSpec spec;
  spec.m = static_cast<int>(p.integer("m", 3));
  spec.lambda = p.real("lambda", 0.0);
  const double R = p.real("R", 1.0);
  const RadialGrid grid(R, static_cast<int>(p.integer("cells", 400)), p.real("grading", 2.0));
  const double T = p.real("T", 0.1), dt = p.real("dt", 1e-3);
  const Forcing f = parse_forcing(p);
  SolveOptions options;
  const std::string inner = p.text("inner", "extrapolate");
  if (inner == "extrapolate") options.inner = InnerBoundary::Extrapolate;
  else if (inner == "dirichlet-zero") options.inner = InnerBoundary::DirichletZero;
  else throw InvalidInput("--inner must be extrapolate or dirichlet-zero");
  const long every = p.integer("every", 1);
  if (every < 1) throw InvalidInput("--every must be >= 1");
  HeatRun run{solve_mode(spec, grid, T, dt, f, options), {}};
  const std::size_t levels = run.solution.times.size();
  for (std::size_t i = 0; i < levels; i += static_cast<std::size_t>(every)) run.rows.push_back(i);
  if (run.rows.back() != levels - 1) run.rows.push_back(levels - 1);
  return run;
}

json cmd_heat(Params& p, Output& o, std::ostream& out) {
  const HeatRun run = heat_solve(p);
  const auto& sol = run.solution;
  const auto& nodes = sol.grid.nodes();
  std::string csv = "t,r,u\n";
  for (std::size_t i : run.rows)
    for (std::size_t j = 0; j < nodes.size(); ++j)
      csv += num(sol.times[i]) + "," + num(nodes[j]) + "," +
             num(sol.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) + "\n";
  o.write("heat.csv", csv);
  const double sup = sol.values.row(sol.values.rows() - 1).cwiseAbs().maxCoeff();
  out << "steps " << sol.times.size() - 1 << ", sup|u(T)| = " << num(sup) << "\n";
  return {{"steps", sol.times.size() - 1}, {"sup_u_final", sup}, {"nodes", nodes.size()}};
}

json expansion_json(const AsymptoticExpansion& e) {
  json terms = json::array();
  for (const auto& t : e.terms) terms.push_back({{"alpha", t.alpha}, {"k", t.k}, {"coefficient", t.coefficient}});
  return {{"time", e.time},
          {"terms", terms},
          {"remainder_rate", finite_or_null(e.remainder_rate)},
          {"remainder_rate_error", e.remainder_rate_error},
          {"remainder_level", e.remainder_level},
          {"warnings", e.warnings}};
}

json cmd_asymptotics(Params& p, Output& o, std::ostream& out) {
  const double gamma = p.required_real("gamma");
  FitOptions fit;
  fit.window_outer = p.real("window-outer", 0.1);
  fit.window_decades = p.real("window-decades", 2.0);
  const bool all_times = p.flag("all-times");
  const HeatRun run = heat_solve(p);
  const auto& sol = run.solution;
  std::optional<ExponentTable> table;
  const bool link_given = p.has("link") || p.has("cone") || p.has("cone-json");
  if (link_given) {
    const auto link = resolve_link(p);
    if (link.m != sol.m) throw InvalidInput("link dimension does not match --m");
    const double hi = gamma + 0.5;
    table = exponents(eigenvalues(link.link, p.real("lmax", lambda_for_window(-0.5, hi, link.m))), link.m, {-0.5, hi});
  } else {
    // exponents of the solved mode alone
    Spectrum s;
    s.entries.push_back({sol.lambda, 1, "mode"});
    s.lambda_max = std::max(sol.lambda, lambda_for_window(-0.5, gamma + 0.5, sol.m));
    table = exponents(s, sol.m, {-0.5, gamma + 0.5});
  }
  json list = json::array();
  const auto& nodes = sol.grid.nodes();
  std::vector<double> row(nodes.size());
  AsymptoticExpansion last;
  for (std::size_t i : run.rows) {
    if (sol.times[i] <= 0.0) continue;
    if (!all_times && i != run.rows.back()) continue;
    for (std::size_t j = 0; j < nodes.size(); ++j)
      row[j] = sol.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    last = fit_expansion(nodes, row, sol.lambda, *table, gamma, sol.grid.R(), fit);
    last.time = sol.times[i];
    list.push_back(expansion_json(last));
  }
  o.write_json("asymptotics.json", list);
  out << "t = " << num(last.time) << ":";
  for (const auto& t : last.terms) out << " " << num(t.coefficient) << " r^" << num(t.exponent());
  out << ", remainder rate " << num(last.remainder_rate) << "\n";
  for (const auto& w : last.warnings) out << "warning: " << w << "\n";
  return {{"final", list.empty() ? json(nullptr) : list.back()}, {"fits", list.size()}};
}

struct FlowSetup {
  PeriodicGrid grid;
  Eigen::VectorXd u0;
};

FlowSetup flow_setup(Params& p) {
  const PeriodicGrid grid(static_cast<int>(p.integer("m", 2)), static_cast<int>(p.integer("N", 64)));
  const int sources = static_cast<int>(p.has("init")) + static_cast<int>(p.has("catalog")) +
                      static_cast<int>(p.has("init-csv"));
  if (sources > 1) throw InvalidInput("give only one of --init, --catalog, --init-csv");
  if (p.has("init-csv")) {
    const std::string path = p.text("init-csv", "");
    std::ifstream f(path);
    if (!f) throw InvalidInput("cannot open " + path);
    Eigen::VectorXd u = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid.size()), std::nan(""));
    std::string line;
    std::getline(f, line);
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw InvalidInput(path + ": rows need node,u");
      try {
        const long node = std::stol(line.substr(0, comma));
        if (node < 0 || static_cast<std::size_t>(node) >= grid.size()) throw InvalidInput(path + ": node out of range");
        u[node] = std::stod(line.substr(comma + 1));
      } catch (const std::logic_error&) {
        throw InvalidInput(path + ": bad row '" + line + "'");
      }
    }
    if (!u.allFinite()) throw InvalidInput(path + ": every grid node needs a value");
    return {grid, u};
  }
  std::string text;
  if (p.has("catalog")) {
    const std::string name = p.text("catalog", "");
    for (const auto& c : flow_catalog())
      if (c.name == name) text = c.expression;
    if (text.empty()) throw InvalidInput("unknown catalog initial condition '" + name + "'");
  } else {
    text = p.text("init", "0.1*(sin(x1) + cos(2*x2))");
  }
  const Expression e(text);
  if (e.dimension() > grid.m()) throw InvalidInput("initial potential uses more coordinates than --m");
  return {grid, grid.sample([&](const std::vector<double>& x) { return e(x); })};
}

json cmd_flow(Params& p, Output& o, std::ostream& out) {
  const FlowSetup setup = flow_setup(p);
  FlowOptions options;
  options.dt = p.real("dt", 0.0);
  if (options.dt < 0.0) throw InvalidInput("--dt must be positive");
  const double T = p.real("T", 0.1);
  options.snapshot_times = p.reals("snapshots", {});
  const FlowRun run = run_flow(make_state(setup.grid, setup.u0), T, options);
  std::string csv = "t,node,u,theta\n";
  auto dump = [&](const FlowState& s) {
    for (std::size_t i = 0; i < s.grid.size(); ++i)
      csv += num(s.t) + "," + std::to_string(i) + "," + num(s.u[static_cast<Eigen::Index>(i)]) + "," +
             num(s.theta[static_cast<Eigen::Index>(i)]) + "\n";
  };
  dump(make_state(setup.grid, setup.u0));
  for (const auto& s : run.snapshots) dump(s);
  dump(run.final_state);
  o.write("flow.csv", csv);
  json series = json::array();
  for (const auto& s : run.series) series.push_back({{"t", s.t}, {"sup_theta", s.sup_theta}, {"amplitude", s.amplitude}});
  const json summary = {{"series", series},
                        {"accepted_steps", run.accepted},
                        {"rejected_steps", run.rejected},
                        {"final_time", run.final_state.t}};
  o.write_json("flow_summary.json", summary);
  out << "accepted " << run.accepted << " steps (" << run.rejected << " rejected), sup|theta| "
      << num(run.series.front().sup_theta) << " -> " << num(run.series.back().sup_theta) << "\n";
  return {{"accepted_steps", run.accepted},
          {"rejected_steps", run.rejected},
          {"sup_theta_initial", run.series.front().sup_theta},
          {"sup_theta_final", run.series.back().sup_theta}};
}

json cmd_defect(Params& p, Output& o, std::ostream& out) {
  const FlowSetup setup = flow_setup(p);
  const auto eps = p.reals("eps", {0.1, 0.05, 0.025});
  const double T = p.real("T", 0.5);
  const double dt = p.real("dt", 0.0);
  if (dt < 0.0) throw InvalidInput("--dt must be positive");
  const DefectReport r = linearization_defect(setup.grid, setup.u0, eps, T, dt);
  const json j = {{"epsilons", r.epsilons}, {"defects", r.defects}, {"ratios", r.ratios}};
  o.write_json("defect.json", j);
  for (std::size_t i = 0; i < r.defects.size(); ++i) out << "eps " << num(r.epsilons[i]) << ": defect " << num(r.defects[i]) << "\n";
  for (double x : r.ratios) out << "ratio " << num(x) << "\n";
  return j;
}

std::string config_value(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  if (v.is_array()) {
    std::string s;
    for (const auto& x : v) {
      if (!x.is_number()) throw InvalidInput("config arrays must hold numbers");
      s += (s.empty() ? "" : ",") + x.dump();
    }
    return s;
  }
  throw InvalidInput("config values must be strings, numbers, booleans or number arrays");
}

json versions() {
  return {{"conic_lmcf", CONIC_LMCF_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"cli11", CLI11_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"compiler", __VERSION__}};
}

}  // namespace

std::string usage() {
  std::ostringstream s;
  s << "usage: conic-lmcf <subcommand> [options]\n\nsubcommands:\n";
  for (const auto& c : commands()) {
    s << "  " << c.name;
    for (std::size_t k = c.name.size(); k < 13; ++k) s << ' ';
    s << c.help << "\n";
  }
  s << "\ncommon options: --out DIR, --config FILE, --seed N\n"
       "run 'conic-lmcf <subcommand> --help' for the options of one subcommand\n";
  return s.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  CLI::App app{"conic-lmcf", "conic-lmcf"};
  app.require_subcommand(1, 1);
  app.set_help_flag("-h,--help");
  Params params;
  std::map<std::string, std::map<std::string, CLI::Option*>> registered;
  std::map<std::string, std::map<std::string, std::string>> storage;
  std::map<std::string, std::map<std::string, bool>> flag_storage;
  for (const auto& c : commands()) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    for (const auto& d : join({kCommon, c.options})) {
      if (d.flag)
        registered[c.name][d.name] = sub->add_flag("--" + d.name, flag_storage[c.name][d.name], d.help);
      else
        registered[c.name][d.name] = sub->add_option("--" + d.name, storage[c.name][d.name], d.help);
    }
  }

  if (!args.empty() && !args[0].empty() && args[0][0] != '-' &&
      std::none_of(commands().begin(), commands().end(), [&](const Command& c) { return c.name == args[0]; })) {
    err << "error: unknown subcommand '" << args[0] << "'\n\n" << usage();
    return kExitInvalid;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? usage() : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << usage();
    return kExitInvalid;
  }
  const std::string name = app.get_subcommands().front()->get_name();

  json report;
  try {
    for (const auto& [key, opt] : registered[name]) {
      if (opt->count() == 0) continue;
      params.values[key] = opt->get_expected_max() == 0 ? (flag_storage[name][key] ? "true" : "false")
                                                           : storage[name][key];
    }
    if (params.has("config")) {
      const json cfg = load_json_file(params.text("config", ""));
      if (!cfg.is_object()) throw InvalidInput("config file must hold a JSON object");
      for (const auto& [key, value] : cfg.items()) {
        if (!registered[name].count(key) || key == "config")
          throw InvalidInput("config key '" + key + "' is not an option of " + name);
        if (!params.has(key)) params.values[key] = config_value(value);
      }
    }
    const long seed = params.integer("seed", 7);
    if (seed < 0) throw InvalidInput("--seed must be non-negative");
    Output output(params.text("out", "out"));

    json outputs;
    if (name == "spectrum") outputs = cmd_spectrum(params, output, out);
    else if (name == "exponents") outputs = cmd_exponents(params, output, out);
    else if (name == "stability") outputs = cmd_stability(params, output, out, static_cast<std::uint64_t>(seed));
    else if (name == "fredholm") outputs = cmd_fredholm(params, output, out);
    else if (name == "heat") outputs = cmd_heat(params, output, out);
    else if (name == "asymptotics") outputs = cmd_asymptotics(params, output, out);
    else if (name == "flow") outputs = cmd_flow(params, output, out);
    else outputs = cmd_defect(params, output, out);

    for (const auto& [key, value] : params.values)
      if (!params.inputs.contains(key)) params.inputs[key] = value;
    auto artifacts = output.artifacts();
    artifacts.push_back("report.json");
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report = {{"command", name},       {"inputs", params.inputs}, {"outputs", outputs},
              {"artifacts", artifacts}, {"versions", versions()}, {"wall_time_seconds", wall}};
    output.write_json("report.json", report);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace conic_lmcf::cli
