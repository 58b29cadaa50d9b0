// wedgewalk: command-line front end for the experiments.
//
// Exit codes: 0 all checks pass, 1 a check failed (or a run error), 2 usage.
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wedgewalk/analytics.hpp"
#include "wedgewalk/errors.hpp"
#include "wedgewalk/gof.hpp"
#include "wedgewalk/green.hpp"
#include "wedgewalk/intertwining.hpp"
#include "wedgewalk/simulation.hpp"

using namespace wedgewalk;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kPass = 0;
constexpr int kCheckFail = 1;
constexpr int kUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One run: config, checks and data tables, rendered as JSON or CSV.
struct Report {
  std::string command;
  Json config = Json::object();
  Json checks = Json::array();
  Json summary = Json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;

  void check(const std::string& name, double value, double tolerance, bool pass, const std::string& relation = "<=") {
    checks.push_back({{"name", name}, {"value", value}, {"relation", relation}, {"tolerance", tolerance}, {"pass", pass}});
  }
  void check_exact(const std::string& name, const std::string& value, bool pass) {
    checks.push_back({{"name", name}, {"value", value}, {"relation", "=="}, {"tolerance", "0"}, {"pass", pass}});
  }

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Json& c) { return c["pass"].get<bool>(); });
  }

  Json to_json() const {
    Json table = Json::array();
    for (const auto& r : rows) {
      Json row = Json::object();
      for (std::size_t i = 0; i < columns.size(); ++i) row[columns[i]] = r[i];
      table.push_back(row);
    }
    return {{"command", command},
            {"version", WEDGEWALK_VERSION},
            {"config", config},
            {"pass", pass()},
            {"checks", checks},
            {"summary", summary},
            {"table", table}};
  }

  std::string to_csv() const {
    std::ostringstream os;
    // Self-describing header: everything except the table rides along as comments.
    os << "# command: " << command << "\n# version: " << WEDGEWALK_VERSION << "\n# config: " << config.dump()
       << "\n# pass: " << (pass() ? "true" : "false") << "\n# checks: " << checks.dump()
       << "\n# summary: " << summary.dump() << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        os << (i ? "," : "");
        if (r[i].is_string()) {
          os << r[i].get<std::string>();
        } else if (r[i].is_null()) {
          os << "";
        } else {
          os << r[i].dump();
        }
      }
      os << "\n";
    }
    return os.str();
  }
};

Json maybe(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Angle parse_angle(const std::string& text) {
  try {
    return Angle::parse(text);
  } catch (const Error& e) {
    throw UsageError(std::string("--alpha: ") + e.what());
  }
}

// "x^2", "x^1.5", "x", "linear:0.5", "power:2".
ShapeFunction parse_shape(const std::string& text) {
  try {
    if (text == "x") return ShapeFunction::linear(1.0);
    if (text.rfind("x^", 0) == 0) return ShapeFunction::power(std::stod(text.substr(2)));
    if (text.rfind("power:", 0) == 0) return ShapeFunction::power(std::stod(text.substr(6)));
    if (text.rfind("linear:", 0) == 0) return ShapeFunction::linear(std::stod(text.substr(7)));
  } catch (const std::invalid_argument&) {
  } catch (const std::out_of_range&) {
  }
  throw UsageError("--shape: expected x, x^<b>, power:<b> or linear:<c>, got '" + text + "'");
}

double shape_exponent(const std::string& text) {
  if (text == "x" || text.rfind("linear:", 0) == 0) return 1.0;
  if (text.rfind("x^", 0) == 0) return std::stod(text.substr(2));
  return std::stod(text.substr(6));
}

struct Common {
  std::string format = "json";
  std::string output;
  unsigned workers = 0;
};

unsigned resolve_workers(unsigned requested) {
  return requested ? requested : std::max(1u, std::thread::hardware_concurrency());
}

// ---- verify-intertwining ----------------------------------------------------

struct VerifyArgs {
  std::string geometry = "wedge";
  std::string alpha = "pi/4";
  int layers = 50;
  std::string mode = "float";
  std::string shape = "x^2";
  int resolution = 32;
  std::vector<double> times{0.1, 1.0};
  double tolerance = 1e-12;
  double semigroup_tolerance = 1e-10;
};

Report verify_intertwining(const VerifyArgs& a) {
  Report r;
  r.command = "verify-intertwining";
  r.config = {{"geometry", a.geometry}, {"mode", a.mode}, {"layers", a.layers}, {"tolerance", a.tolerance}};
  r.columns = {"identity", "mode", "states", "residual"};
  if (a.geometry == "wedge") {
    const Angle alpha = parse_angle(a.alpha);
    r.config["alpha"] = alpha.label();
    const auto spec = WedgeSpec::make(alpha, a.layers);
    const auto lattice = build_wedge_lattice(spec);
    const auto link = build_link(lattice);
    if (a.mode == "rational") {
      if (!alpha.sin2) throw UsageError("rational mode needs --alpha pi/6, pi/4 or pi/3");
      const Rational res = intertwining_residual(link, wedge_kernel<Rational>(lattice, a.layers),
                                                 projected_wedge_chain<Rational>(spec));
      r.check_exact("Lambda P - Q Lambda", res.str(), res == 0);
      r.rows.push_back({"Lambda P - Q Lambda", "rational", lattice.size(), res.str()});
    } else {
      const double res =
          intertwining_residual(link, wedge_kernel<double>(lattice, a.layers), projected_wedge_chain<double>(spec));
      r.check("Lambda P - Q Lambda", res, a.tolerance, res <= a.tolerance);
      r.rows.push_back({"Lambda P - Q Lambda", "float", lattice.size(), res});
    }
    return r;
  }
  if (a.mode == "rational") throw UsageError("vase rates are irrational; use --mode float");
  const auto shape = parse_shape(a.shape);
  r.config["shape"] = a.shape;
  r.config["resolution"] = a.resolution;
  r.config["times"] = a.times;
  r.config["semigroup_tolerance"] = a.semigroup_tolerance;
  const auto grid = build_vase_grid(shape, a.resolution, a.layers);
  const auto link = build_link(grid);
  const auto two = vase_rate_matrix(grid);
  const auto one = projected_vase_rates(grid);
  const double gen = intertwining_residual(link, two, one);
  r.check("Lambda Q - Q~ Lambda", gen, a.tolerance, gen <= a.tolerance);
  r.rows.push_back({"Lambda Q - Q~ Lambda", "float", grid.size(), gen});
  for (double t : a.times) {
    const double s = semigroup_residual(link, two, one, t);
    const std::string name = "Lambda P_t - P~_t Lambda, t=" + Json(t).dump();
    r.check(name, s, a.semigroup_tolerance, s <= a.semigroup_tolerance);
    r.rows.push_back({name, "float", grid.size(), s});
  }
  const double lumped = lumped_residual(link, two.matrix(), one.matrix());
  r.summary["lumped_residual"] = lumped;
  r.rows.push_back({"lumped rates", "float", grid.size(), lumped});
  return r;
}

// ---- simulate-wedge / simulate-vase ----------------------------------------

struct SimArgs {
  std::string alpha = "pi/6";
  std::string shape = "x^2";
  int stop_layer = 30;
  int resolution = 0;  // vase only; defaults to the stop layer
  std::size_t paths = 100000;
  std::uint64_t seed = 1;
  int bins = 20;
  std::uint64_t step_cap = 100'000'000;
  double level = 0.001;
};

void exit_report(Report& r, const std::vector<PathRecord>& records, const SiteSpace& space, int layer,
                 const RunOptions& opts, double level) {
  const auto dist = exit_distribution(records, space, layer, opts);
  const auto chi = chi_square_uniform(dist.counts);
  r.check("uniform exit chi-square p-value", chi.p_value, level, chi.p_value > level, ">");
  r.summary["exit_chi_square"] = {{"statistic", chi.statistic}, {"dof", chi.dof}, {"p_value", chi.p_value},
                                  {"merged_bins", chi.merged_bins}};
  r.summary["exit_counts"] = dist.counts;
  std::uint64_t steps = 0;
  for (const auto& rec : records) steps += rec.steps;
  r.summary["mean_steps"] = static_cast<double>(steps) / static_cast<double>(records.size());
}

Report simulate_wedge(const SimArgs& a, const Common& c) {
  Report r;
  r.command = "simulate-wedge";
  const Angle alpha = parse_angle(a.alpha);
  r.config = {{"alpha", alpha.label()}, {"stop_layer", a.stop_layer}, {"paths", a.paths}, {"seed", a.seed},
              {"bins", a.bins},          {"step_cap", a.step_cap},     {"level", a.level}};
  const auto spec = WedgeSpec::make(alpha, a.stop_layer);
  const auto lattice = build_wedge_lattice(spec);
  const RunOptions opts{.n_paths = a.paths, .seed = a.seed, .workers = resolve_workers(c.workers),
                        .step_cap = a.step_cap};
  const auto records = run_paths(wedge_kernel<double>(lattice, a.stop_layer), lattice.space(), Start::site(0), opts);
  exit_report(r, records, lattice.space(), a.stop_layer, opts, a.level);

  const auto curve = last_side_curve(records, lattice.space(), a.stop_layer, a.bins);
  const auto direct = score_curve(curve, watts_closed);
  const auto composed = score_curve(curve, watts_composed);
  r.summary["last_side"] = {{"undefined", curve.undefined},
                            {"watts_closed_within_3se", direct.within},
                            {"watts_composed_within_3se", composed.within},
                            {"scored_bins", direct.scored}};
  r.columns = {"s_lo", "s_hi", "n", "upper", "p_hat", "std_error", "watts_closed", "z_closed", "watts_composed",
               "z_composed"};
  for (std::size_t b = 0; b < curve.bins.size(); ++b) {
    const auto& bin = curve.bins[b];
    r.rows.push_back({bin.s_lo, bin.s_hi, bin.n, bin.upper, maybe(bin.p_hat), bin.std_error,
                      maybe(direct.predicted[b]), maybe(direct.z_scores[b]), maybe(composed.predicted[b]),
                      maybe(composed.z_scores[b])});
  }
  return r;
}

Report simulate_vase(const SimArgs& a, const Common& c) {
  Report r;
  r.command = "simulate-vase";
  const int resolution = a.resolution > 0 ? a.resolution : a.stop_layer;
  r.config = {{"shape", a.shape}, {"stop_layer", a.stop_layer}, {"resolution", resolution}, {"paths", a.paths},
              {"seed", a.seed},   {"step_cap", a.step_cap},     {"level", a.level}};
  const auto grid = build_vase_grid(parse_shape(a.shape), resolution, a.stop_layer);
  const RunOptions opts{.n_paths = a.paths, .seed = a.seed, .workers = resolve_workers(c.workers),
                        .step_cap = a.step_cap};
  const auto records = run_paths(jump_chain(vase_rate_matrix(grid)), grid.space(), Start::site(0), opts);
  exit_report(r, records, grid.space(), a.stop_layer, opts, a.level);
  const auto& counts = r.summary["exit_counts"];
  r.columns = {"transverse", "count", "expected"};
  const double expected = static_cast<double>(a.paths) / (2.0 * a.stop_layer + 1.0);
  for (int y = -a.stop_layer; y <= a.stop_layer; ++y) r.rows.push_back({y, counts[y + a.stop_layer], expected});
  return r;
}

// ---- green -------------------------------------------------------------------

struct GreenArgs {
  std::string alpha = "pi/6";
  int layers = 50;
  std::string mode = "float";
  double tolerance = 1e-10;
};

Report green(const GreenArgs& a) {
  Report r;
  r.command = "green";
  const Angle alpha = parse_angle(a.alpha);
  r.config = {{"alpha", alpha.label()}, {"layers", a.layers}, {"mode", a.mode}, {"tolerance", a.tolerance}};
  const auto spec = WedgeSpec::make(alpha, a.layers);
  const auto absorbing = absorbing_from(static_cast<std::size_t>(a.layers) + 1, a.layers);
  const auto g = green_vector(projected_wedge_chain<double>(spec), 0, absorbing);
  const auto fit = fit_green_shape(g, a.layers, alpha);
  r.check("relative variation of G / closed form", fit.relative_variation, a.tolerance,
          fit.relative_variation <= a.tolerance);
  r.summary = {{"constant", fit.constant},   {"inv_sin2", fit.inv_sin2},
               {"inv_cos2", fit.inv_cos2},   {"matching_prefactor", fit.matching_prefactor},
               {"apex_visits", fit.apex_visits}};
  if (a.mode == "rational") {
    if (!alpha.sin2) throw UsageError("rational mode needs --alpha pi/6, pi/4 or pi/3");
    const auto exact = green_vector(projected_wedge_chain<Rational>(spec), 0, absorbing);
    // Rational check: every ratio equals 1/sin^2 exactly.
    const Rational inv_sin2 = Rational(1) / param_as<Rational>(alpha.sin_squared());
    bool all = true;
    for (int y = 1; y < a.layers; ++y) all = all && exact.visits[y] == inv_sin2 * green_closed_form_1d<Rational>(a.layers, y);
    r.check_exact("G(y) == closed(y) / sin^2 for 1 <= y < N", all ? "true" : "false", all);
  }
  r.columns = {"y", "green", "closed_form", "ratio"};
  for (int y = 0; y <= a.layers; ++y) {
    const double closed = green_closed_form_1d<double>(a.layers, y);
    const double v = g.visits[y];
    r.rows.push_back({y, v, closed, closed != 0.0 ? Json(v / closed) : Json(nullptr)});
  }
  return r;
}

// ---- reverse -------------------------------------------------------------------

struct ReverseArgs {
  std::string alpha = "pi/6";
  int layers = 20;
  std::string mode = "float";
  double tolerance = 1e-12;
  int audit_layers = 3;
  int audit_length = 8;
  std::size_t paths = 0;
  std::uint64_t seed = 1;
  double level = 0.001;
};

Report reverse(const ReverseArgs& a, const Common& c) {
  Report r;
  r.command = "reverse";
  const Angle alpha = parse_angle(a.alpha);
  r.config = {{"alpha", alpha.label()}, {"layers", a.layers},       {"mode", a.mode},
              {"tolerance", a.tolerance}, {"audit_layers", a.audit_layers}, {"audit_length", a.audit_length},
              {"paths", a.paths},         {"seed", a.seed},                {"level", a.level}};
  const auto spec = WedgeSpec::make(alpha, a.layers);
  const auto lattice = build_wedge_lattice(spec);
  const auto& space = lattice.space();
  const auto p = wedge_kernel<double>(lattice, a.layers);
  const auto rev = nagasawa_reverse(p, green_vector(p, 0, absorbing_layers(space, a.layers)));
  const double table = reversed_table_residual(rev, space, spec, a.layers);
  r.check("reversed kernel vs closed-form table", table, a.tolerance, table <= a.tolerance);
  if (a.mode == "rational") {
    if (!alpha.sin2) throw UsageError("rational mode needs --alpha pi/6, pi/4 or pi/3");
    const auto pq = wedge_kernel<Rational>(lattice, a.layers);
    const auto rq = nagasawa_reverse(pq, green_vector(pq, 0, absorbing_layers(space, a.layers)));
    const Rational exact = reversed_table_residual(rq, space, spec, a.layers);
    r.check_exact("reversed kernel vs closed-form table (rational)", exact.str(), exact == 0);
  }
  if (a.audit_layers > 0) {
    if (!alpha.sin2) throw UsageError("the path audit runs in rational mode; use a special angle");
    const auto small = build_wedge_lattice(WedgeSpec::make(alpha, a.audit_layers));
    const auto pq = wedge_kernel<Rational>(small, a.audit_layers);
    const auto gq = green_vector(pq, 0, absorbing_layers(small.space(), a.audit_layers));
    const auto audit = audit_path_reversal(pq, nagasawa_reverse(pq, gq), gq, a.audit_length);
    r.check_exact("path reversal mismatches", std::to_string(audit.mismatches), audit.mismatches == 0);
    r.summary["audit_paths"] = audit.paths;
    r.summary["audit_forward_mass"] = to_double(audit.forward_mass);
  }
  if (a.paths > 0) {
    const unsigned w = resolve_workers(c.workers);
    const RunOptions fwd{.n_paths = a.paths, .seed = a.seed, .workers = w};
    const RunOptions bwd{.n_paths = a.paths, .seed = derive_path_seed(a.seed, ~0ull), .workers = w,
                         .side_rule = SideRule::first_contact};
    const auto forward = run_paths(p, space, Start::site(0), fwd);
    const auto backward = run_paths(rev.kernel, space, Start::law(rev.initial), bwd);
    const auto exits = chi_square_homogeneity(exit_distribution(forward, space, a.layers, fwd).counts,
                                              exit_distribution(backward, space, a.layers, bwd, Endpoint::start).counts);
    const auto joint = chi_square_homogeneity(joint_side_table(forward, space, a.layers, Endpoint::exit),
                                              joint_side_table(backward, space, a.layers, Endpoint::start));
    r.check("reversed start law vs forward exit law, p-value", exits.p_value, a.level, exits.p_value > a.level, ">");
    r.check("joint (site, side) homogeneity, p-value", joint.p_value, a.level, joint.p_value > a.level, ">");
  }
  r.columns = {"layer", "transverse", "to_layer", "to_transverse", "probability"};
  for (std::size_t i = 0; i < space.size(); ++i) {
    const Site from = space.site(i);
    for (std::size_t j = 0; j < rev.kernel.size(); ++j) {
      const double v = rev.kernel.probability(i, j);
      if (v == 0.0) continue;
      if (j == rev.cemetery) {
        r.rows.push_back({from.layer, from.transverse, "cemetery", "", v});
      } else {
        const Site to = space.site(j);
        r.rows.push_back({from.layer, from.transverse, to.layer, to.transverse, v});
      }
    }
  }
  return r;
}

// ---- watts ---------------------------------------------------------------------

struct WattsArgs {
  int grid = 9;
  double tolerance = 1e-8;
};

Report watts(const WattsArgs& a) {
  Report r;
  r.command = "watts";
  r.config = {{"grid", a.grid}, {"tolerance", a.tolerance}};
  r.columns = {"a", "watts_closed", "watts_hypergeometric", "watts_integral", "sc_inverse", "watts_composed"};
  double worst = 0.0;
  for (int i = 1; i <= a.grid; ++i) {
    const double x = static_cast<double>(i) / (a.grid + 1);
    const double closed = watts_closed(x);
    const double hyp = watts_via_hypergeometric(x);
    const double integral = watts_via_integral(x);
    worst = std::max({worst, std::abs(closed - hyp), std::abs(closed - integral), std::abs(hyp - integral)});
    r.rows.push_back({x, closed, hyp, integral, sc_inverse(x), watts_composed(x)});
  }
  r.check("max pairwise gap of the three routes", worst, a.tolerance, worst <= a.tolerance);
  return r;
}

// ---- bessel-check ----------------------------------------------------------------

struct BesselArgs {
  double beta = 1.0;
  int start = 50;
  int lower = 25;
  int upper = 200;
  int resolution = 20;
  double tolerance = 0.02;
};

Report bessel_check(const BesselArgs& a) {
  Report r;
  r.command = "bessel-check";
  r.config = {{"beta", a.beta},   {"start", a.start},           {"lower", a.lower},
              {"upper", a.upper}, {"resolution", a.resolution}, {"tolerance", a.tolerance}};
  if (!(a.lower < a.start && a.start < a.upper)) throw UsageError("need --lower < --start < --upper");
  const auto shape = ShapeFunction::power(a.beta);
  const auto grid = build_vase_grid(shape, a.resolution, a.upper);
  const double discrete = discrete_hit_prob(jump_chain(projected_vase_rates(grid)), a.start, a.lower, a.upper);
  const auto& x = grid.abscissas();
  auto phi = [&](double v) { return scale_function(shape, v); };
  const double continuum = (phi(x[a.start]) - phi(x[a.upper])) / (phi(x[a.lower]) - phi(x[a.upper]));
  const double gap = std::abs(discrete - continuum);
  r.check("|discrete - scale-function ratio|", gap, a.tolerance, gap <= a.tolerance);
  r.summary = {{"discrete", discrete}, {"continuum", continuum}};
  if (a.beta == 1.0) {
    const auto q = projected_wedge_chain<double>(WedgeSpec::make(Angle::parse("pi/4"), a.upper));
    const double wedge = discrete_hit_prob(q, a.start, a.lower, a.upper);
    r.summary["wedge_chain"] = wedge;
    r.summary["bessel3"] = bessel3_hit(a.start, a.lower, a.upper);
  }
  r.columns = {"layer", "discrete_hit", "continuum_hit"};
  const auto chain = jump_chain(projected_vase_rates(grid));
  for (int i = a.lower; i <= a.upper; i += std::max(1, (a.upper - a.lower) / 25)) {
    r.rows.push_back({i, discrete_hit_prob(chain, i, a.lower, a.upper),
                      (phi(x[i]) - phi(x[a.upper])) / (phi(x[a.lower]) - phi(x[a.upper]))});
  }
  return r;
}

// ---- strip-check -------------------------------------------------------------------

struct StripArgs {
  std::vector<double> times{0.25, 1.0, 4.0};
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  double level = 0.001;
};

Report strip_check(const StripArgs& a) {
  Report r;
  r.command = "strip-check";
  r.config = {{"times", a.times}, {"samples", a.samples}, {"seed", a.seed}, {"level", a.level}};
  r.columns = {"t", "seed", "ks_distance", "p_value"};
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    const std::uint64_t seed = derive_path_seed(a.seed, i);
    const auto ks = ks_uniform(strip_seesaw_samples(a.times[i], a.samples, seed));
    r.check("KS p-value at t=" + Json(a.times[i]).dump(), ks.p_value, a.level, ks.p_value > a.level, ">");
    r.rows.push_back({a.times[i], seed, ks.distance, ks.p_value});
  }
  return r;
}

// ---- vase-generator -------------------------------------------------------------------

struct GeneratorArgs {
  std::string shape = "x^2";
  double x = 1.0;
  std::vector<int> resolutions{64, 128, 256};
  double ratio_lo = 0.3;
  double ratio_hi = 0.7;
};

Report vase_generator(const GeneratorArgs& a) {
  Report r;
  r.command = "vase-generator";
  r.config = {{"shape", a.shape},         {"test_function", "exp(-x)"}, {"x", a.x},
              {"resolutions", a.resolutions}, {"ratio_lo", a.ratio_lo},  {"ratio_hi", a.ratio_hi}};
  const auto shape = parse_shape(a.shape);
  const TestFunction decay{[](double v) { return std::exp(-v); }, [](double v) { return -std::exp(-v); },
                           [](double v) { return std::exp(-v); }};
  r.columns = {"N", "residual", "ratio"};
  std::optional<double> previous;
  for (int n : a.resolutions) {
    const double res = generator_residual(shape, decay, a.x, n);
    Json ratio = nullptr;
    if (previous) {
      const double q = res / *previous;
      ratio = q;
      r.check("residual ratio at N=" + std::to_string(n), q, a.ratio_hi, q >= a.ratio_lo && q <= a.ratio_hi,
              "in [" + Json(a.ratio_lo).dump() + ", ...]");
    }
    r.rows.push_back({n, res, ratio});
    previous = res;
  }
  return r;
}

// ---- output ---------------------------------------------------------------------------

void emit(const Report& r, const Common& c) {
  const std::string text = c.format == "csv" ? r.to_csv() : r.to_json().dump(2) + "\n";
  std::filesystem::path path = c.output;
  if (path.empty()) {
    if (const char* dir = std::getenv("WEDGEWALK_OUTPUT_DIR"); dir && *dir) {
      path = std::filesystem::path(dir) / (r.command + (c.format == "csv" ? ".csv" : ".json"));
    }
  }
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  std::cerr << (r.pass() ? "pass" : "FAIL") << ": " << r.command << " -> " << path.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wedgewalk: reflected random walks in wedges and vases"};
  app.set_version_flag("--version", std::string(WEDGEWALK_VERSION));
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", common.format, "output format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--output", common.output, "output file ('-' for stdout; default $WEDGEWALK_OUTPUT_DIR or stdout)");
    sub->add_option("--workers", common.workers, "worker threads for path simulation (0 = all cores)");
  };
  const auto mode_check = CLI::IsMember({"float", "rational"});

  std::function<Report()> run;

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify-intertwining", "residuals of the wedge or vase intertwining identity");
  v->add_option("--geometry", verify.geometry)->check(CLI::IsMember({"wedge", "vase"}))->capture_default_str();
  v->add_option("--alpha", verify.alpha, "pi/6, pi/4, pi/3 or radians")->capture_default_str();
  v->add_option("--layers", verify.layers, "truncation layer N (vase: K)")->check(CLI::Range(1, 100000))->capture_default_str();
  v->add_option("--mode", verify.mode)->check(mode_check)->capture_default_str();
  v->add_option("--shape", verify.shape, "vase profile: x, x^b, power:b, linear:c")->capture_default_str();
  v->add_option("--resolution", verify.resolution, "vase resolution N")->check(CLI::Range(1, 100000))->capture_default_str();
  v->add_option("--times", verify.times, "semigroup check times")->capture_default_str();
  v->add_option("--tolerance", verify.tolerance)->capture_default_str();
  v->add_option("--semigroup-tolerance", verify.semigroup_tolerance)->capture_default_str();
  add_common(v);
  v->callback([&] { run = [&] { return verify_intertwining(verify); }; });

  SimArgs sim;
  auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--stop-layer", sim.stop_layer, "absorbing layer M")->check(CLI::Range(1, 100000))->capture_default_str();
    sub->add_option("--paths", sim.paths)->check(CLI::Range(std::size_t{1}, std::size_t{1'000'000'000}))->capture_default_str();
    sub->add_option("--seed", sim.seed)->capture_default_str();
    sub->add_option("--step-cap", sim.step_cap, "per-path step limit")->capture_default_str();
    sub->add_option("--level", sim.level, "significance level")->capture_default_str();
    add_common(sub);
  };
  auto* sw = app.add_subcommand("simulate-wedge", "apex-started walks: exit law and last-side curve");
  sw->add_option("--alpha", sim.alpha)->capture_default_str();
  sw->add_option("--bins", sim.bins, "last-side curve bins")->check(CLI::Range(1, 10000))->capture_default_str();
  add_sim(sw);
  sw->callback([&] { run = [&] { return simulate_wedge(sim, common); }; });
  auto* sv = app.add_subcommand("simulate-vase", "apex-started vase jump chain: exit law");
  sv->add_option("--shape", sim.shape)->capture_default_str();
  sv->add_option("--resolution", sim.resolution, "vase resolution N (default: stop layer)")->check(CLI::Range(0, 100000));
  add_sim(sv);
  sv->callback([&] { run = [&] { return simulate_vase(sim, common); }; });

  GreenArgs gr;
  auto* g = app.add_subcommand("green", "Green function of the projected chain vs closed form");
  g->add_option("--alpha", gr.alpha)->capture_default_str();
  g->add_option("--layers", gr.layers)->check(CLI::Range(2, 100000))->capture_default_str();
  g->add_option("--mode", gr.mode)->check(mode_check)->capture_default_str();
  g->add_option("--tolerance", gr.tolerance)->capture_default_str();
  add_common(g);
  g->callback([&] { run = [&] { return green(gr); }; });

  ReverseArgs rv;
  auto* re = app.add_subcommand("reverse", "Nagasawa reversal: kernel table, path audit, simulation");
  re->add_option("--alpha", rv.alpha)->capture_default_str();
  re->add_option("--layers", rv.layers)->check(CLI::Range(1, 2000))->capture_default_str();
  re->add_option("--mode", rv.mode)->check(mode_check)->capture_default_str();
  re->add_option("--tolerance", rv.tolerance)->capture_default_str();
  re->add_option("--audit-layers", rv.audit_layers, "0 disables the path audit")->check(CLI::Range(0, 6))->capture_default_str();
  re->add_option("--audit-length", rv.audit_length)->check(CLI::Range(1, 12))->capture_default_str();
  re->add_option("--paths", rv.paths, "0 disables the simulation check")->capture_default_str();
  re->add_option("--seed", rv.seed)->capture_default_str();
  re->add_option("--level", rv.level)->capture_default_str();
  add_common(re);
  re->callback([&] { run = [&] { return reverse(rv, common); }; });

  WattsArgs wa;
  auto* w = app.add_subcommand("watts", "Watts curve by three routes on a grid of (0, 1)");
  w->add_option("--grid", wa.grid, "interior points a = i / (grid + 1)")->check(CLI::Range(1, 10000))->capture_default_str();
  w->add_option("--tolerance", wa.tolerance)->capture_default_str();
  add_common(w);
  w->callback([&] { run = [&] { return watts(wa); }; });

  BesselArgs be;
  auto* b = app.add_subcommand("bessel-check", "discrete vs continuum hitting probability for h = x^beta");
  b->add_option("--beta", be.beta)->check(CLI::PositiveNumber)->capture_default_str();
  b->add_option("--start", be.start)->capture_default_str();
  b->add_option("--lower", be.lower)->check(CLI::PositiveNumber)->capture_default_str();
  b->add_option("--upper", be.upper)->capture_default_str();
  b->add_option("--resolution", be.resolution)->check(CLI::Range(1, 100000))->capture_default_str();
  b->add_option("--tolerance", be.tolerance)->capture_default_str();
  add_common(b);
  b->callback([&] { run = [&] { return bessel_check(be); }; });

  StripArgs st;
  auto* s = app.add_subcommand("strip-check", "KS uniformity of the strip seesaw");
  s->add_option("--times", st.times)->capture_default_str();
  s->add_option("--samples", st.samples)->check(CLI::Range(std::size_t{1}, std::size_t{100'000'000}))->capture_default_str();
  s->add_option("--seed", st.seed)->capture_default_str();
  s->add_option("--level", st.level)->capture_default_str();
  add_common(s);
  s->callback([&] { run = [&] { return strip_check(st); }; });

  GeneratorArgs ge;
  auto* vg = app.add_subcommand("vase-generator", "convergence of the projected vase generator");
  vg->add_option("--shape", ge.shape)->capture_default_str();
  vg->add_option("--x", ge.x)->check(CLI::PositiveNumber)->capture_default_str();
  vg->add_option("--resolutions", ge.resolutions)->capture_default_str();
  vg->add_option("--ratio-lo", ge.ratio_lo)->capture_default_str();
  vg->add_option("--ratio-hi", ge.ratio_hi)->capture_default_str();
  add_common(vg);
  vg->callback([&] { run = [&] { return vase_generator(ge); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    const Report r = run();
    emit(r, common);
    return r.pass() ? kPass : kCheckFail;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    const Json failure = {{"version", WEDGEWALK_VERSION}, {"pass", false}, {"error", e.what()}};
    std::cout << failure.dump(2) << "\n";
    return kCheckFail;
  }
}
