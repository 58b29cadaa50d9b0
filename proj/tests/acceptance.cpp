// Acceptance suite: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "wedgewalk/analytics.hpp"
#include "wedgewalk/gof.hpp"
#include "wedgewalk/green.hpp"
#include "wedgewalk/intertwining.hpp"
#include "wedgewalk/simulation.hpp"

using namespace wedgewalk;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok) { pass = pass && ok; }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

const char* kAngles[] = {"pi/6", "pi/4", "pi/3"};

Outcome wedge_intertwining() {
  Outcome out;
  for (const char* a : kAngles) {
    const auto spec = WedgeSpec::make(Angle::parse(a), 200);
    const auto lattice = build_wedge_lattice(spec);
    const auto link = build_link(lattice);
    const Rational exact =
        intertwining_residual(link, wedge_kernel<Rational>(lattice, 200), projected_wedge_chain<Rational>(spec));
    const double floating =
        intertwining_residual(link, wedge_kernel<double>(lattice, 200), projected_wedge_chain<double>(spec));
    out.require(exact == 0 && floating <= 1e-12);
    out.detail << a << ": rational " << exact.str() << ", float " << fmt(floating) << "; ";
  }
  return out;
}

Outcome vase_intertwining() {
  Outcome out;
  const auto grid = build_vase_grid(ShapeFunction::power(2.0), 32, 32);
  const auto link = build_link(grid);
  const auto two = vase_rate_matrix(grid);
  const auto one = projected_vase_rates(grid);
  const double generator = intertwining_residual(link, two, one);
  out.require(generator <= 1e-12);
  out.detail << "x^2 N=K=32: generator " << fmt(generator);
  for (double t : {0.1, 1.0}) {
    const double semigroup = semigroup_residual(link, two, one, t);
    out.require(semigroup <= 1e-10);
    out.detail << ", semigroup t=" << t << " " << fmt(semigroup);
  }
  out.detail << " | lumped " << fmt(lumped_residual(link, two.matrix(), one.matrix()));
  const auto linear = build_vase_grid(ShapeFunction::linear(1.0), 32, 32);
  out.detail << ", linear profile generator "
             << fmt(intertwining_residual(build_link(linear), vase_rate_matrix(linear), projected_vase_rates(linear)));
  return out;
}

Outcome uniform_hitting() {
  Outcome out;
  {
    const auto spec = WedgeSpec::make(Angle::parse("pi/6"), 30);
    const auto lattice = build_wedge_lattice(spec);
    const RunOptions opts{.n_paths = 100000, .seed = 20240301, .workers = workers()};
    const auto records = run_paths(wedge_kernel<double>(lattice, 30), lattice.space(), Start::site(0), opts);
    const auto dist = exit_distribution(records, lattice.space(), 30, opts);
    const auto chi = chi_square_uniform(dist.counts);
    out.require(chi.p_value > 0.001);
    out.detail << "wedge M=30: chi2 " << fmt(chi.statistic) << " dof " << chi.dof << " p " << fmt(chi.p_value);
  }
  {
    const int m = 20;
    const auto grid = build_vase_grid(ShapeFunction::power(2.0), m, m);
    const auto chain = jump_chain(vase_rate_matrix(grid));
    const RunOptions opts{.n_paths = 100000, .seed = 20240302, .workers = workers()};
    const auto records = run_paths(chain, grid.space(), Start::site(0), opts);
    const auto dist = exit_distribution(records, grid.space(), m, opts);
    const auto chi = chi_square_uniform(dist.counts);
    out.require(chi.p_value > 0.001);
    double lo = 1e9, hi = 0.0;
    for (auto c : dist.counts) {
      const double ratio = static_cast<double>(c) * dist.counts.size() / static_cast<double>(dist.total);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    out.detail << "; vase x^2 M=20: chi2 " << fmt(chi.statistic) << " dof " << chi.dof << " p " << fmt(chi.p_value)
               << ", count/expected in [" << fmt(lo) << ", " << fmt(hi) << "]";
  }
  return out;
}

Outcome green_shape() {
  Outcome out;
  for (const char* a : kAngles) {
    const Angle alpha = Angle::parse(a);
    const auto spec = WedgeSpec::make(alpha, 50);
    const auto g = green_vector(projected_wedge_chain<double>(spec), 0, absorbing_from(51, 50));
    const auto fit = fit_green_shape(g, 50, alpha);
    out.require(fit.relative_variation <= 1e-10);
    out.detail << a << ": variation " << fmt(fit.relative_variation) << ", constant " << fmt(fit.constant)
               << " (1/sin^2 " << fmt(fit.inv_sin2) << ", 1/cos^2 " << fmt(fit.inv_cos2) << ") matches "
               << fit.matching_prefactor << "; ";
  }
  return out;
}

Outcome nagasawa() {
  Outcome out;
  {
    const auto spec = WedgeSpec::make(Angle::parse("pi/6"), 30);
    const auto lattice = build_wedge_lattice(spec);
    const auto p = wedge_kernel<double>(lattice, 30);
    const auto rev = nagasawa_reverse(p, green_vector(p, 0, absorbing_layers(lattice.space(), 30)));
    const double table = reversed_table_residual(rev, lattice.space(), spec, 30);
    out.require(table <= 1e-12);
    out.detail << "table float N=30 " << fmt(table);
  }
  for (const char* a : kAngles) {
    const auto spec = WedgeSpec::make(Angle::parse(a), 20);
    const auto lattice = build_wedge_lattice(spec);
    const auto p = wedge_kernel<Rational>(lattice, 20);
    const auto rev = nagasawa_reverse(p, green_vector(p, 0, absorbing_layers(lattice.space(), 20)));
    const Rational table = reversed_table_residual(rev, lattice.space(), spec, 20);
    out.require(table == 0);
    out.detail << ", " << a << " rational N=20 " << table.str();
  }
  {
    const auto spec = WedgeSpec::make(Angle::parse("pi/6"), 3);
    const auto lattice = build_wedge_lattice(spec);
    const auto p = wedge_kernel<Rational>(lattice, 3);
    const auto g = green_vector(p, 0, absorbing_layers(lattice.space(), 3));
    const auto audit = audit_path_reversal(p, nagasawa_reverse(p, g), g, 8);
    out.require(audit.mismatches == 0);
    out.detail << "; paths N=3 len<=8: " << audit.paths << " enumerated, " << audit.mismatches << " mismatches";
  }
  {
    const int m = 30;
    const auto spec = WedgeSpec::make(Angle::parse("pi/6"), m);
    const auto lattice = build_wedge_lattice(spec);
    const auto& space = lattice.space();
    const auto p = wedge_kernel<double>(lattice, m);
    const auto rev = nagasawa_reverse(p, green_vector(p, 0, absorbing_layers(space, m)));
    const RunOptions fwd{.n_paths = 100000, .seed = 20240305, .workers = workers()};
    const RunOptions bwd{.n_paths = 100000, .seed = 20240306, .workers = workers(),
                         .side_rule = SideRule::first_contact};
    const auto forward = run_paths(p, space, Start::site(0), fwd);
    const auto backward = run_paths(rev.kernel, space, Start::law(rev.initial), bwd);
    bool killed = true;
    for (const auto& r : backward) killed = killed && r.exit == rev.cemetery;
    const auto exits = chi_square_homogeneity(exit_distribution(forward, space, m, fwd).counts,
                                              exit_distribution(backward, space, m, bwd, Endpoint::start).counts);
    const auto joint = chi_square_homogeneity(joint_side_table(forward, space, m, Endpoint::exit),
                                              joint_side_table(backward, space, m, Endpoint::start));
    out.require(killed && exits.p_value > 0.001 && joint.p_value > 0.001);
    out.detail << "; reversed simulation M=30: exit law p " << fmt(exits.p_value) << ", joint (exit, side) p "
               << fmt(joint.p_value) << (killed ? "" : ", NOT all killed at the apex");
  }
  return out;
}

double hit_gap(int i, int a, int b) {
  const auto q = projected_wedge_chain<double>(WedgeSpec::make(Angle::parse("pi/4"), b));
  return discrete_hit_prob(q, i, a, b) - bessel3_hit(i, a, b);
}

Outcome bessel3() {
  Outcome out;
  const double d1 = hit_gap(50, 25, 200);
  const double d2 = hit_gap(100, 50, 400);
  const double ratio = d2 / d1;
  out.require(std::abs(d1) <= 0.02 && ratio >= 0.7 * 0.5 && ratio <= 1.3 * 0.5);
  out.detail << "discrete - 3/7 = " << fmt(d1) << ", doubled " << fmt(d2) << ", ratio " << fmt(ratio);
  return out;
}

Outcome watts_identity() {
  Outcome out;
  double worst = 0.0;
  for (int i = 1; i <= 9; ++i) {
    const double a = i / 10.0;
    const double c = watts_closed(a);
    const double h = watts_via_hypergeometric(a);
    const double g = watts_via_integral(a);
    worst = std::max({worst, std::abs(c - h), std::abs(c - g), std::abs(h - g)});
  }
  out.require(worst <= 1e-8);
  out.detail << "max pairwise gap over a in {0.1..0.9}: " << fmt(worst);
  return out;
}

Outcome watts_monte_carlo() {
  Outcome out;
  const int m = 60;
  const auto spec = WedgeSpec::make(Angle::parse("pi/6"), m);
  const auto lattice = build_wedge_lattice(spec);
  const RunOptions opts{.n_paths = 1000000, .seed = 20240308, .workers = workers()};
  const auto records = run_paths(wedge_kernel<double>(lattice, m), lattice.space(), Start::site(0), opts);
  const auto curve = last_side_curve(records, lattice.space(), m, 20);
  const auto direct = score_curve(curve, watts_closed);
  const auto composed = score_curve(curve, watts_composed);
  out.require(direct.within >= 18);
  out.detail << "watts_closed(s): " << direct.within << "/" << direct.scored << " bins within 3 SE"
             << "; watts_closed(sc_inverse(s)): " << composed.within << "/" << composed.scored
             << "; undefined side " << fmt(static_cast<double>(curve.undefined) / curve.total);
  double worst_direct = 0.0, worst_composed = 0.0;
  for (std::size_t b = 0; b < curve.bins.size(); ++b) {
    if (direct.z_scores[b]) worst_direct = std::max(worst_direct, *direct.z_scores[b]);
    if (composed.z_scores[b]) worst_composed = std::max(worst_composed, *composed.z_scores[b]);
  }
  out.detail << "; max |z| " << fmt(worst_direct) << " vs " << fmt(worst_composed);
  return out;
}

Outcome vase_generator() {
  Outcome out;
  const TestFunction decay{[](double x) { return std::exp(-x); }, [](double x) { return -std::exp(-x); },
                           [](double x) { return std::exp(-x); }};
  const auto shape = ShapeFunction::power(2.0);
  std::vector<double> r;
  for (int n : {64, 128, 256}) r.push_back(generator_residual(shape, decay, 1.0, n));
  out.detail << "residuals " << fmt(r[0]) << ", " << fmt(r[1]) << ", " << fmt(r[2]) << "; ratios";
  for (std::size_t i = 1; i < r.size(); ++i) {
    const double ratio = r[i] / r[i - 1];
    out.require(ratio >= 0.3 && ratio <= 0.7);
    out.detail << " " << fmt(ratio);
  }
  return out;
}

Outcome bessel_dimension() {
  Outcome out;
  {
    const double beta = 1.5;
    const auto shape = ShapeFunction::power(beta);
    const int n = 20;
    const int a = 25, i = 50, b = 200;
    const auto grid = build_vase_grid(shape, n, b);
    const auto chain = jump_chain(projected_vase_rates(grid));
    const auto& x = grid.abscissas();
    const double discrete = discrete_hit_prob(chain, i, a, b);
    auto phi = [&](double v) { return scale_function(shape, v); };
    const double continuum = (phi(x[i]) - phi(x[b])) / (phi(x[a]) - phi(x[b]));
    auto power = [&](double v) { return std::pow(v, 1.0 - 2.0 * beta); };
    const double closed = (power(x[i]) - power(x[b])) / (power(x[a]) - power(x[b]));
    out.require(std::abs(discrete - continuum) <= 0.02 && std::abs(continuum - closed) <= 1e-9);
    out.detail << "beta=1.5 N=20 layers (25, 50, 200): discrete " << fmt(discrete) << ", scale ratio "
               << fmt(continuum) << " (x^(1-2beta): " << fmt(closed) << ")";
  }
  {
    const auto grid = build_vase_grid(ShapeFunction::linear(1.0), 1, 200);
    const double vase = discrete_hit_prob(jump_chain(projected_vase_rates(grid)), 50, 25, 200);
    const auto q = projected_wedge_chain<double>(WedgeSpec::make(Angle::parse("pi/4"), 200));
    const double wedge = discrete_hit_prob(q, 50, 25, 200);
    out.require(std::abs(vase - wedge) <= 1e-10 && std::abs(vase - bessel3_hit(50, 25, 200)) <= 0.02);
    out.detail << "; beta=1: vase " << fmt(vase) << ", wedge chain " << fmt(wedge) << ", 3/7";
  }
  return out;
}

Outcome strip_seesaw() {
  Outcome out;
  std::uint64_t seed = 20240311;
  for (double t : {0.25, 1.0, 4.0}) {
    const auto samples = strip_seesaw_samples(t, 100000, seed++);
    const auto ks = ks_uniform(samples);
    const double critical = ks_critical_value(samples.size(), 0.001);
    out.require(ks.distance < critical);
    out.detail << "t=" << t << ": D " << fmt(ks.distance) << " p " << fmt(ks.p_value) << "; ";
  }
  out.detail << "critical " << fmt(ks_critical_value(100000, 0.001));
  return out;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  app.add_option("--only", only, "run the listed criteria only");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> selected(only.begin(), only.end());

  const std::vector<Criterion> criteria{
      {1, "exact intertwining (wedge)", wedge_intertwining},
      {2, "exact intertwining (vase)", vase_intertwining},
      {3, "uniform hitting", uniform_hitting},
      {4, "Green shape", green_shape},
      {5, "Nagasawa reversal", nagasawa},
      {6, "Bessel-3 projection", bessel3},
      {7, "Watts three-way identity", watts_identity},
      {8, "Watts Monte Carlo", watts_monte_carlo},
      {9, "vase generator convergence", vase_generator},
      {10, "Bessel-dimension corollary", bessel_dimension},
      {11, "strip seesaw", strip_seesaw},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "error: " << e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::printf("%s  C%-2d %-28s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.str().c_str(),
                seconds);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
