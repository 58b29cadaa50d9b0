#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wedgewalk/geometry.hpp"
#include "wedgewalk/kernels.hpp"

namespace wedgewalk {

enum class Side { upper, lower, undefined };

std::string_view side_name(Side side);

// Which boundary contact a path record keeps. Forward runs keep the last
// contact before absorption; runs of a reversed chain keep the first contact
// after the start, which is the same contact seen in forward time.
enum class SideRule { last_contact, first_contact };

struct PathRecord {
  std::size_t start = 0;
  std::size_t exit = 0;
  Side side = Side::undefined;
  std::uint64_t steps = 0;
};

class Start {
 public:
  static Start site(std::size_t index);
  // Site drawn from Lambda(layer, .), i.e. uniform on the layer.
  static Start layer(int layer);
  // State drawn from an arbitrary law over the kernel's states.
  static Start law(std::vector<double> weights);

  enum class Kind { site, layer, law };
  Kind kind() const { return kind_; }
  std::size_t site_index() const { return site_; }
  int layer_index() const { return layer_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  Kind kind_ = Kind::site;
  std::size_t site_ = 0;
  int layer_ = 0;
  std::vector<double> weights_;
};

struct RunOptions {
  std::size_t n_paths = 1;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::uint64_t step_cap = 100'000'000;
  SideRule side_rule = SideRule::last_contact;
};

// Counter-based per-path seed: a SplitMix64 finalizer of (master, index).
std::uint64_t derive_path_seed(std::uint64_t master, std::uint64_t index);

// Runs n_paths independent trajectories until each reaches an absorbing row.
// Records are indexed by path and do not depend on the worker count. States
// beyond space.size() (e.g. a cemetery) carry no side.
std::vector<PathRecord> run_paths(const StochasticKernel<double>& kernel, const SiteSpace& space,
                                  const Start& start, const RunOptions& options);

struct EmpiricalDistribution {
  std::vector<std::string> labels;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

// Which end of a record is the forward exit site.
enum class Endpoint { exit, start };

// Histogram of the endpoint over the 2M + 1 sites of layer M, labelled by transverse index.
EmpiricalDistribution exit_distribution(const std::vector<PathRecord>& records, const SiteSpace& space,
                                        int layer, const RunOptions& options,
                                        Endpoint endpoint = Endpoint::exit);

struct SideCount {
  int transverse = 0;
  std::uint64_t defined = 0;
  std::uint64_t upper = 0;
  std::uint64_t undefined = 0;
};

struct CurveBin {
  double s_lo = 0.0;
  double s_hi = 0.0;
  std::uint64_t n = 0;
  std::uint64_t upper = 0;
  std::optional<double> p_hat;  // missing for empty bins
  double std_error = 0.0;
};

struct SideCurve {
  int layer = 0;
  std::vector<SideCount> table;  // per exit site
  std::vector<CurveBin> bins;
  std::uint64_t undefined = 0;
  std::uint64_t total = 0;
};

// Exit fraction of transverse index y on layer M.
inline double exit_fraction(int transverse, int layer) {
  return (static_cast<double>(transverse) / layer + 1.0) / 2.0;
}

// P(last side = upper | exit fraction in bin), with binomial standard errors.
// Paths without a boundary contact are counted in `undefined` and excluded.
SideCurve last_side_curve(const std::vector<PathRecord>& records, const SiteSpace& space, int layer,
                          int bins, Endpoint endpoint = Endpoint::exit);

struct CurveScore {
  int scored = 0;
  int within = 0;
  std::vector<std::optional<double>> predicted;  // per bin, count-weighted over its exit sites
  std::vector<std::optional<double>> z_scores;
};

CurveScore score_curve(const SideCurve& curve, const std::function<double(double)>& prediction,
                       double sigmas = 3.0);

// Joint (exit site, side) table of a run, flattened as [site][upper, lower, undefined].
std::vector<std::uint64_t> joint_side_table(const std::vector<PathRecord>& records, const SiteSpace& space,
                                            int layer, Endpoint endpoint);

// Probability that the chain started at i hits a before b (a <= i <= b),
// by a sparse solve over the states strictly between a and b.
double discrete_hit_prob(const StochasticKernel<double>& chain, std::size_t i, std::size_t a, std::size_t b);

// Triangle wave of period 2: x - 2k on [2k, 2k+1], 2k + 2 - x on [2k+1, 2k+2].
double seesaw(double x);

// n samples of seesaw(U + Y_t) with U ~ Unif[0, 1] and Y_t ~ N(0, t).
std::vector<double> strip_seesaw_samples(double t, std::size_t n, std::uint64_t seed);

}  // namespace wedgewalk
