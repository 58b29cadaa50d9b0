#include "wedgewalk/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "wedgewalk/intertwining.hpp"

namespace wedgewalk {

namespace {

// Cumulative transition tables for fast sampling.
struct JumpTable {
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> targets;
  std::vector<double> cumulative;
  std::vector<bool> absorbing;

  explicit JumpTable(const StochasticKernel<double>& kernel) {
    const std::size_t n = kernel.size();
    offsets.reserve(n + 1);
    offsets.push_back(0);
    absorbing.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      absorbing[i] = kernel.is_absorbing(i);
      double acc = 0.0;
      for (const auto& e : kernel.row(i)) {
        acc += e.value;
        targets.push_back(e.column);
        cumulative.push_back(acc);
      }
      if (offsets.back() < targets.size()) cumulative.back() = 1.0;
      offsets.push_back(targets.size());
    }
  }

  std::size_t step(std::size_t from, double u) const {
    std::size_t j = offsets[from];
    const std::size_t end = offsets[from + 1] - 1;
    while (j < end && u >= cumulative[j]) ++j;
    return targets[j];
  }
};

Side side_of(const SiteSpace& space, std::size_t state) {
  if (state >= space.size()) return Side::undefined;
  const Site s = space.site(state);
  switch (SiteSpace::kind(s)) {
    case SiteKind::upper_boundary:
      return Side::upper;
    case SiteKind::lower_boundary:
      return Side::lower;
    default:
      return Side::undefined;
  }
}

// Sites on a bin edge go to the bin nearer s = 1/2, so y and -y land in mirrored bins.
int curve_bin(int transverse, int layer, int bins) {
  const double s = exit_fraction(transverse, layer);
  if (transverse > 0) return bins - 1 - std::min(bins - 1, static_cast<int>(std::floor((1.0 - s) * bins)));
  return std::min(bins - 1, static_cast<int>(std::floor(s * bins)));
}

struct PathTimeout {
  std::size_t path;
};

}  // namespace

std::string_view side_name(Side side) {
  switch (side) {
    case Side::upper:
      return "upper";
    case Side::lower:
      return "lower";
    default:
      return "undefined";
  }
}

Start Start::site(std::size_t index) {
  Start s;
  s.kind_ = Kind::site;
  s.site_ = index;
  return s;
}

Start Start::layer(int layer) {
  Start s;
  s.kind_ = Kind::layer;
  s.layer_ = layer;
  return s;
}

Start Start::law(std::vector<double> weights) {
  Start s;
  s.kind_ = Kind::law;
  s.weights_ = std::move(weights);
  return s;
}

std::uint64_t derive_path_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<PathRecord> run_paths(const StochasticKernel<double>& kernel, const SiteSpace& space,
                                  const Start& start, const RunOptions& options) {
  if (options.n_paths < 1) throw DomainError("n_paths must be >= 1");
  const JumpTable table(kernel);
  const MarkovLink link(space);

  std::optional<std::discrete_distribution<std::size_t>> start_law;
  switch (start.kind()) {
    case Start::Kind::site:
      if (start.site_index() >= kernel.size()) throw DomainError("start state out of range");
      break;
    case Start::Kind::layer:
      if (start.layer_index() < 0 || start.layer_index() > space.layers()) {
        throw DomainError("start layer out of range");
      }
      break;
    case Start::Kind::law:
      if (start.weights().size() != kernel.size()) throw ShapeError("start law does not match kernel size");
      start_law.emplace(start.weights().begin(), start.weights().end());
      break;
  }

  std::vector<PathRecord> records(options.n_paths);
  auto run_one = [&](std::size_t index) {
    std::mt19937_64 rng(derive_path_seed(options.seed, index));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    std::size_t state = 0;
    switch (start.kind()) {
      case Start::Kind::site:
        state = start.site_index();
        break;
      case Start::Kind::layer:
        state = space.index(filter_sample(link, start.layer_index(), rng));
        break;
      case Start::Kind::law: {
        auto law = *start_law;
        state = law(rng);
        break;
      }
    }

    PathRecord rec;
    rec.start = state;
    while (!table.absorbing[state]) {
      const Side here = side_of(space, state);
      if (here != Side::undefined) {
        if (options.side_rule == SideRule::last_contact) {
          rec.side = here;
        } else if (rec.steps > 0 && rec.side == Side::undefined) {
          rec.side = here;
        }
      }
      if (rec.steps >= options.step_cap) throw PathTimeout{index};
      state = table.step(state, uniform(rng));
      ++rec.steps;
    }
    rec.exit = state;
    records[index] = rec;
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(options.n_paths)));
  std::atomic<std::size_t> completed{0};
  std::atomic<bool> stop{false};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::optional<std::size_t> timed_out_path;

  auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end && !stop.load(std::memory_order_relaxed); ++i) {
      try {
        run_one(i);
        completed.fetch_add(1, std::memory_order_relaxed);
      } catch (const PathTimeout& t) {
        std::lock_guard lock(error_mutex);
        if (!timed_out_path) timed_out_path = t.path;
        stop = true;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        stop = true;
      }
    }
  };

  if (workers == 1) {
    worker(0, options.n_paths);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (options.n_paths + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(options.n_paths, begin + chunk);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
  }

  if (error) std::rethrow_exception(error);
  if (timed_out_path) {
    throw TimeoutError("path " + std::to_string(*timed_out_path) + " exceeded the step cap of " +
                           std::to_string(options.step_cap),
                       completed.load());
  }
  return records;
}

EmpiricalDistribution exit_distribution(const std::vector<PathRecord>& records, const SiteSpace& space,
                                        int layer, const RunOptions& options, Endpoint endpoint) {
  if (layer < 1 || layer > space.layers()) throw DomainError("exit layer out of range");
  EmpiricalDistribution dist;
  dist.seed = options.seed;
  dist.workers = options.workers;
  dist.counts.assign(SiteSpace::fiber_size(layer), 0);
  for (int y = -layer; y <= layer; ++y) dist.labels.push_back(std::to_string(y));
  const std::size_t begin = SiteSpace::fiber_begin(layer);
  for (const auto& r : records) {
    const std::size_t site = endpoint == Endpoint::exit ? r.exit : r.start;
    if (site < begin || site >= begin + SiteSpace::fiber_size(layer)) {
      throw ShapeError("record endpoint is not on layer " + std::to_string(layer));
    }
    ++dist.counts[site - begin];
    ++dist.total;
  }
  return dist;
}

SideCurve last_side_curve(const std::vector<PathRecord>& records, const SiteSpace& space, int layer, int bins,
                          Endpoint endpoint) {
  if (bins < 2) throw DomainError("need at least 2 bins");
  if (layer < 1 || layer > space.layers()) throw DomainError("exit layer out of range");
  SideCurve curve;
  curve.layer = layer;
  const std::size_t begin = SiteSpace::fiber_begin(layer);
  curve.table.resize(SiteSpace::fiber_size(layer));
  for (int y = -layer; y <= layer; ++y) curve.table[y + layer].transverse = y;

  for (const auto& r : records) {
    const std::size_t site = endpoint == Endpoint::exit ? r.exit : r.start;
    if (site < begin || site >= begin + curve.table.size()) {
      throw ShapeError("record endpoint is not on layer " + std::to_string(layer));
    }
    auto& cell = curve.table[site - begin];
    ++curve.total;
    if (r.side == Side::undefined) {
      ++cell.undefined;
      ++curve.undefined;
      continue;
    }
    ++cell.defined;
    if (r.side == Side::upper) ++cell.upper;
  }

  curve.bins.resize(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    curve.bins[b].s_lo = static_cast<double>(b) / bins;
    curve.bins[b].s_hi = static_cast<double>(b + 1) / bins;
  }
  for (const auto& cell : curve.table) {
    const int b = curve_bin(cell.transverse, layer, bins);
    curve.bins[b].n += cell.defined;
    curve.bins[b].upper += cell.upper;
  }
  for (auto& bin : curve.bins) {
    if (bin.n == 0) continue;
    const double p = static_cast<double>(bin.upper) / static_cast<double>(bin.n);
    bin.p_hat = p;
    bin.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(bin.n));
  }
  return curve;
}

CurveScore score_curve(const SideCurve& curve, const std::function<double(double)>& prediction, double sigmas) {
  const int bins = static_cast<int>(curve.bins.size());
  std::vector<double> weighted(bins, 0.0);
  std::vector<double> weight(bins, 0.0);
  for (const auto& cell : curve.table) {
    if (cell.defined == 0) continue;
    const double s = exit_fraction(cell.transverse, curve.layer);
    const int b = curve_bin(cell.transverse, curve.layer, bins);
    weighted[b] += static_cast<double>(cell.defined) * prediction(s);
    weight[b] += static_cast<double>(cell.defined);
  }

  CurveScore score;
  score.predicted.resize(bins);
  score.z_scores.resize(bins);
  for (int b = 0; b < bins; ++b) {
    const auto& bin = curve.bins[b];
    if (!bin.p_hat || weight[b] == 0.0) continue;
    const double expected = weighted[b] / weight[b];
    score.predicted[b] = expected;
    ++score.scored;
    const double gap = std::abs(*bin.p_hat - expected);
    if (bin.std_error > 0.0) score.z_scores[b] = gap / bin.std_error;
    if (gap <= sigmas * bin.std_error) ++score.within;
  }
  return score;
}

std::vector<std::uint64_t> joint_side_table(const std::vector<PathRecord>& records, const SiteSpace& space,
                                            int layer, Endpoint endpoint) {
  const std::size_t begin = SiteSpace::fiber_begin(layer);
  const std::size_t width = SiteSpace::fiber_size(layer);
  if (begin + width > space.size()) throw DomainError("exit layer out of range");
  std::vector<std::uint64_t> table(3 * width, 0);
  for (const auto& r : records) {
    const std::size_t site = endpoint == Endpoint::exit ? r.exit : r.start;
    if (site < begin || site >= begin + width) throw ShapeError("record endpoint is not on the exit layer");
    const std::size_t column = r.side == Side::upper ? 0 : r.side == Side::lower ? 1 : 2;
    ++table[3 * (site - begin) + column];
  }
  return table;
}

double discrete_hit_prob(const StochasticKernel<double>& chain, std::size_t i, std::size_t a, std::size_t b) {
  if (!(a <= i && i <= b) || b >= chain.size() || a == b) {
    throw DomainError("hitting probability needs a <= i <= b < chain size with a < b");
  }
  if (i == a) return 1.0;
  if (i == b) return 0.0;

  // Unknowns h(a+1) .. h(b-1); (I - P_II) h = P_{I,a}.
  const auto m = static_cast<Eigen::Index>(b - a - 1);
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (std::size_t x = a + 1; x < b; ++x) {
    const auto row = static_cast<int>(x - a - 1);
    triplets.emplace_back(row, row, 1.0);
    for (const auto& e : chain.row(x)) {
      if (e.column < a || e.column > b) {
        throw ShapeError("chain leaves [a, b] without hitting an endpoint");
      }
      if (e.column == a) {
        rhs(row) += e.value;
      } else if (e.column != b) {
        triplets.emplace_back(row, static_cast<int>(e.column - a - 1), -e.value);
      }
    }
  }
  Eigen::SparseMatrix<double> mat(m, m);
  mat.setFromTriplets(triplets.begin(), triplets.end());
  mat.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(mat);
  if (lu.info() != Eigen::Success) throw SolverError("hitting-probability factorization failed");
  const Eigen::VectorXd h = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !h.allFinite()) throw SolverError("hitting-probability solve failed");
  return h(static_cast<Eigen::Index>(i - a - 1));
}

double seesaw(double x) {
  double r = std::fmod(x, 2.0);
  if (r < 0.0) r += 2.0;
  return r <= 1.0 ? r : 2.0 - r;
}

std::vector<double> strip_seesaw_samples(double t, std::size_t n, std::uint64_t seed) {
  if (!(t > 0.0)) throw DomainError("strip time must be positive");
  std::mt19937_64 rng(derive_path_seed(seed, 0));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> gaussian(0.0, std::sqrt(t));
  std::vector<double> out(n);
  for (auto& v : out) {
    const double u = uniform(rng);
    v = seesaw(u + gaussian(rng));
  }
  return out;
}

}  // namespace wedgewalk
