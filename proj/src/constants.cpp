#include "ruin/constants.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ruin/errors.hpp"
#include "ruin/gp_sim.hpp"
#include "ruin/parallel.hpp"

namespace ruin {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

constexpr double kInvSqrtPi = 0.56418958354775628695;
constexpr std::size_t kChunkSize = 1024;

// One replicate batch of sup(sqrt(2) B_{alpha/2}(t) - drift * t^alpha)
// evaluated at the full horizon and at the half horizon on the same path.
struct SupChunk {
  LogSumExp full;
  LogSumExp half;
};

// Shared path engine for both constants. The fBm with Hurst alpha/2 is
// simulated on N = S*m intervals; H=1/2 and H=1 use their exact fast paths.
class SupSimulator {
 public:
  SupSimulator(double alpha, double S, int grid_per_unit, double drift_scale)
      : alpha_(alpha), drift_scale_(drift_scale) {
    const double hurst = alpha / 2.0;
    n_ = static_cast<std::size_t>(std::llround(S * grid_per_unit));
    n_ += n_ % 2;  // keep the half horizon on the grid
    dt_ = S / static_cast<double>(n_);
    hurst_ = hurst;
    if (hurst != 0.5 && hurst != 1.0)
      fgn_ = std::make_unique<FgnSampler>(hurst, n_, dt_);
    drift_.resize(n_);
    for (std::size_t j = 1; j <= n_; ++j)
      drift_[j - 1] = drift_scale_ * std::pow(dt_ * static_cast<double>(j), alpha);
  }

  bool used_cholesky_fallback() const { return fgn_ && fgn_->used_cholesky_fallback(); }

  // sup over t_0..t_N and t_0..t_{N/2}; t_0 contributes 0.
  void run(RngStream& rng, double* sup_full, double* sup_half) const {
    thread_local std::vector<double> x;
    x.resize(n_);
    if (hurst_ == 0.5) {
      const double sd = std::sqrt(dt_);
      double acc = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        acc += sd * rng.normal();
        x[j] = acc;
      }
    } else if (hurst_ == 1.0) {
      const double z = rng.normal();
      for (std::size_t j = 1; j <= n_; ++j) x[j - 1] = dt_ * static_cast<double>(j) * z;
    } else {
      fgn_->sample(rng, x.data());
      for (std::size_t j = 1; j < n_; ++j) x[j] += x[j - 1];
    }
    const double sqrt2 = 1.4142135623730950488;
    double best_half = 0.0, best_full = 0.0;
    const std::size_t half = n_ / 2;
    for (std::size_t j = 0; j < n_; ++j) {
      const double v = sqrt2 * x[j] - drift_[j];
      if (j < half && v > best_half) best_half = v;
      if (v > best_full) best_full = v;
    }
    *sup_full = best_full;
    *sup_half = best_half;
  }

 private:
  double alpha_, drift_scale_, dt_, hurst_;
  std::size_t n_;
  std::vector<double> drift_;
  std::unique_ptr<FgnSampler> fgn_;
};

std::vector<SupChunk> run_sup_chunks(const SupSimulator& sim, std::size_t reps,
                                     std::uint64_t seed, std::uint64_t stream_base, int workers) {
  const ChunkPlan plan{reps, kChunkSize};
  std::vector<SupChunk> chunks(plan.num_chunks());
  parallel_chunks(plan.num_chunks(), workers, [&](std::size_t c) {
    RngStream rng(seed, stream_base + c);
    SupChunk local;
    const std::size_t n = plan.size(c);
    for (std::size_t r = 0; r < n; ++r) {
      double full = 0.0, half = 0.0;
      sim.run(rng, &full, &half);
      local.full.add(full);
      local.half.add(half);
    }
    chunks[c] = local;
  });
  return chunks;
}

LogSumExp pool_full(const std::vector<SupChunk>& chunks, std::size_t skip) {
  LogSumExp out;
  for (std::size_t c = 0; c < chunks.size(); ++c)
    if (c != skip) out.merge(chunks[c].full);
  return out;
}
LogSumExp pool_half(const std::vector<SupChunk>& chunks, std::size_t skip) {
  LogSumExp out;
  for (std::size_t c = 0; c < chunks.size(); ++c)
    if (c != skip) out.merge(chunks[c].half);
  return out;
}

}  // namespace

double default_pickands_horizon(double alpha) {
  // Levels up to ~S^alpha contribute equally to E exp(sup); keep that scale
  // near 4 so a 1e5-1e6 replicate budget resolves the whole expectation.
  return std::max(2.0, std::pow(4.0, 1.0 / alpha));
}

SimulationEstimate pickands_estimate(double alpha, double S, int grid_per_unit, std::size_t reps,
                                     std::uint64_t seed, int workers) {
  require(alpha > 0.0 && alpha <= 2.0, "pickands_estimate: alpha must be in (0,2]");
  require(S >= 2.0, "pickands_estimate: need S >= 2 (two usable horizons)");
  require(grid_per_unit >= 64, "pickands_estimate: need m >= 64 grid points per unit");
  require(reps >= 1000, "pickands_estimate: need reps >= 1e3");

  const SupSimulator sim(alpha, S, grid_per_unit, 1.0);
  const auto chunks = run_sup_chunks(sim, reps, seed, 0, workers);

  const double half_S = 0.5 * S;
  auto richardson = [&](std::size_t skip) {
    const LogSumExp full = pool_full(chunks, skip);
    const LogSumExp half = pool_half(chunks, skip);
    const double mean_full = full.mean_exp();
    const double mean_half = half.mean_exp();
    return 2.0 * mean_full / S - mean_half / half_S;
  };

  SimulationEstimate est;
  est.value = richardson(chunks.size());  // skip index past the end = use all
  est.std_error = jackknife_std_error(chunks, richardson);
  est.n = reps;
  est.ci_lo = est.value - 1.959963984540054 * est.std_error;
  est.ci_hi = est.value + 1.959963984540054 * est.std_error;
  est.method = "pickands-mc";
  est.grid_m = static_cast<std::size_t>(grid_per_unit);
  est.seed = seed;
  if (sim.used_cholesky_fallback()) est.flags.push_back("cholesky_fallback");
  {
    std::ostringstream os;
    os << "S=" << S << ";m=" << grid_per_unit << ";reps=" << reps;
    est.flags.push_back(os.str());
  }
  return est;
}

SimulationEstimate piterbarg_estimate(double alpha, double R, double S, int grid_per_unit,
                                      std::size_t reps, std::uint64_t seed, int workers) {
  require(alpha > 0.0 && alpha <= 2.0, "piterbarg_estimate: alpha must be in (0,2]");
  require(R > 0.0, "piterbarg_estimate: R must be positive");
  require(S >= 10.0, "piterbarg_estimate: need S >= 10");
  require(grid_per_unit >= 64, "piterbarg_estimate: need m >= 64 grid points per unit");
  require(reps >= 1000, "piterbarg_estimate: need reps >= 1e3");

  // The drift margin R makes exp(sup) light-tailed, so the plain mean
  // converges; S doubles until the estimate plateaus within half a stderr.
  const int max_doublings = 3;
  double prev_value = 0.0, prev_se = 0.0;
  bool have_prev = false;
  for (int k = 0; k <= max_doublings; ++k) {
    const double horizon = S * static_cast<double>(1 << k);
    const SupSimulator sim(alpha, horizon, grid_per_unit, 1.0 + R);
    const auto chunks = run_sup_chunks(sim, reps, seed, 1000000ULL * (k + 1), workers);
    auto mean_at = [&](std::size_t skip) { return pool_full(chunks, skip).mean_exp(); };
    const double value = mean_at(chunks.size());
    const double se = jackknife_std_error(chunks, mean_at);
    if (have_prev && std::abs(value - prev_value) < 0.5 * std::sqrt(se * se + prev_se * prev_se)) {
      SimulationEstimate est;
      est.value = value;
      est.std_error = se;
      est.n = reps;
      est.ci_lo = value - 1.959963984540054 * se;
      est.ci_hi = value + 1.959963984540054 * se;
      est.method = "piterbarg-mc";
      est.grid_m = static_cast<std::size_t>(grid_per_unit);
      est.seed = seed;
      std::ostringstream os;
      os << "S=" << horizon << ";m=" << grid_per_unit << ";reps=" << reps;
      est.flags.push_back(os.str());
      if (sim.used_cholesky_fallback()) est.flags.push_back("cholesky_fallback");
      return est;
    }
    prev_value = value;
    prev_se = se;
    have_prev = true;
  }
  throw NumericError("piterbarg_estimate: no plateau within the S-doubling budget (alpha=" +
                     std::to_string(alpha) + ", R=" + std::to_string(R) + ")");
}

// ---------------------------------------------------------------------------
// ConstantsProvider

namespace {

// Tolerant key for caching/overrides: 1e-12-rounded fixed point.
long long quantize(double v) { return static_cast<long long>(std::llround(v * 1e12)); }

std::pair<int, std::pair<long long, long long>> make_key(ConstantKind kind, double alpha,
                                                         double R) {
  return {static_cast<int>(kind), {quantize(alpha), quantize(R)}};
}

}  // namespace

std::string constant_provenance_name(ConstantProvenance p) {
  return p == ConstantProvenance::Exact ? "EXACT" : "MC_ESTIMATE";
}

ConstantsProvider::ConstantsProvider(Mode mode, ConstantsBudget budget)
    : mode_(mode), budget_(budget) {}

std::optional<double> ConstantsProvider::exact_value(ConstantKind kind, double alpha,
                                                     double R) const {
  const double tol = 1e-12;
  if (kind == ConstantKind::Pickands) {
    if (std::abs(alpha - 1.0) <= tol) return 1.0;
    if (std::abs(alpha - 2.0) <= tol) return kInvSqrtPi;
  } else {
    if (std::abs(alpha - 1.0) <= tol) return 1.0 + 1.0 / R;
  }
  auto it = overrides_.find(make_key(kind, alpha, kind == ConstantKind::Pickands ? 0.0 : R));
  if (it != overrides_.end()) return it->second;
  return std::nullopt;
}

void ConstantsProvider::set_override(ConstantKind kind, double alpha, double R, double value) {
  const double tol = 1e-12;
  const bool builtin =
      (kind == ConstantKind::Pickands &&
       (std::abs(alpha - 1.0) <= tol || std::abs(alpha - 2.0) <= tol)) ||
      (kind == ConstantKind::Piterbarg && std::abs(alpha - 1.0) <= tol);
  if (builtin)
    throw std::invalid_argument("constants provider: built-in exact entries are immutable");
  overrides_[make_key(kind, alpha, kind == ConstantKind::Pickands ? 0.0 : R)] = value;
}

ConstantValue ConstantsProvider::lookup_or_estimate(ConstantKind kind, double alpha,
                                                    double R) const {
  if (auto exact = exact_value(kind, alpha, R))
    return ConstantValue{*exact, ConstantProvenance::Exact, 0.0};

  std::ostringstream name;
  name << (kind == ConstantKind::Pickands ? "Pickands H_{alpha/2} at alpha=" : "Piterbarg P_alpha^R at alpha=")
       << alpha;
  if (kind == ConstantKind::Piterbarg) name << ", R=" << R;

  if (mode_ == Mode::ExactOnly)
    throw NumericError("constants provider: no exact value for " + name.str() +
                       " and Monte-Carlo fallback is disabled");

  const auto key = make_key(kind, alpha, kind == ConstantKind::Pickands ? 0.0 : R);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  SimulationEstimate est;
  if (kind == ConstantKind::Pickands) {
    const double S = budget_.S > 0.0 ? budget_.S : default_pickands_horizon(alpha);
    est = pickands_estimate(alpha, S, budget_.grid_per_unit, budget_.reps, budget_.seed,
                            budget_.workers);
  } else {
    const double S = budget_.S > 0.0 ? std::max(10.0, budget_.S) : 10.0;
    est = piterbarg_estimate(alpha, R, S, budget_.grid_per_unit, budget_.reps, budget_.seed,
                             budget_.workers);
  }
  const ConstantValue value{est.value, ConstantProvenance::MonteCarlo, est.std_error};
  std::lock_guard<std::mutex> lock(mutex_);
  cache_[key] = value;
  return value;
}

ConstantValue ConstantsProvider::pickands(double alpha) const {
  require(alpha > 0.0 && alpha <= 2.0, "constants provider: alpha must be in (0,2]");
  return lookup_or_estimate(ConstantKind::Pickands, alpha, 0.0);
}

ConstantValue ConstantsProvider::piterbarg(double alpha, double R) const {
  require(alpha > 0.0 && alpha <= 2.0, "constants provider: alpha must be in (0,2]");
  require(R > 0.0, "constants provider: R must be positive");
  return lookup_or_estimate(ConstantKind::Piterbarg, alpha, R);
}

}  // namespace ruin
