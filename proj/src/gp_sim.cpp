#include "ruin/gp_sim.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ruin/errors.hpp"
#include "ruin/parallel.hpp"

namespace ruin {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// fGn autocovariance at lag k for unit spacing, scaled by dt^{2H}.
double fgn_autocov(double hurst, double dt, std::size_t k) {
  const double h2 = 2.0 * hurst;
  const double kk = static_cast<double>(k);
  const double v = 0.5 * (std::pow(kk + 1.0, h2) - 2.0 * std::pow(kk, h2) +
                          std::pow(std::abs(kk - 1.0), h2));
  return std::pow(dt, h2) * v;
}

// Dense lower-triangular factor with the jitter ladder 0, 1e-12, 1e-10, 1e-8
// times trace; first success wins.
std::vector<double> cholesky_with_jitter(Eigen::MatrixXd sigma, int* level_used) {
  const double trace = sigma.trace();
  const double levels[] = {0.0, 1e-12, 1e-10, 1e-8};
  for (int lvl = 0; lvl < 4; ++lvl) {
    Eigen::MatrixXd jittered = sigma;
    if (levels[lvl] > 0.0)
      jittered.diagonal().array() += levels[lvl] * trace;
    Eigen::LLT<Eigen::MatrixXd> llt(jittered);
    if (llt.info() == Eigen::Success) {
      if (level_used) *level_used = lvl;
      const Eigen::MatrixXd L = llt.matrixL();
      const std::size_t n = static_cast<std::size_t>(L.rows());
      std::vector<double> out(n * n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) out[i * n + j] = L(i, j);
      return out;
    }
  }
  throw NumericError("covariance factorization failed after max jitter 1e-8 * trace");
}

}  // namespace

void GridPlan::validate() const {
  require(m >= 2, "grid plan: need at least 2 intervals");
  for (std::size_t lvl : refinement_levels) {
    require(lvl >= 2 && lvl < m, "grid plan: refinement level must be in [2, m)");
    require(m % lvl == 0, "grid plan: refinement levels must divide m (nested grids)");
  }
}

// ---------------------------------------------------------------------------
// FgnSampler

FgnSampler::FgnSampler(double hurst, std::size_t n, double dt)
    : n_(n), hurst_(hurst), dt_(dt) {
  require(hurst > 0.0 && hurst < 1.0, "fgn sampler: H must be in (0,1)");
  require(n >= 1 && dt > 0.0, "fgn sampler: need n >= 1 and dt > 0");

  const std::size_t half = next_pow2(n);
  const std::size_t len = 2 * half;
  std::vector<std::complex<double>> c(len), lambda(len);
  for (std::size_t k = 0; k <= half; ++k) c[k] = fgn_autocov(hurst, dt, k);
  for (std::size_t k = 1; k < half; ++k) c[len - k] = c[k];
  Fft fft(len);
  fft.forward(c.data(), lambda.data());

  double min_ev = lambda[0].real(), max_ev = lambda[0].real();
  for (const auto& v : lambda) {
    min_ev = std::min(min_ev, v.real());
    max_ev = std::max(max_ev, v.real());
  }
  if (min_ev < -1e-9 * std::max(max_ev, 1e-300)) {
    // Embedding failed; dense factorization of the fGn covariance instead.
    fallback_ = true;
    Eigen::MatrixXd sigma(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        sigma(i, j) = fgn_autocov(hurst, dt, i > j ? i - j : j - i);
    chol_ = cholesky_with_jitter(std::move(sigma), nullptr);
    return;
  }
  embed_len_ = len;
  sqrt_eigenvalues_.resize(len);
  for (std::size_t k = 0; k < len; ++k)
    sqrt_eigenvalues_[k] = std::sqrt(std::max(0.0, lambda[k].real()));
  fft_ = std::make_unique<Fft>(len);
}

FgnSampler::~FgnSampler() = default;

void FgnSampler::sample(RngStream& rng, double* increments) const {
  if (fallback_) {
    thread_local std::vector<double> z;
    z.resize(n_);
    for (double& v : z) v = rng.normal();
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = 0.0;
      const double* row = chol_.data() + i * n_;
      for (std::size_t j = 0; j <= i; ++j) acc += row[j] * z[j];
      increments[i] = acc;
    }
    return;
  }

  const std::size_t len = embed_len_;
  const std::size_t half = len / 2;
  thread_local std::vector<std::complex<double>> spec, out;
  spec.resize(len);
  out.resize(len);

  spec[0] = sqrt_eigenvalues_[0] * rng.normal();
  spec[half] = sqrt_eigenvalues_[half] * rng.normal();
  const double inv_sqrt2 = 0.70710678118654752440;
  for (std::size_t k = 1; k < half; ++k) {
    const double re = rng.normal() * inv_sqrt2;
    const double im = rng.normal() * inv_sqrt2;
    spec[k] = sqrt_eigenvalues_[k] * std::complex<double>(re, im);
    spec[len - k] = std::conj(spec[k]);
  }
  fft_->forward(spec.data(), out.data());
  const double scale = 1.0 / std::sqrt(static_cast<double>(len));
  for (std::size_t j = 0; j < n_; ++j) increments[j] = out[j].real() * scale;
}

// ---------------------------------------------------------------------------
// Component samplers

namespace {

class IndependentIncrementSampler final : public ComponentSampler {
 public:
  IndependentIncrementSampler(const KernelSpec& kernel, double T, std::size_t m) {
    sds_.resize(m);
    double prev = 0.0;
    for (std::size_t j = 1; j <= m; ++j) {
      const double t = T * static_cast<double>(j) / static_cast<double>(m);
      const double v = kernel.variance(t);
      sds_[j - 1] = std::sqrt(std::max(0.0, v - prev));
      prev = v;
    }
  }
  void sample(RngStream& rng, double* out) const override {
    double acc = 0.0;
    for (std::size_t j = 0; j < sds_.size(); ++j) {
      acc += sds_[j] * rng.normal();
      out[j] = acc;
    }
  }
  std::string kind() const override { return "independent-increments"; }

 private:
  std::vector<double> sds_;
};

class LineSampler final : public ComponentSampler {
 public:
  LineSampler(double T, std::size_t m) {
    nodes_.resize(m);
    for (std::size_t j = 1; j <= m; ++j)
      nodes_[j - 1] = T * static_cast<double>(j) / static_cast<double>(m);
  }
  void sample(RngStream& rng, double* out) const override {
    const double z = rng.normal();
    for (std::size_t j = 0; j < nodes_.size(); ++j) out[j] = nodes_[j] * z;
  }
  std::string kind() const override { return "line"; }

 private:
  std::vector<double> nodes_;
};

class FbmCirculantSampler final : public ComponentSampler {
 public:
  FbmCirculantSampler(double hurst, double T, std::size_t m)
      : fgn_(hurst, m, T / static_cast<double>(m)) {}
  void sample(RngStream& rng, double* out) const override {
    fgn_.sample(rng, out);
    for (std::size_t j = 1; j < fgn_.n(); ++j) out[j] += out[j - 1];
  }
  std::string kind() const override {
    return fgn_.used_cholesky_fallback() ? "circulant(cholesky-fallback)" : "circulant";
  }
  bool fallback() const { return fgn_.used_cholesky_fallback(); }

 private:
  FgnSampler fgn_;
};

class CholeskySampler final : public ComponentSampler {
 public:
  CholeskySampler(const KernelSpec& kernel, double T, std::size_t m, int* jitter_level)
      : m_(m) {
    Eigen::MatrixXd sigma(m, m);
    std::vector<double> nodes(m);
    for (std::size_t j = 1; j <= m; ++j)
      nodes[j - 1] = T * static_cast<double>(j) / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        const double v = kernel.cov(nodes[i], nodes[j]);
        sigma(i, j) = v;
        sigma(j, i) = v;
      }
    chol_ = cholesky_with_jitter(std::move(sigma), jitter_level);
  }
  void sample(RngStream& rng, double* out) const override {
    thread_local std::vector<double> z;
    z.resize(m_);
    for (double& v : z) v = rng.normal();
    for (std::size_t i = 0; i < m_; ++i) {
      double acc = 0.0;
      const double* row = chol_.data() + i * m_;
      for (std::size_t j = 0; j <= i; ++j) acc += row[j] * z[j];
      out[i] = acc;
    }
  }
  std::string kind() const override { return "cholesky"; }

 private:
  std::size_t m_;
  std::vector<double> chol_;
};

}  // namespace

std::unique_ptr<ComponentSampler> make_component_sampler(const KernelSpec& kernel, double T,
                                                         std::size_t m,
                                                         std::vector<std::string>* notices) {
  require(T > 0.0 && m >= 1, "component sampler: need T > 0 and m >= 1");
  switch (kernel.family()) {
    case KernelFamily::Fbm:
      if (kernel.degenerate_line()) return std::make_unique<LineSampler>(T, m);
      if (kernel.hurst() == 0.5) return std::make_unique<IndependentIncrementSampler>(kernel, T, m);
      {
        auto s = std::make_unique<FbmCirculantSampler>(kernel.hurst(), T, m);
        if (s->fallback() && notices)
          notices->push_back("circulant embedding eigenvalues went negative for fbm H=" +
                             std::to_string(kernel.hurst()) + "; using Cholesky fallback");
        return s;
      }
    case KernelFamily::TimeChangedBm:
      return std::make_unique<IndependentIncrementSampler>(kernel, T, m);
    case KernelFamily::TimeAvgFbm:
      if (kernel.degenerate_line()) return std::make_unique<LineSampler>(T, m);
      [[fallthrough]];
    case KernelFamily::SubFbm:
    case KernelFamily::BiFbm:
    case KernelFamily::Tabulated: {
      int level = 0;
      auto s = std::make_unique<CholeskySampler>(kernel, T, m, &level);
      if (level > 0 && notices)
        notices->push_back("cholesky jitter level " + std::to_string(level) + " used for " +
                           family_name(kernel.family()));
      return s;
    }
  }
  throw std::logic_error("unreachable kernel family");
}

AggregateSampler::AggregateSampler(const AggregateModel& model, std::size_t m)
    : horizon_(model.horizon), m_(m) {
  model.validate();
  require(m >= 1, "aggregate sampler: need m >= 1");
  for (const auto& c : model.components) {
    weights_.push_back(c.weight);
    samplers_.push_back(make_component_sampler(c.kernel, model.horizon, m, &notices_));
  }
}

double AggregateSampler::node(std::size_t j) const {
  return horizon_ * static_cast<double>(j) / static_cast<double>(m_);
}

void AggregateSampler::sample(RngStream& rng, std::span<double> out) const {
  require(out.size() == m_, "aggregate sampler: output span size mismatch");
  if (samplers_.size() == 1) {
    samplers_[0]->sample(rng, out.data());
    if (weights_[0] != 1.0)
      for (double& v : out) v *= weights_[0];
    return;
  }
  thread_local std::vector<double> comp;
  comp.resize(m_);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < samplers_.size(); ++i) {
    samplers_[i]->sample(rng, comp.data());
    const double w = weights_[i];
    for (std::size_t j = 0; j < m_; ++j) out[j] += w * comp[j];
  }
}

// ---------------------------------------------------------------------------
// Crossing probability estimators

namespace {

constexpr std::size_t kChunkSize = 4096;

struct CrossingCounts {
  std::size_t n = 0;
  ChunkPlan plan;
  // hits[c][0] = fine level, then one slot per refinement level.
  std::vector<std::vector<std::size_t>> hits;
};

// Core crude-MC engine: per-chunk hit counts at the fine grid and every
// nested refinement level, computed from the same paths.
CrossingCounts crossing_counts(const AggregateModel& model, double u, const GridPlan& grid,
                               std::size_t n, std::uint64_t seed, const CrossingOptions& opts) {
  model.validate();
  grid.validate();
  require(n >= 1000, "crossing_prob_mc: need n >= 1e3");

  const std::size_t m = grid.m;
  const AggregateSampler sampler(model, m);
  std::vector<double> g(m);
  for (std::size_t j = 1; j <= m; ++j) g[j - 1] = model.trend.at(sampler.node(j));
  const bool base_cross = -model.trend.at(0.0) > u;

  const std::size_t nlevels = grid.refinement_levels.size();
  std::vector<std::size_t> strides(nlevels);
  for (std::size_t l = 0; l < nlevels; ++l) strides[l] = m / grid.refinement_levels[l];

  CrossingCounts out;
  out.n = n;
  out.plan = ChunkPlan{n, kChunkSize};
  const std::size_t nchunks = out.plan.num_chunks();
  out.hits.assign(nchunks, std::vector<std::size_t>(1 + nlevels, 0));

  const bool dumping = !opts.dump_path.empty();
  if (dumping) {
    std::ofstream f(opts.dump_path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot create path dump file: " + opts.dump_path);
    f.write("GPPATHS1", 8);
    const std::uint32_t m32 = static_cast<std::uint32_t>(m);
    const std::uint32_t n32 = static_cast<std::uint32_t>(n);
    f.write(reinterpret_cast<const char*>(&m32), 4);
    f.write(reinterpret_cast<const char*>(&n32), 4);
  }

  parallel_chunks(nchunks, opts.workers, [&](std::size_t c) {
    RngStream rng(seed, c);
    std::vector<double> x(m);
    std::vector<double> dump_buf;
    const std::size_t reps = out.plan.size(c);
    if (dumping) dump_buf.reserve(reps * m);
    auto& slot = out.hits[c];
    for (std::size_t r = 0; r < reps; ++r) {
      sampler.sample(rng, x);
      if (dumping) dump_buf.insert(dump_buf.end(), x.begin(), x.end());
      double fine_max = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < m; ++j) fine_max = std::max(fine_max, x[j] - g[j]);
      if (base_cross || fine_max > u) ++slot[0];
      for (std::size_t l = 0; l < nlevels; ++l) {
        const std::size_t s = strides[l];
        double lvl_max = -std::numeric_limits<double>::infinity();
        for (std::size_t j = s - 1; j < m; j += s) lvl_max = std::max(lvl_max, x[j] - g[j]);
        if (base_cross || lvl_max > u) ++slot[1 + l];
      }
    }
    if (dumping) {
      std::ofstream f(opts.dump_path, std::ios::binary | std::ios::in | std::ios::out);
      if (!f) throw IoError("cannot reopen path dump file: " + opts.dump_path);
      f.seekp(static_cast<std::streamoff>(16 + out.plan.begin(c) * m * sizeof(double)));
      f.write(reinterpret_cast<const char*>(dump_buf.data()),
              static_cast<std::streamsize>(dump_buf.size() * sizeof(double)));
      if (!f) throw IoError("short write to path dump file: " + opts.dump_path);
    }
  });
  return out;
}

std::size_t total_hits(const CrossingCounts& counts, std::size_t level) {
  std::size_t h = 0;
  for (const auto& c : counts.hits) h += c[level];
  return h;
}

}  // namespace

CrossingResult crossing_prob_mc(const AggregateModel& model, double u, const GridPlan& grid,
                                std::size_t n, std::uint64_t seed, const CrossingOptions& opts) {
  const CrossingCounts counts = crossing_counts(model, u, grid, n, seed, opts);
  CrossingResult res;
  binomial_estimate(res.fine, total_hits(counts, 0), n);
  res.fine.method = "crude";
  res.fine.grid_m = grid.m;
  res.fine.seed = seed;
  for (std::size_t l = 0; l < grid.refinement_levels.size(); ++l) {
    SimulationEstimate e;
    binomial_estimate(e, total_hits(counts, 1 + l), n);
    e.method = "crude";
    e.grid_m = grid.refinement_levels[l];
    e.seed = seed;
    res.coarse.push_back(std::move(e));
  }
  return res;
}

SimulationEstimate crossing_prob_is(const AggregateModel& model, double u, const GridPlan& grid,
                                    std::size_t n, std::uint64_t seed, int workers) {
  model.validate();
  grid.validate();
  require(n >= 1000, "crossing_prob_is: need n >= 1e3");

  const std::size_t m = grid.m;
  const double T = model.horizon;
  const double var_T = model.cov(T, T);
  if (!(var_T > 0.0)) throw NumericError("crossing_prob_is: Var(X(T)) must be positive");

  const AggregateSampler sampler(model, m);
  std::vector<double> g(m), shift(m);
  for (std::size_t j = 1; j <= m; ++j) g[j - 1] = model.trend.at(sampler.node(j));
  const double g_T = g[m - 1];
  const double theta = (u + g_T) / var_T;
  for (std::size_t j = 1; j <= m; ++j)
    shift[j - 1] = theta * model.cov(sampler.node(j), T);
  const double log_w_const = 0.5 * theta * theta * var_T;
  const bool base_cross = -model.trend.at(0.0) > u;

  struct ChunkSums {
    double sw = 0.0, sw2 = 0.0, tw = 0.0, tw2 = 0.0;
  };
  const ChunkPlan plan{n, kChunkSize};
  const std::size_t nchunks = plan.num_chunks();
  std::vector<ChunkSums> sums(nchunks);

  parallel_chunks(nchunks, workers, [&](std::size_t c) {
    RngStream rng(seed, c);
    std::vector<double> x(m);
    ChunkSums local;
    const std::size_t reps = plan.size(c);
    for (std::size_t r = 0; r < reps; ++r) {
      sampler.sample(rng, x);
      for (std::size_t j = 0; j < m; ++j) x[j] += shift[j];
      const double w = std::exp(-theta * x[m - 1] + log_w_const);
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < m; ++j) best = std::max(best, x[j] - g[j]);
      const bool hit = base_cross || best > u;
      local.tw += w;
      local.tw2 += w * w;
      if (hit) {
        local.sw += w;
        local.sw2 += w * w;
      }
    }
    sums[c] = local;
  });

  double sw = 0.0, sw2 = 0.0, tw = 0.0, tw2 = 0.0;
  for (const auto& s : sums) {
    sw += s.sw;
    sw2 += s.sw2;
    tw += s.tw;
    tw2 += s.tw2;
  }
  SimulationEstimate est;
  const double dn = static_cast<double>(n);
  est.value = sw / dn;
  const double var = std::max(0.0, (sw2 - dn * est.value * est.value) / (dn - 1.0));
  est.std_error = std::sqrt(var / dn);
  est.n = n;
  est.ci_lo = est.value - 1.959963984540054 * est.std_error;
  est.ci_hi = est.value + 1.959963984540054 * est.std_error;
  est.method = "importance";
  est.grid_m = m;
  est.seed = seed;
  est.ess = tw2 > 0.0 ? tw * tw / tw2 : 0.0;
  if (est.ess < 50.0) est.flags.push_back("low_ess");
  return est;
}

SimulationEstimate crossing_prob_extrapolated(const AggregateModel& model, double u,
                                              std::size_t m, double kappa, std::size_t n,
                                              std::uint64_t seed, int workers) {
  require(m >= 4 && m % 2 == 0, "crossing_prob_extrapolated: m must be even and >= 4");
  require(kappa > 0.0, "crossing_prob_extrapolated: kappa must be positive");
  GridPlan grid{m, {m / 2}};
  CrossingOptions opts;
  opts.workers = workers;
  const CrossingCounts counts = crossing_counts(model, u, grid, n, seed, opts);
  const std::size_t hf = total_hits(counts, 0);
  const std::size_t hc = total_hits(counts, 1);

  // Per path Y = I_fine + a (I_fine - I_coarse); I_coarse <= I_fine always,
  // so Y takes values {0, 1, 1+a} with counts derivable from the two hits.
  const double a = 1.0 / (std::pow(2.0, kappa) - 1.0);
  const double n11 = static_cast<double>(hc);
  const double n10 = static_cast<double>(hf - hc);
  const double dn = static_cast<double>(n);
  const double sum_y = n11 + (1.0 + a) * n10;
  const double sum_y2 = n11 + (1.0 + a) * (1.0 + a) * n10;

  SimulationEstimate est;
  est.value = sum_y / dn;
  const double var = std::max(0.0, (sum_y2 - dn * est.value * est.value) / (dn - 1.0));
  est.std_error = std::sqrt(var / dn);
  est.n = n;
  est.ci_lo = est.value - 1.959963984540054 * est.std_error;
  est.ci_hi = est.value + 1.959963984540054 * est.std_error;
  est.method = "crude-extrapolated";
  est.grid_m = m;
  est.seed = seed;
  est.flags.push_back("kappa=" + std::to_string(kappa));
  return est;
}

ConvergenceStudy convergence_study(const AggregateModel& model, double u,
                                   const std::vector<std::size_t>& grids, std::size_t n,
                                   std::uint64_t seed, int workers) {
  require(grids.size() >= 2, "convergence_study: need at least two grids");
  std::vector<std::size_t> sorted = grids;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t fine = sorted.back();
  GridPlan grid{fine, {}};
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) grid.refinement_levels.push_back(sorted[i]);
  CrossingOptions opts;
  opts.workers = workers;
  const CrossingCounts counts = crossing_counts(model, u, grid, n, seed, opts);

  // level index within `counts`: coarse levels first (1..), fine is 0.
  auto level_hits = [&](std::size_t rank, const std::vector<std::vector<std::size_t>>& hits) {
    // rank within sorted ascending; last rank = fine.
    std::size_t idx = rank + 1 == sorted.size() ? 0 : 1 + rank;
    std::size_t h = 0;
    for (const auto& c : hits) h += c[idx];
    return h;
  };

  ConvergenceStudy study;
  const double dn = static_cast<double>(n);
  for (std::size_t r = 0; r < sorted.size(); ++r) {
    ConvergenceRow row;
    row.m = sorted[r];
    const double p = static_cast<double>(level_hits(r, counts.hits)) / dn;
    row.p_hat = p;
    row.std_error = std::sqrt(std::max(0.0, p * (1.0 - p)) / dn);
    study.rows.push_back(row);
  }

  auto aitken = [&](const std::vector<std::vector<std::size_t>>& hits, std::size_t nn,
                    double* exponent) -> double {
    const std::size_t k = sorted.size();
    const double p1 = static_cast<double>(level_hits(k - 3, hits)) / static_cast<double>(nn);
    const double p2 = static_cast<double>(level_hits(k - 2, hits)) / static_cast<double>(nn);
    const double p3 = static_cast<double>(level_hits(k - 1, hits)) / static_cast<double>(nn);
    const double g1 = p2 - p1, g2 = p3 - p2;
    if (!(g1 > 0.0) || !(g2 > 0.0) || !(g1 > g2)) return std::numeric_limits<double>::quiet_NaN();
    if (exponent) {
      const double rho = static_cast<double>(sorted[k - 1]) / static_cast<double>(sorted[k - 2]);
      *exponent = std::log(g1 / g2) / std::log(rho);
    }
    return p3 + g2 * g2 / (g1 - g2);
  };

  study.extrapolated = study.rows.back().p_hat;
  study.extrapolated_std_error = study.rows.back().std_error;
  study.fitted_exponent = std::numeric_limits<double>::quiet_NaN();
  if (sorted.size() >= 3) {
    const double ratio32 = static_cast<double>(sorted[sorted.size() - 1]) /
                           static_cast<double>(sorted[sorted.size() - 2]);
    const double ratio21 = static_cast<double>(sorted[sorted.size() - 2]) /
                           static_cast<double>(sorted[sorted.size() - 3]);
    if (std::abs(ratio32 - ratio21) < 1e-9) {
      const double extrap = aitken(counts.hits, n, &study.fitted_exponent);
      if (std::isfinite(extrap)) {
        study.fit_ok = true;
        study.extrapolated = extrap;
        // Jackknife over chunks on the full extrapolation statistic.
        const std::size_t nchunks = counts.hits.size();
        study.extrapolated_std_error = jackknife_std_error(
            counts.hits, [&](std::size_t leave_out) {
              std::vector<std::vector<std::size_t>> rest;
              rest.reserve(nchunks - 1);
              std::size_t nn = 0;
              for (std::size_t c = 0; c < nchunks; ++c) {
                if (c == leave_out) continue;
                rest.push_back(counts.hits[c]);
                nn += counts.plan.size(c);
              }
              const double v = aitken(rest, nn, nullptr);
              return std::isfinite(v) ? v : study.rows.back().p_hat;
            });
      }
    }
  }
  return study;
}

std::string ConvergenceStudy::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "kind,m,p_hat,std_error,fitted_exponent,extrapolated,extrapolated_std_error\n";
  for (const auto& row : rows)
    os << "level," << row.m << ',' << row.p_hat << ',' << row.std_error << ",,,\n";
  os << "extrapolation,,,," << fitted_exponent << ',' << extrapolated << ','
     << extrapolated_std_error << '\n';
  return os.str();
}

PathDump read_path_dump(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open path dump: " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, "GPPATHS1", 8) != 0)
    throw IoError("bad path dump magic in " + path);
  PathDump dump;
  f.read(reinterpret_cast<char*>(&dump.m), 4);
  f.read(reinterpret_cast<char*>(&dump.n), 4);
  if (!f) throw IoError("truncated path dump header in " + path);
  dump.values.resize(static_cast<std::size_t>(dump.m) * dump.n);
  f.read(reinterpret_cast<char*>(dump.values.data()),
         static_cast<std::streamsize>(dump.values.size() * sizeof(double)));
  if (!f) throw IoError("truncated path dump body in " + path);
  return dump;
}

}  // namespace ruin
