#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ruin/fft.hpp"
#include "ruin/model.hpp"
#include "ruin/rng.hpp"
#include "ruin/stats.hpp"

namespace ruin {

// Uniform simulation grid: m intervals, nodes t_j = j T / m (t_m = T exactly).
struct GridPlan {
  std::size_t m = 4096;
  std::vector<std::size_t> refinement_levels;  // coarser nested levels for bias studies

  void validate() const;
};

// Fractional Gaussian noise on a uniform grid via circulant embedding.
// Falls back to a dense Cholesky factor when the embedding eigenvalues go
// negative (flagged, never silent).
class FgnSampler {
 public:
  FgnSampler(double hurst, std::size_t n, double dt);
  ~FgnSampler();
  FgnSampler(const FgnSampler&) = delete;
  FgnSampler& operator=(const FgnSampler&) = delete;

  std::size_t n() const { return n_; }
  bool used_cholesky_fallback() const { return fallback_; }
  void sample(RngStream& rng, double* increments) const;

 private:
  std::size_t n_;
  double hurst_, dt_;
  bool fallback_ = false;
  std::size_t embed_len_ = 0;
  std::vector<double> sqrt_eigenvalues_;
  std::unique_ptr<Fft> fft_;
  std::vector<double> chol_;  // row-major lower factor when falling back
};

// Samples one Gaussian component at the grid nodes t_1..t_m (X(0) = 0).
class ComponentSampler {
 public:
  virtual ~ComponentSampler() = default;
  virtual void sample(RngStream& rng, double* out) const = 0;
  virtual std::string kind() const = 0;
};

// Factory choosing the fastest exact sampler per family: circulant embedding
// for fBm, independent increments for Gaussian martingales (Bm, time-changed
// Bm), the line process for the degenerate H=1 kernels, dense Cholesky with a
// jitter ladder otherwise.
std::unique_ptr<ComponentSampler> make_component_sampler(const KernelSpec& kernel, double T,
                                                         std::size_t m,
                                                         std::vector<std::string>* notices);

class AggregateSampler {
 public:
  AggregateSampler(const AggregateModel& model, std::size_t m);

  std::size_t m() const { return m_; }
  double node(std::size_t j) const;  // t_j, 1-based
  // out has m entries: X(t_1)..X(t_m).
  void sample(RngStream& rng, std::span<double> out) const;
  const std::vector<std::string>& notices() const { return notices_; }

 private:
  double horizon_;
  std::size_t m_;
  std::vector<double> weights_;
  std::vector<std::unique_ptr<ComponentSampler>> samplers_;
  std::vector<std::string> notices_;
};

struct CrossingOptions {
  int workers = 1;
  std::string dump_path;  // optional binary per-path dump ("GPPATHS1" header)
};

struct CrossingResult {
  SimulationEstimate fine;
  std::vector<SimulationEstimate> coarse;  // one per refinement level, same paths
};

// Crude Monte-Carlo estimate of P(sup_j (X(t_j) - g(t_j)) > u). Coarse-level
// indicators are evaluated on strided subsets of the same paths, so
// coarse <= fine holds pathwise (the grid sup underestimates the continuous
// one; refining the grid can only raise the estimate).
CrossingResult crossing_prob_mc(const AggregateModel& model, double u, const GridPlan& grid,
                                std::size_t n, std::uint64_t seed, const CrossingOptions& opts = {});

// Mean-shift importance sampling towards X(T) = u + g(T) with the exact
// Gaussian likelihood-ratio weight; unbiased for the same grid functional.
SimulationEstimate crossing_prob_is(const AggregateModel& model, double u, const GridPlan& grid,
                                    std::size_t n, std::uint64_t seed, int workers = 1);

// Two-grid Richardson extrapolation with a pinned bias exponent kappa
// (p_m ~ p - c m^{-kappa}); the Bm gold configuration uses kappa = 1/2.
SimulationEstimate crossing_prob_extrapolated(const AggregateModel& model, double u,
                                              std::size_t m, double kappa, std::size_t n,
                                              std::uint64_t seed, int workers = 1);

struct ConvergenceRow {
  std::size_t m = 0;
  double p_hat = 0.0;
  double std_error = 0.0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  double fitted_exponent = 0.0;
  double extrapolated = 0.0;
  double extrapolated_std_error = 0.0;
  bool fit_ok = false;
  std::string to_csv() const;
};

// Nested-grid bias study; the extrapolation exponent is fitted from the last
// three levels (Aitken), never assumed.
ConvergenceStudy convergence_study(const AggregateModel& model, double u,
                                   const std::vector<std::size_t>& grids, std::size_t n,
                                   std::uint64_t seed, int workers = 1);

// Reads back a binary path dump (testing / external analysis).
struct PathDump {
  std::uint32_t m = 0;
  std::uint32_t n = 0;
  std::vector<double> values;  // row-major n x m
};
PathDump read_path_dump(const std::string& path);

}  // namespace ruin
