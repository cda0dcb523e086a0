#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ruin/constants.hpp"
#include "ruin/gp_sim.hpp"
#include "ruin/model.hpp"
#include "ruin/rng.hpp"
#include "ruin/stats.hpp"

namespace ruin {

// Claim size distribution; Weibull with shape tau in (0,1) sits in the
// heavy-tailed class H.
class ClaimDist {
 public:
  enum class Kind { Weibull, TabulatedQuantile };

  static ClaimDist weibull(double tau);
  static ClaimDist tabulated_quantile(std::vector<double> probs, std::vector<double> quantiles);

  Kind kind() const { return kind_; }
  double tau() const { return tau_; }
  double sample(RngStream& rng) const;
  double survival(double x) const;

 private:
  ClaimDist() = default;
  Kind kind_ = Kind::Weibull;
  double tau_ = 0.5;
  std::vector<double> probs_, quantiles_;
};

struct LevyModel {
  enum class Kind { CompoundPoisson, AlphaStable };

  static LevyModel compound_poisson(double mu, ClaimDist claim, double premium_rate);
  static LevyModel alpha_stable(double alpha, double beta_skew, double premium_rate);

  Kind kind = Kind::CompoundPoisson;
  double mu = 1.0;  // arrival rate
  ClaimDist claim = ClaimDist::weibull(0.5);
  double alpha = 1.5;
  double beta_skew = 0.0;
  double premium_rate = 0.0;  // c(t) = premium_rate * t

  void validate() const;
};

// Claim surplus plus an independent aggregate Gaussian perturbation. The
// perturbation model must carry a zero trend (the premium lives in the Levy
// part) and share the horizon.
struct PerturbedModel {
  LevyModel levy;
  std::optional<AggregateModel> gaussian;
  double horizon = 1.0;

  void validate() const;
};

struct JumpBatch {
  std::vector<double> times;   // sorted ascending
  std::vector<double> claims;  // same length
};

JumpBatch sample_compound_poisson_jumps(double mu, const ClaimDist& claim, double T,
                                        RngStream& rng);

// sup over [0,T] of U(t) - c t for a pure-jump nondecreasing U and linear
// premium: attained at t=0 (value 0) or at a jump instant; exact, no grid.
double claim_surplus_sup(std::span<const double> jump_times, std::span<const double> claims,
                         double premium_rate);

// Exact samples of sup_{[0,T]}(U(t) - c(t)) for the compound Poisson model.
std::vector<double> compound_poisson_sup(const LevyModel& model, double T, std::size_t n,
                                         std::uint64_t seed, int workers = 1);

// One standardized S_alpha(1, beta, 0) draw (Chambers-Mallows-Stuck in the
// Samorodnitsky-Taqqu parameterization, alpha != 1).
double stable_standard_draw(double alpha, double beta_skew, RngStream& rng);

std::vector<double> stable_sample(double alpha, double beta_skew, double scale, std::size_t n,
                                  std::uint64_t seed, int workers = 1);

// Empirical P(U(T) > u) for the alpha-stable Levy endpoint (exact: one draw
// per replicate, U(T) ~ S_alpha(T^{1/alpha}, beta, 0)).
std::vector<SimulationEstimate> stable_endpoint_exceedance(double alpha, double beta_skew,
                                                           double T,
                                                           const std::vector<double>& u_grid,
                                                           std::size_t n, std::uint64_t seed,
                                                           int workers = 1);

// psi_tilde(u, c, T): ruin probability of the perturbed process by Monte
// Carlo. Compound-Poisson surpluses are evaluated at jump instants plus grid
// nodes; stable surpluses use grid increments (bias documented, not removed).
SimulationEstimate perturbed_ruin_mc(const PerturbedModel& model, double u, const GridPlan& grid,
                                     std::size_t n, std::uint64_t seed, int workers = 1);

double tail_asymptote_weibull(double u, double mu, double T, double tau);
double tail_asymptote_stable(double u, double alpha, double beta_skew, double T);

// Insensitivity probe on the claim-tail asymptote: F1_bar(u + sqrt(u)) /
// F1_bar(u). Tends to 1 exactly when sqrt(u) is an admissible d(u) for the
// claim tail (Weibull: tau < 1/2).
double f1_insensitivity_ratio(const LevyModel& model, double u);

struct TailEquivalenceRow {
  double u = 0.0;
  SimulationEstimate psi_tilde;
  SimulationEstimate psi;
  double asymptote = 0.0;
  double ratio_tilde = 0.0;
  double ratio = 0.0;
  double hypothesis_ratio = 0.0;  // (1 - F2 asym) / (1 - F1 asym)
  std::vector<std::string> flags;
};

struct TailEquivalenceReport {
  std::vector<TailEquivalenceRow> rows;
  bool hypothesis_decreasing = false;
  bool ratios_drift_to_one = false;
  std::string banner;  // nonempty on hypothesis violation
  std::string to_csv() const;
};

struct ReportBudget {
  std::size_t m = 4096;
  std::size_t n = 100000;
  std::uint64_t seed = 1;
  int workers = 1;
};

// Ratio table over the u grid: psi_tilde/asymptote, psi/asymptote and the
// hypothesis column, all from one simulation pass (both estimators share the
// Levy replicates; the Gaussian component uses a disjoint stream).
TailEquivalenceReport tail_equivalence_report(const PerturbedModel& model,
                                              const std::vector<double>& u_grid,
                                              const ReportBudget& budget,
                                              const ConstantsProvider& provider);

}  // namespace ruin
