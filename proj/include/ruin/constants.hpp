#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "ruin/stats.hpp"

namespace ruin {

enum class ConstantKind { Pickands, Piterbarg };
enum class ConstantProvenance { Exact, MonteCarlo };

struct ConstantValue {
  double value = 0.0;
  ConstantProvenance provenance = ConstantProvenance::Exact;
  double std_error = 0.0;  // zero for exact entries
};

// Monte-Carlo budget for the constant estimators. S <= 0 picks the
// alpha-aware default horizon (see pickands_estimate docs).
struct ConstantsBudget {
  double S = 0.0;
  int grid_per_unit = 128;
  std::size_t reps = 400000;
  std::uint64_t seed = 20240901;
  int workers = 1;
};

// Estimates the Pickands constant H_{alpha/2} from its defining limit
// T^{-1} E exp(sup_{[0,T]} (sqrt(2) B_{alpha/2}(t) - t^alpha)) evaluated at
// the two horizons S and S/2 on the same paths, combined by Richardson
// extrapolation in 1/T. The horizon must stay moderate: levels up to ~S^alpha
// contribute equally to the expectation, so the replicate budget needed grows
// like exp(S^alpha). The default S = max(2, 4^(1/alpha)) keeps that scale at
// ~4 where the extrapolation is already exact up to grid bias.
SimulationEstimate pickands_estimate(double alpha, double S, int grid_per_unit, std::size_t reps,
                                     std::uint64_t seed, int workers = 1);

// Estimates the Piterbarg constant P_alpha^R = lim_S E exp(sup_{[0,S]}
// (sqrt(2) B_{alpha/2}(t) - (1+R) t^alpha)). Doubles S from the given start
// until the estimate moves by less than half a combined standard error;
// no plateau within the doubling budget is an explicit failure.
SimulationEstimate piterbarg_estimate(double alpha, double R, double S, int grid_per_unit,
                                      std::size_t reps, std::uint64_t seed, int workers = 1);

double default_pickands_horizon(double alpha);

// Exact table + optional Monte-Carlo fallback, with a cache keyed by
// (kind, alpha, R, budget). The three built-in exact entries
// (H_{1/2}=1, H_1=1/sqrt(pi), P_1^R=1+1/R) are immutable; set_override may
// only add entries outside them (used to pin unknown constants symbolically).
class ConstantsProvider {
 public:
  enum class Mode { ExactOnly, McFallback };

  explicit ConstantsProvider(Mode mode = Mode::ExactOnly, ConstantsBudget budget = {});

  ConstantValue pickands(double alpha) const;
  ConstantValue piterbarg(double alpha, double R) const;

  void set_override(ConstantKind kind, double alpha, double R, double value);

  Mode mode() const { return mode_; }
  const ConstantsBudget& budget() const { return budget_; }

 private:
  ConstantValue lookup_or_estimate(ConstantKind kind, double alpha, double R) const;
  std::optional<double> exact_value(ConstantKind kind, double alpha, double R) const;

  Mode mode_;
  ConstantsBudget budget_;
  std::map<std::pair<int, std::pair<long long, long long>>, double> overrides_;
  mutable std::map<std::pair<int, std::pair<long long, long long>>, ConstantValue> cache_;
  mutable std::mutex mutex_;
};

std::string constant_provenance_name(ConstantProvenance p);

}  // namespace ruin
