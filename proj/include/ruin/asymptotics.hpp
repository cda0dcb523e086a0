#pragma once

#include <string>
#include <vector>

#include "ruin/constants.hpp"
#include "ruin/model.hpp"
#include "ruin/psi.hpp"

namespace ruin {

enum class Regime { AlphaLtBeta, AlphaEqBeta, AlphaGtBeta };

std::string regime_name(Regime r);

// Aggregated A1 data entering the first-order asymptotic: variance at the
// horizon, minimal exponents, and the indicator-weighted sums N~ and G~.
struct AggregateParams {
  double sigma2 = 0.0;  // sum of weight^2 sigma_tilde^2
  double alpha = 0.0;   // min over components
  double beta = 0.0;    // min over components
  double n_tilde = 0.0;
  double g_tilde = 0.0;
  Regime regime = Regime::AlphaGtBeta;
  std::vector<LocalExpansion> expansions;
};

// Components whose exponent sits within this absolute tolerance of the
// minimum count as attaining it (exact-arithmetic indicators need a rule).
inline constexpr double kExponentTieTolerance = 1e-12;

AggregateParams aggregate_parameters(const AggregateModel& model,
                                     const ExpansionOptions& opts = {});

struct AsymptoticResult {
  Regime regime = Regime::AlphaGtBeta;
  double constant = 1.0;
  double theta = 1.0;
  double tail_arg = 0.0;
  double value = 0.0;
  double log_value = 0.0;
  ConstantProvenance provenance = ConstantProvenance::Exact;
  double constant_std_error = 0.0;
};

struct AsymptoticOptions {
  ExpansionOptions expansion;
  double nu_fraction = 0.5;  // trend condition checked on [nu_fraction*T, T]
  bool check_trend = true;
};

// Leading constant C_{alpha,beta} of the first-order asymptotic.
double leading_constant(const AggregateParams& params, const ConstantsProvider& provider,
                        ConstantProvenance* provenance = nullptr, double* std_error = nullptr);

// Exact first-order asymptotic of P(sup_{[0,T]}(X(t) - g(t)) > u) as u grows:
// C * theta(u) * Psi((u + g(T)) / sqrt(sigma2)).
AsymptoticResult ruin_asymptotic(const AggregateModel& model, double u,
                                 const ConstantsProvider& provider,
                                 const AsymptoticOptions& opts = {});

// Closed forms for homogeneous models; each equals ruin_asymptotic to within
// floating-point roundoff when the same constants provider is used.
double corollary_bifbm(const AggregateModel& model, double u, const ConstantsProvider& provider);
double corollary_subfbm(const AggregateModel& model, double u, const ConstantsProvider& provider);
double example2_closed_form(const AggregateModel& model, double u);

}  // namespace ruin
