#include "ruin/asymptotics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ruin/errors.hpp"

namespace ruin {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace

void AggregateModel::validate() const {
  require(!components.empty(), "aggregate model: need at least one component");
  require(horizon > 0.0, "aggregate model: horizon must be positive");
  for (std::size_t i = 0; i < components.size(); ++i)
    require(components[i].weight > 0.0, "aggregate model: component[" + std::to_string(i) +
                                            "].weight must be positive");
}

double AggregateModel::cov(double s, double t) const {
  double acc = 0.0;
  for (const auto& c : components) acc += c.weight * c.weight * c.kernel.cov(s, t);
  return acc;
}

std::string regime_name(Regime r) {
  switch (r) {
    case Regime::AlphaLtBeta: return "ALPHA_LT_BETA";
    case Regime::AlphaEqBeta: return "ALPHA_EQ_BETA";
    case Regime::AlphaGtBeta: return "ALPHA_GT_BETA";
  }
  return "unknown";
}

AggregateParams aggregate_parameters(const AggregateModel& model, const ExpansionOptions& opts) {
  model.validate();
  AggregateParams p;
  p.expansions.reserve(model.components.size());
  for (const auto& c : model.components)
    p.expansions.push_back(local_expansion(c.kernel, model.horizon, opts));

  p.alpha = p.expansions.front().alpha;
  p.beta = p.expansions.front().beta;
  for (const auto& e : p.expansions) {
    p.alpha = std::min(p.alpha, e.alpha);
    p.beta = std::min(p.beta, e.beta);
  }

  bool attaining_alpha_all_degenerate = true;
  for (std::size_t i = 0; i < p.expansions.size(); ++i) {
    const auto& e = p.expansions[i];
    const double w2 = model.components[i].weight * model.components[i].weight;
    p.sigma2 += w2 * e.sigma_tilde * e.sigma_tilde;
    if (std::abs(e.beta - p.beta) <= kExponentTieTolerance) p.n_tilde += w2 * e.sigma_tilde * e.A;
    if (std::abs(e.alpha - p.alpha) <= kExponentTieTolerance) {
      p.g_tilde += w2 * e.D * e.sigma_tilde * e.sigma_tilde;
      if (!e.degenerate) attaining_alpha_all_degenerate = false;
    }
  }

  if (p.alpha < p.beta - kExponentTieTolerance)
    p.regime = Regime::AlphaLtBeta;
  else if (p.alpha > p.beta + kExponentTieTolerance)
    p.regime = Regime::AlphaGtBeta;
  else
    p.regime = Regime::AlphaEqBeta;

  if (!(p.sigma2 > 0.0)) throw NumericError("aggregate parameters: zero variance at horizon");
  if (!(p.n_tilde > 0.0)) throw NumericError("aggregate parameters: N~ must be positive");
  if (!(p.g_tilde > 0.0)) {
    // D = 0 happens only for degenerate line components; legal only where the
    // correlation constant is never used.
    if (!(p.regime == Regime::AlphaGtBeta && attaining_alpha_all_degenerate))
      throw NumericError("aggregate parameters: G~ must be positive outside the alpha>beta regime");
  }
  return p;
}

double leading_constant(const AggregateParams& params, const ConstantsProvider& provider,
                        ConstantProvenance* provenance, double* std_error) {
  ConstantProvenance prov = ConstantProvenance::Exact;
  double se = 0.0;
  double c = 1.0;
  switch (params.regime) {
    case Regime::AlphaGtBeta:
      c = 1.0;
      break;
    case Regime::AlphaEqBeta: {
      const ConstantValue pit = provider.piterbarg(params.alpha, params.n_tilde / params.g_tilde);
      c = pit.value;
      prov = pit.provenance;
      se = pit.std_error;
      break;
    }
    case Regime::AlphaLtBeta: {
      const ConstantValue pick = provider.pickands(params.alpha);
      const double inv_beta = 1.0 / params.beta;
      const double inv_alpha = 1.0 / params.alpha;
      c = pick.value * std::tgamma(inv_beta + 1.0) * std::pow(params.n_tilde, -inv_beta) *
          std::pow(params.g_tilde, inv_alpha) * std::pow(params.sigma2, inv_beta - inv_alpha);
      prov = pick.provenance;
      // The constant is linear in the Pickands value.
      se = pick.std_error * (pick.value != 0.0 ? std::abs(c / pick.value) : 0.0);
      break;
    }
  }
  if (provenance) *provenance = prov;
  if (std_error) *std_error = se;
  return c;
}

AsymptoticResult ruin_asymptotic(const AggregateModel& model, double u,
                                 const ConstantsProvider& provider,
                                 const AsymptoticOptions& opts) {
  require(u >= 0.0, "ruin_asymptotic: u must be >= 0");
  const AggregateParams params = aggregate_parameters(model, opts.expansion);

  if (opts.check_trend) {
    const double nu = opts.nu_fraction * model.horizon;
    const TrendCheck tc = check_trend_condition(model.trend, model.horizon, params.beta, nu);
    if (!tc.pass)
      throw NumericError("ruin_asymptotic: trend condition failed: " + tc.diagnostic);
  }

  const double g_T = model.trend_at_horizon();
  if (!(u + g_T > 0.0))
    throw NumericError("ruin_asymptotic: u + g(T) must be positive (got " +
                       std::to_string(u + g_T) + ")");

  AsymptoticResult res;
  res.regime = params.regime;
  res.tail_arg = (u + g_T) / std::sqrt(params.sigma2);
  res.constant = leading_constant(params, provider, &res.provenance, &res.constant_std_error);
  res.theta = params.regime == Regime::AlphaLtBeta
                  ? std::pow(res.tail_arg, 2.0 / params.alpha - 2.0 / params.beta)
                  : 1.0;
  res.log_value = std::log(res.constant) + std::log(res.theta) + log_psi(res.tail_arg);
  res.value = res.constant * res.theta * psi(res.tail_arg);
  if (res.value == 0.0) res.value = std::exp(res.log_value);  // deep-tail underflow
  return res;
}

namespace {

struct HomogeneousInputs {
  std::vector<double> weights2;     // lambda_i^2
  std::vector<double> sigma2;       // sigma_tilde_i^2
  std::vector<double> exponent;     // K_i H_i (bi-fBm) or H_i (sub-fBm)
  double sigma2_total = 0.0;
};

HomogeneousInputs collect_bifbm(const AggregateModel& model) {
  model.validate();
  HomogeneousInputs in;
  double prev = 0.0;
  for (std::size_t i = 0; i < model.components.size(); ++i) {
    const auto& c = model.components[i];
    require(c.kernel.family() == KernelFamily::BiFbm,
            "corollary_bifbm: component " + std::to_string(i) + " is not a bi-fBm");
    const double kh = c.kernel.k_param() * c.kernel.hurst();
    if (i == 0)
      require(kh > 0.0, "corollary_bifbm: K1*H1 must be positive");
    else if (i == 1)
      require(prev < kh, "corollary_bifbm: need K1*H1 < K2*H2");
    else
      require(prev <= kh, "corollary_bifbm: need nondecreasing K_i*H_i");
    prev = kh;
    in.weights2.push_back(c.weight * c.weight);
    in.exponent.push_back(kh);
    in.sigma2.push_back(std::pow(model.horizon, 2.0 * kh));
    in.sigma2_total += in.weights2.back() * in.sigma2.back();
  }
  return in;
}

HomogeneousInputs collect_subfbm(const AggregateModel& model) {
  model.validate();
  HomogeneousInputs in;
  double prev = 0.0;
  for (std::size_t i = 0; i < model.components.size(); ++i) {
    const auto& c = model.components[i];
    require(c.kernel.family() == KernelFamily::SubFbm,
            "corollary_subfbm: component " + std::to_string(i) + " is not a sub-fBm");
    const double h = c.kernel.hurst();
    if (i == 1)
      require(prev < h, "corollary_subfbm: need H1 < H2");
    else if (i > 1)
      require(prev <= h, "corollary_subfbm: need nondecreasing H_i");
    prev = h;
    in.weights2.push_back(c.weight * c.weight);
    in.exponent.push_back(h);
    in.sigma2.push_back((2.0 - std::pow(2.0, 2.0 * h - 1.0)) *
                        std::pow(model.horizon, 2.0 * h));
    in.sigma2_total += in.weights2.back() * in.sigma2.back();
  }
  return in;
}

}  // namespace

double corollary_bifbm(const AggregateModel& model, double u, const ConstantsProvider& provider) {
  const HomogeneousInputs in = collect_bifbm(model);
  const double T = model.horizon;
  const double kh = in.exponent.front();
  const double w = (u + model.trend_at_horizon()) / std::sqrt(in.sigma2_total);

  double sum_khs2 = 0.0;  // sum lambda_i^2 K_i H_i sigma_i^2
  for (std::size_t i = 0; i < in.weights2.size(); ++i)
    sum_khs2 += in.weights2[i] * in.exponent[i] * in.sigma2[i];

  double constant = 1.0;
  double lambda_factor = 1.0;
  const double k1 = model.components.front().kernel.k_param();
  if (kh < 0.5 - kExponentTieTolerance) {
    const ConstantValue pick = provider.pickands(2.0 * kh);
    constant = pick.value * std::pow(in.sigma2_total, (2.0 * kh - 1.0) / (2.0 * kh)) *
               std::pow(in.weights2.front() / std::pow(2.0, k1), 1.0 / (2.0 * kh)) * T / sum_khs2;
    lambda_factor = std::pow(w, 1.0 / kh - 2.0);
  } else if (std::abs(kh - 0.5) <= kExponentTieTolerance) {
    double tail_sum = 0.0;  // i >= 2 in the display
    for (std::size_t i = 1; i < in.weights2.size(); ++i)
      tail_sum += in.weights2[i] * in.exponent[i] * in.sigma2[i];
    constant = 1.0 + in.weights2.front() * T /
                         (std::pow(2.0, k1) * (tail_sum + in.weights2.front() * T / 2.0));
  }
  return constant * lambda_factor * psi(w);
}

double corollary_subfbm(const AggregateModel& model, double u, const ConstantsProvider& provider) {
  const HomogeneousInputs in = collect_subfbm(model);
  const double T = model.horizon;
  const double h = in.exponent.front();
  const double w = (u + model.trend_at_horizon()) / std::sqrt(in.sigma2_total);

  double sum_hs2 = 0.0;  // sum lambda_i^2 H_i sigma_i^2
  for (std::size_t i = 0; i < in.weights2.size(); ++i)
    sum_hs2 += in.weights2[i] * in.exponent[i] * in.sigma2[i];

  double constant = 1.0;
  double lambda_factor = 1.0;
  if (h < 0.5 - kExponentTieTolerance) {
    const ConstantValue pick = provider.pickands(2.0 * h);
    constant = pick.value * std::pow(in.sigma2_total, (2.0 * h - 1.0) / (2.0 * h)) *
               std::pow(0.5 * in.weights2.front(), 1.0 / (2.0 * h)) * T / sum_hs2;
    lambda_factor = std::pow(w, 1.0 / h - 2.0);
  } else if (std::abs(h - 0.5) <= kExponentTieTolerance) {
    double tail_sum = 0.0;
    for (std::size_t i = 1; i < in.weights2.size(); ++i)
      tail_sum += in.weights2[i] * in.exponent[i] * in.sigma2[i];
    constant = 1.0 + in.weights2.front() * T / (2.0 * tail_sum + in.weights2.front() * T);
  }
  return constant * lambda_factor * psi(w);
}

double example2_closed_form(const AggregateModel& model, double u) {
  model.validate();
  double prev = 0.0;
  double sigma2 = 0.0;
  for (std::size_t i = 0; i < model.components.size(); ++i) {
    const auto& c = model.components[i];
    require(c.kernel.family() == KernelFamily::TimeAvgFbm,
            "example2_closed_form: component " + std::to_string(i) +
                " is not a time-average fBm");
    const double h = c.kernel.hurst();
    if (i > 0) require(prev < h, "example2_closed_form: need strictly increasing H_i");
    prev = h;
    sigma2 += c.weight * c.weight * std::pow(model.horizon, 2.0 * h);
  }
  return psi((u + model.trend_at_horizon()) / std::sqrt(sigma2));
}

}  // namespace ruin
