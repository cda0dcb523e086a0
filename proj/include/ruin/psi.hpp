#pragma once

namespace ruin {

// Standard normal survival function P(Z > x), relative error <= 1e-12 over
// the full double range (asymptotic log form past the erfc underflow point).
double psi(double x);

// log of psi(x); finite for x up to ~1e8 and exact enough for deep-tail work.
double log_psi(double x);

// Inverse survival function: psi(inv_psi(p)) = p for p in (0,1).
double inv_psi(double p);

}  // namespace ruin
