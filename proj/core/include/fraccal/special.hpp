#pragma once

namespace fraccal {

// Hurwitz zeta sum_{k>=0} (k+q)^{-s}, analytically continued; s != 1, q > 0.
double hurwitz_zeta(double s, double q);
double riemann_zeta(double s);
// Dirichlet beta sum_{k>=0} (-1)^k (2k+1)^{-s}
double dirichlet_beta(double s);
// Epstein zeta of the square lattice, sum_{m in Z^2 \ 0} |m|^{-2s} = 4 zeta(s) beta(s)
double epstein_zeta_z2(double s);

// C_{n,s} = 4^s Gamma(n/2+s) / (pi^{n/2} |Gamma(-s)|)
double frac_constant(int n, double s);
// (-Delta)^s (1-|x|^2)_+^s = 2^{2s} Gamma(1+s) Gamma(n/2+s) / Gamma(n/2) on the unit ball
double getoor_constant(int n, double s);

}  // namespace fraccal
