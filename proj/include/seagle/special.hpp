#pragma once

#include <vector>

#include "seagle/types.hpp"

// Bessel-family kernels used by the Green's functions and the analytic
// cylinder/sphere solutions. Cylindrical J0, J1, Y0, Y1 use ascending series
// below `bessel_switchover` and Hankel asymptotic expansions above it.
namespace seagle::special
{
	inline constexpr double bessel_switchover = 14.0;

	double bessel_j0(double x);
	double bessel_j1(double x);
	/// x > 0.
	double bessel_y0(double x);
	/// x > 0.
	double bessel_y1(double x);

	/// H0^(1)(x) = J0 + j Y0, x > 0.
	Complex hankel1_0(double x);
	/// H1^(1)(x) = J1 + j Y1, x > 0.
	Complex hankel1_1(double x);

	/// J_0..J_{order_max}(x) by normalized downward (Miller) recurrence, x >= 0.
	std::vector<double> bessel_j_sequence(int order_max, double x);
	/// Y_0..Y_{order_max}(x) by upward recurrence, x > 0.
	std::vector<double> bessel_y_sequence(int order_max, double x);

	/// Integer-order J_m for any sign of m via J_{-m} = (-1)^m J_m.
	double bessel_j(int m, double x);
	double bessel_y(int m, double x);
	Complex hankel1(int m, double x);

	/// Spherical j_0..j_{l_max}(x), downward recurrence, x >= 0.
	std::vector<double> spherical_j_sequence(int l_max, double x);
	/// Spherical n_0..n_{l_max}(x) (second kind, y_l), upward recurrence, x > 0.
	std::vector<double> spherical_y_sequence(int l_max, double x);

	/// Legendre P_0..P_{l_max}(x) by the three-term recurrence.
	std::vector<double> legendre_sequence(int l_max, double x);
	double legendre(int l, double x);
} // namespace seagle::special
