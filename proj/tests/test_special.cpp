#include <cmath>

#include "doctest.h"

#include "seagle/special.hpp"

using namespace seagle;
using namespace seagle::special;

namespace
{
	// Error relative to the local envelope, so zeros of the oscillation do not blow up the ratio.
	double envelope_error(double got, double want, double x)
	{
		const double envelope = std::max(std::abs(want), std::sqrt(2.0 / (pi * std::max(x, 1.0))));
		return std::abs(got - want) / envelope;
	}
}

TEST_CASE("cylindrical Bessel values at 1")
{
	CHECK(bessel_j0(1.0) == doctest::Approx(0.7651976866).epsilon(1e-10));
	CHECK(bessel_y0(1.0) == doctest::Approx(0.0882569642).epsilon(1e-9));
	CHECK(bessel_j1(1.0) == doctest::Approx(0.4400505857).epsilon(1e-10));
	CHECK(bessel_y1(1.0) == doctest::Approx(-0.7812128213).epsilon(1e-10));
	CHECK(bessel_j0(0.0) == 1.0);
	CHECK(bessel_j1(0.0) == 0.0);
}

TEST_CASE("cylindrical Bessel against libstdc++ on (0, 100]")
{
	double worst = 0.0;
	for (int i = 1; i <= 4000; ++i)
	{
		const double x = 0.025 * i;
		worst = std::max(worst, envelope_error(bessel_j0(x), std::cyl_bessel_j(0.0, x), x));
		worst = std::max(worst, envelope_error(bessel_j1(x), std::cyl_bessel_j(1.0, x), x));
		worst = std::max(worst, envelope_error(bessel_y0(x), std::cyl_neumann(0.0, x), x));
		worst = std::max(worst, envelope_error(bessel_y1(x), std::cyl_neumann(1.0, x), x));
	}
	CHECK(worst < 1e-10);
}

TEST_CASE("Hankel functions combine J and Y")
{
	for (double x : {0.3, 2.0, 13.9, 14.1, 55.0})
	{
		CHECK(hankel1_0(x).real() == bessel_j0(x));
		CHECK(hankel1_0(x).imag() == bessel_y0(x));
		CHECK(hankel1_1(x).imag() == bessel_y1(x));
	}
}

TEST_CASE("Bessel sequences against libstdc++")
{
	for (double x : {0.01, 0.7, 3.0, 9.5, 20.0, 47.0})
	{
		const auto j = bessel_j_sequence(40, x);
		const auto y = bessel_y_sequence(std::min(40, int(x) + 10), x);
		for (int m = 0; m <= 40; ++m)
		{
			const double want = std::cyl_bessel_j(double(m), x);
			CHECK(std::abs(j[size_t(m)] - want) <= 1e-10 * std::max(std::abs(want), 1e-3 * std::abs(j[0]) + 1e-300));
		}
		for (size_t m = 0; m < y.size(); ++m)
		{
			const double want = std::cyl_neumann(double(m), x);
			CHECK(y[m] == doctest::Approx(want).epsilon(1e-9));
		}
	}
}

TEST_CASE("negative integer orders")
{
	for (int m : {1, 2, 5})
	{
		CHECK(bessel_j(-m, 2.5) == doctest::Approx((m % 2 ? -1.0 : 1.0) * bessel_j(m, 2.5)));
		CHECK(bessel_y(-m, 2.5) == doctest::Approx((m % 2 ? -1.0 : 1.0) * bessel_y(m, 2.5)));
	}
}

TEST_CASE("spherical Bessel against libstdc++")
{
	for (double x : {0.05, 1.0, 4.2, 15.0, 60.0})
	{
		const auto j = spherical_j_sequence(30, x);
		const auto y = spherical_y_sequence(std::min(30, int(x) + 8), x);
		for (unsigned l = 0; l <= 30; ++l)
		{
			const double want = std::sph_bessel(l, x);
			CHECK(std::abs(j[l] - want) <= 1e-10 * std::max(std::abs(want), 1e-3 / std::max(x, 1.0)));
		}
		for (unsigned l = 0; l < y.size(); ++l)
			CHECK(y[l] == doctest::Approx(std::sph_neumann(l, x)).epsilon(1e-9));
	}
	CHECK(spherical_j_sequence(3, 0.0)[0] == 1.0);
	CHECK(spherical_j_sequence(3, 0.0)[2] == 0.0);
}

TEST_CASE("Legendre polynomials")
{
	CHECK(legendre(0, 0.3) == 1.0);
	CHECK(legendre(1, 0.3) == doctest::Approx(0.3));
	CHECK(legendre(2, 0.5) == doctest::Approx(-0.125));
	// Rodrigues with (x^2 - 1)^l: P_3(x) = (5x^3 - 3x)/2
	CHECK(legendre(3, 0.4) == doctest::Approx(0.5 * (5 * 0.064 - 1.2)));
	for (double x : {-0.9, -0.2, 0.6, 1.0})
		for (unsigned l = 0; l <= 25; ++l)
			CHECK(legendre(int(l), x) == doctest::Approx(std::legendre(l, x)).epsilon(1e-12));
}
