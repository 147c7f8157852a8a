#include "seagle/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace seagle::special
{
	namespace
	{
		constexpr double euler_gamma = 0.57721566490153286060651209008240243;

		// sum_k (-1)^k (x^2/4)^k / (k! (k+nu)!) for nu in {0, 1}
		double ascending_series(int nu, double x)
		{
			const double q = 0.25 * x * x;
			double term = 1.0;
			double sum = term;
			for (int k = 1; k < 200; ++k)
			{
				term *= -q / (double(k) * double(k + nu));
				sum += term;
				if (std::abs(term) < 1e-17 * std::abs(sum))
					break;
			}
			return sum;
		}

		// Hankel asymptotic expansion: returns (P, Q) with
		// J = sqrt(2/(pi x)) (P cos chi - Q sin chi), Y = sqrt(2/(pi x)) (P sin chi + Q cos chi).
		void asymptotic_pq(int nu, double x, double &p, double &q)
		{
			const double mu = 4.0 * nu * nu;
			double a = 1.0;
			p = 1.0;
			q = 0.0;
			double previous = std::numeric_limits<double>::infinity();
			double xk = 1.0;
			for (int k = 1; k < 60; ++k)
			{
				const double odd = 2.0 * k - 1.0;
				a *= (mu - odd * odd) / (8.0 * k);
				xk *= x;
				const double term = a / xk;
				if (std::abs(term) > previous)
					break; // the series has started to diverge
				previous = std::abs(term);
				// k = 1 -> +Q, k = 2 -> -P, k = 3 -> -Q, k = 4 -> +P, ...
				switch (k % 4)
				{
				case 1: q += term; break;
				case 2: p -= term; break;
				case 3: q -= term; break;
				case 0: p += term; break;
				}
				if (std::abs(term) < 1e-17)
					break;
			}
		}

		double asymptotic_j(int nu, double x)
		{
			double p, q;
			asymptotic_pq(nu, x, p, q);
			const double chi = x - (0.5 * nu + 0.25) * pi;
			return std::sqrt(2.0 / (pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
		}

		double asymptotic_y(int nu, double x)
		{
			double p, q;
			asymptotic_pq(nu, x, p, q);
			const double chi = x - (0.5 * nu + 0.25) * pi;
			return std::sqrt(2.0 / (pi * x)) * (p * std::sin(chi) + q * std::cos(chi));
		}

		void require_positive(double x, const char *name)
		{
			if (!(x > 0.0))
				throw SingularityError(std::string(name) + ": argument must be positive");
		}
	} // namespace

	double bessel_j0(double x)
	{
		x = std::abs(x);
		if (x < bessel_switchover)
			return ascending_series(0, x);
		return asymptotic_j(0, x);
	}

	double bessel_j1(double x)
	{
		const double sign = x < 0 ? -1.0 : 1.0;
		x = std::abs(x);
		if (x < bessel_switchover)
			return sign * 0.5 * x * ascending_series(1, x);
		return sign * asymptotic_j(1, x);
	}

	double bessel_y0(double x)
	{
		require_positive(x, "bessel_y0");
		if (x >= bessel_switchover)
			return asymptotic_y(0, x);

		// Y0 = (2/pi)(ln(x/2) + gamma) J0 + (2/pi) sum_{k>=1} (-1)^{k+1} H_k (x^2/4)^k / (k!)^2
		const double q = 0.25 * x * x;
		double term = 1.0;
		double harmonic = 0.0;
		double sum = 0.0;
		for (int k = 1; k < 200; ++k)
		{
			term *= -q / (double(k) * double(k));
			harmonic += 1.0 / k;
			const double contribution = -term * harmonic;
			sum += contribution;
			if (std::abs(contribution) < 1e-17 * std::abs(sum))
				break;
		}
		return (2.0 / pi) * ((std::log(0.5 * x) + euler_gamma) * bessel_j0(x) + sum);
	}

	double bessel_y1(double x)
	{
		require_positive(x, "bessel_y1");
		if (x >= bessel_switchover)
			return asymptotic_y(1, x);

		// Y1 = -2/(pi x) + (2/pi) ln(x/2) J1
		//      - (1/pi) sum_k (psi(k+1) + psi(k+2)) (-1)^k (x/2)^{2k+1} / (k! (k+1)!)
		const double q = 0.25 * x * x;
		double term = 0.5 * x; // (x/2)^{1} / (0! 1!)
		double psi_k1 = -euler_gamma;      // psi(1)
		double psi_k2 = 1.0 - euler_gamma; // psi(2)
		double sum = term * (psi_k1 + psi_k2);
		for (int k = 1; k < 200; ++k)
		{
			term *= -q / (double(k) * double(k + 1));
			psi_k1 += 1.0 / k;
			psi_k2 += 1.0 / (k + 1);
			const double contribution = term * (psi_k1 + psi_k2);
			sum += contribution;
			if (std::abs(contribution) < 1e-17 * std::abs(sum))
				break;
		}
		return -2.0 / (pi * x) + (2.0 / pi) * std::log(0.5 * x) * bessel_j1(x) - sum / pi;
	}

	Complex hankel1_0(double x) { return {bessel_j0(x), bessel_y0(x)}; }
	Complex hankel1_1(double x) { return {bessel_j1(x), bessel_y1(x)}; }

	std::vector<double> bessel_j_sequence(int order_max, double x)
	{
		if (order_max < 0)
			throw ConfigError("bessel_j_sequence: negative order");
		std::vector<double> out(order_max + 1, 0.0);
		x = std::abs(x);
		if (x == 0.0)
		{
			out[0] = 1.0;
			return out;
		}
		const int base = std::max(order_max, int(std::ceil(x)));
		int start = base + 30 + int(std::sqrt(40.0 * base));
		start += start % 2;

		std::vector<double> work(start + 2, 0.0);
		work[start] = 1e-300;
		for (int m = start; m >= 1; --m)
		{
			work[m - 1] = 2.0 * m / x * work[m] - work[m + 1];
			if (std::abs(work[m - 1]) > 1e250)
			{
				for (int j = m - 1; j <= start; ++j)
					work[j] *= 1e-250;
			}
		}
		// J_0 + 2 sum_k J_2k = 1
		double norm = work[0];
		for (int m = 2; m <= start; m += 2)
			norm += 2.0 * work[m];
		for (int m = 0; m <= order_max; ++m)
			out[m] = work[m] / norm;
		return out;
	}

	std::vector<double> bessel_y_sequence(int order_max, double x)
	{
		require_positive(x, "bessel_y_sequence");
		std::vector<double> out(std::max(order_max + 1, 2));
		out[0] = bessel_y0(x);
		out[1] = bessel_y1(x);
		for (int m = 1; m < order_max; ++m)
			out[m + 1] = 2.0 * m / x * out[m] - out[m - 1];
		out.resize(order_max + 1);
		return out;
	}

	double bessel_j(int m, double x)
	{
		const int order = std::abs(m);
		double value;
		if (order == 0)
			value = bessel_j0(x);
		else if (order == 1)
			value = bessel_j1(x);
		else
			value = bessel_j_sequence(order, x)[order];
		return (m < 0 && order % 2 == 1) ? -value : value;
	}

	double bessel_y(int m, double x)
	{
		const int order = std::abs(m);
		const double value = bessel_y_sequence(order, x)[order];
		return (m < 0 && order % 2 == 1) ? -value : value;
	}

	Complex hankel1(int m, double x) { return {bessel_j(m, x), bessel_y(m, x)}; }

	std::vector<double> spherical_j_sequence(int l_max, double x)
	{
		if (l_max < 0)
			throw ConfigError("spherical_j_sequence: negative order");
		std::vector<double> out(l_max + 1, 0.0);
		x = std::abs(x);
		if (x == 0.0)
		{
			out[0] = 1.0;
			return out;
		}
		const int base = std::max(l_max, int(std::ceil(x)));
		const int start = base + 30 + int(std::sqrt(40.0 * base));

		std::vector<double> work(start + 2, 0.0);
		work[start + 1] = 0.0;
		work[start] = 1e-300;
		for (int l = start; l >= 1; --l)
		{
			work[l - 1] = (2.0 * l + 1.0) / x * work[l] - work[l + 1];
			if (std::abs(work[l - 1]) > 1e250)
			{
				for (int j = l - 1; j <= start; ++j)
					work[j] *= 1e-250;
			}
		}
		// Normalize against whichever closed form is better conditioned.
		const double j0 = std::sin(x) / x;
		const double j1 = std::sin(x) / (x * x) - std::cos(x) / x;
		const double scale = std::abs(j0) >= std::abs(j1) ? j0 / work[0] : j1 / work[1];
		for (int l = 0; l <= l_max; ++l)
			out[l] = work[l] * scale;
		return out;
	}

	std::vector<double> spherical_y_sequence(int l_max, double x)
	{
		require_positive(x, "spherical_y_sequence");
		std::vector<double> out(std::max(l_max + 1, 2));
		out[0] = -std::cos(x) / x;
		out[1] = -std::cos(x) / (x * x) - std::sin(x) / x;
		for (int l = 1; l < l_max; ++l)
			out[l + 1] = (2.0 * l + 1.0) / x * out[l] - out[l - 1];
		out.resize(l_max + 1);
		return out;
	}

	std::vector<double> legendre_sequence(int l_max, double x)
	{
		if (l_max < 0)
			throw ConfigError("legendre_sequence: negative order");
		std::vector<double> out(l_max + 1);
		out[0] = 1.0;
		if (l_max >= 1)
			out[1] = x;
		for (int l = 1; l < l_max; ++l)
			out[l + 1] = ((2.0 * l + 1.0) * x * out[l] - l * out[l - 1]) / (l + 1.0);
		return out;
	}

	double legendre(int l, double x) { return legendre_sequence(l, x)[l]; }
} // namespace seagle::special
