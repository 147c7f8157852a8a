#include "seagle/analytic.hpp"

#include <cmath>

#include "seagle/greens.hpp"
#include "seagle/special.hpp"

namespace seagle::analytic
{
	void Scene::validate() const
	{
		if (!(radius > 0.0))
			throw ConfigError("analytic scene radius must be positive");
		if (!(source_distance > radius))
			throw ConfigError("analytic scene source must lie outside the object");
		if (!(index > 0.0) || !std::isfinite(index))
			throw ConfigError("analytic scene refractive index must be positive");
		if (!(kb > 0.0) || !std::isfinite(kb))
			throw ConfigError("analytic scene wavenumber must be positive");
		if (truncation < 0)
			throw ConfigError("analytic scene truncation must be >= 1 (or 0 for default)");
	}

	int Scene::order_limit() const
	{
		return truncation > 0 ? truncation : int(std::ceil(kb * radius)) + 30;
	}

	namespace
	{
		double signed_order(const std::vector<double> &sequence, int m)
		{
			if (m >= 0)
				return sequence[m];
			return (-m) % 2 == 0 ? sequence[-m] : -sequence[-m];
		}

		struct Sequences
		{
			std::vector<double> j, y;
			Sequences(int order_max, double x, bool spherical, bool need_y)
			{
				j = spherical ? special::spherical_j_sequence(order_max, x) : special::bessel_j_sequence(order_max, x);
				if (need_y)
					y = spherical ? special::spherical_y_sequence(order_max, x) : special::bessel_y_sequence(order_max, x);
			}
			Complex h(int m) const { return {signed_order(j, m), signed_order(y, m)}; }
		};

		void check_resonance(const Complex &delta, double scale, int order)
		{
			if (!(std::abs(delta) > 1e-14 * scale) || !std::isfinite(std::abs(delta)))
				throw NumericalError("analytic coefficient determinant vanishes at order " + std::to_string(order));
		}

		// m may be negative; sequences must cover |m| + 1.
		Coefficients cylinder_coefficients(int m, double n, double rho_sph, const Sequences &inner, const Sequences &outer)
		{
			const double jm_n = signed_order(inner.j, m);
			const double jm1_n = n * signed_order(inner.j, m - 1);
			const double jm = signed_order(outer.j, m), jm1 = signed_order(outer.j, m - 1);
			const double ym = signed_order(outer.y, m), ym1 = signed_order(outer.y, m - 1);
			const Complex delta = jm_n * outer.h(m - 1) - jm1_n * outer.h(m);
			check_resonance(delta, std::abs(jm_n * outer.h(m - 1)) + std::abs(jm1_n * outer.h(m)), m);
			Coefficients c;
			c.inner = -1.0 / (rho_sph * delta);
			c.regular = -pi / (2.0 * delta) * (jm_n * ym1 - jm1_n * ym);
			c.singular = pi / (2.0 * delta) * (jm_n * jm1 - jm1_n * jm);
			return c;
		}

		Coefficients sphere_coefficients(int l, double n, double kb, double rho_sph, const Sequences &inner,
										 const Sequences &outer)
		{
			const double jl_n = inner.j[l];
			const double jl1_n = n * inner.j[l + 1];
			const Complex d = jl_n * outer.h(l + 1) - jl1_n * outer.h(l);
			check_resonance(d, std::abs(jl_n * outer.h(l + 1)) + std::abs(jl1_n * outer.h(l)), l);
			Coefficients c;
			c.inner = kb / (rho_sph * rho_sph * d);
			c.regular = -kb / d * (jl_n * outer.y[l + 1] - jl1_n * outer.y[l]);
			c.singular = kb / d * (jl_n * outer.j[l + 1] - jl1_n * outer.j[l]);
			return c;
		}

		bool partial_sum_settled(const Complex &last, const Complex &before_last, const Complex &sum)
		{
			const double threshold = 1e-8 * std::abs(sum);
			return !(std::abs(last) > threshold && std::abs(before_last) > threshold);
		}
	} // namespace

	Coefficients radial_coeffs_2d(int m, const Scene &scene)
	{
		scene.validate();
		if (std::abs(m) > scene.order_limit())
			throw ConfigError("radial_coeffs_2d: order beyond truncation");
		const int order = std::abs(m) + 1;
		const double rho_sph = scene.kb * scene.radius;
		const Sequences inner(order, scene.index * rho_sph, false, false);
		const Sequences outer(order, rho_sph, false, true);
		return cylinder_coefficients(m, scene.index, rho_sph, inner, outer);
	}

	Complex radial_function_2d(int m, double r, const Scene &scene)
	{
		const Coefficients c = radial_coeffs_2d(m, scene);
		const int order = std::abs(m);
		const double rho = scene.kb * r;
		const double rho_s = scene.kb * scene.source_distance;
		const Sequences at_source(order, rho_s, false, true);
		if (r < scene.radius)
		{
			const Sequences in(order, scene.index * rho, false, false);
			return c.inner * signed_order(in.j, m) * at_source.h(m);
		}
		const Sequences here(order, rho, false, true);
		if (r < scene.source_distance)
			return (c.regular * signed_order(here.j, m) + c.singular * signed_order(here.y, m)) * at_source.h(m);
		return (c.regular * signed_order(at_source.j, m) + c.singular * signed_order(at_source.y, m)) * here.h(m);
	}

	Coefficients radial_coeffs_3d(int l, const Scene &scene)
	{
		scene.validate();
		if (l < 0 || l > scene.order_limit())
			throw ConfigError("radial_coeffs_3d: order out of range");
		const double rho_sph = scene.kb * scene.radius;
		const Sequences inner(l + 1, scene.index * rho_sph, true, false);
		const Sequences outer(l + 1, rho_sph, true, true);
		return sphere_coefficients(l, scene.index, scene.kb, rho_sph, inner, outer);
	}

	Complex radial_function_3d(int l, double r, const Scene &scene)
	{
		const Coefficients c = radial_coeffs_3d(l, scene);
		const double rho = scene.kb * r;
		const double rho_s = scene.kb * scene.source_distance;
		const Sequences at_source(l, rho_s, true, true);
		if (r < scene.radius)
		{
			const Sequences in(l, scene.index * rho, true, false);
			return c.inner * in.j[l] * at_source.h(l);
		}
		const Sequences here(l, rho, true, true);
		if (r < scene.source_distance)
			return (c.regular * here.j[l] + c.singular * here.y[l]) * at_source.h(l);
		return (c.regular * at_source.j[l] + c.singular * at_source.y[l]) * here.h(l);
	}

	CylinderField::CylinderField(const Scene &scene) : scene_(scene)
	{
		scene_.validate();
		const int order = scene_.order_limit();
		const double rho_sph = scene_.kb * scene_.radius;
		const Sequences inner(order + 1, scene_.index * rho_sph, false, false);
		const Sequences outer(order + 1, rho_sph, false, true);
		const Sequences source(order, scene_.kb * scene_.source_distance, false, true);
		for (int m = 0; m <= order; ++m)
		{
			coeffs_.push_back(cylinder_coefficients(m, scene_.index, rho_sph, inner, outer));
			source_hankel_.push_back(source.h(m));
		}
	}

	SeriesValue CylinderField::at_polar(double r, double theta) const
	{
		const int order = int(coeffs_.size()) - 1;
		const double rho = scene_.kb * r;
		std::vector<Complex> radial(order + 1);
		if (r < scene_.radius)
		{
			const Sequences in(order, scene_.index * rho, false, false);
			for (int m = 0; m <= order; ++m)
				radial[m] = coeffs_[m].inner * in.j[m] * source_hankel_[m];
		}
		else
		{
			// Outside the object: free-space term in closed form plus the scattered
			// series -j c_m H_m(rho) H_m(rho_s), which converges for any r.
			const Sequences here(order, rho, false, true);
			for (int m = 0; m <= order; ++m)
				radial[m] = coeffs_[m].singular == 0.0
								? Complex(0.0)
								: -imag_unit * (coeffs_[m].singular * here.h(m)) * source_hankel_[m];
		}

		// R_{-m} = R_m, so the exponential series folds into cosines.
		Complex sum = radial[0];
		Complex last = radial[0], before_last = 0.0;
		for (int m = 1; m <= order; ++m)
		{
			const Complex term = 2.0 * radial[m] * std::cos(m * theta);
			sum += term;
			before_last = last;
			last = term;
		}
		if (!std::isfinite(std::abs(sum)))
			throw NumericalError("cylinder series produced a non-finite value; reduce the truncation order");
		sum /= 2.0 * pi;
		last /= 2.0 * pi;
		before_last /= 2.0 * pi;
		if (r >= scene_.radius)
			sum += green_2d(Vector3(r * std::cos(theta), r * std::sin(theta), 0.0) -
								Vector3(scene_.source_distance, 0.0, 0.0),
							scene_.kb);
		return {sum, partial_sum_settled(last, before_last, sum)};
	}

	SeriesValue CylinderField::at(const Vector3 &point) const
	{
		return at_polar(std::hypot(point.x(), point.y()), std::atan2(point.y(), point.x()));
	}

	SphereField::SphereField(const Scene &scene) : scene_(scene)
	{
		scene_.validate();
		const int order = scene_.order_limit();
		const double rho_sph = scene_.kb * scene_.radius;
		const Sequences inner(order + 1, scene_.index * rho_sph, true, false);
		const Sequences outer(order + 1, rho_sph, true, true);
		const Sequences source(order, scene_.kb * scene_.source_distance, true, true);
		for (int l = 0; l <= order; ++l)
		{
			coeffs_.push_back(sphere_coefficients(l, scene_.index, scene_.kb, rho_sph, inner, outer));
			source_hankel_.push_back(source.h(l));
		}
	}

	SeriesValue SphereField::at_spherical(double r, double theta) const
	{
		const int order = int(coeffs_.size()) - 1;
		const double rho = scene_.kb * r;
		const std::vector<double> legendre = special::legendre_sequence(order, std::cos(theta));
		std::vector<Complex> radial(order + 1);
		if (r < scene_.radius)
		{
			const Sequences in(order, scene_.index * rho, true, false);
			for (int l = 0; l <= order; ++l)
				radial[l] = coeffs_[l].inner * in.j[l] * source_hankel_[l];
		}
		else
		{
			const Sequences here(order, rho, true, true);
			for (int l = 0; l <= order; ++l)
				radial[l] = coeffs_[l].singular == 0.0
								? Complex(0.0)
								: -imag_unit * (coeffs_[l].singular * here.h(l)) * source_hankel_[l];
		}

		Complex sum = 0.0, last = 0.0, before_last = 0.0;
		for (int l = 0; l <= order; ++l)
		{
			const Complex term = radial[l] * ((2.0 * l + 1.0) / (4.0 * pi)) * legendre[l];
			sum += term;
			before_last = last;
			last = term;
		}
		if (!std::isfinite(std::abs(sum)))
			throw NumericalError("sphere series produced a non-finite value; reduce the truncation order");
		if (r >= scene_.radius)
			sum += green_3d(Vector3(r * std::sin(theta), 0.0, r * std::cos(theta)) -
								Vector3(0.0, 0.0, scene_.source_distance),
							scene_.kb);
		return {sum, partial_sum_settled(last, before_last, sum)};
	}

	SeriesValue SphereField::at(const Vector3 &point) const
	{
		const double r = point.norm();
		const double theta = r > 0.0 ? std::acos(std::clamp(point.z() / r, -1.0, 1.0)) : 0.0;
		return at_spherical(r, theta);
	}

	SeriesValue analytic_field_2d(double r, double theta, const Scene &scene)
	{
		if (std::abs(r - scene.source_distance) == 0.0 && std::cos(theta) == 1.0)
			throw SingularityError("analytic field evaluated at the source");
		return CylinderField(scene).at_polar(r, theta);
	}

	SeriesValue analytic_field_3d(double r, double theta, const Scene &scene)
	{
		if (std::abs(r - scene.source_distance) == 0.0 && std::cos(theta) == 1.0)
			throw SingularityError("analytic field evaluated at the source");
		return SphereField(scene).at_spherical(r, theta);
	}

	double helmholtz_residual(const FieldSampler &field, const WavenumberSquared &k2, const DomainGrid &grid,
							  const SingularDistance &singular, double band_pixels)
	{
		grid.validate();
		ComplexVector samples(grid.size());
		for (Index n = 0; n < grid.size(); ++n)
			samples[n] = field(grid.position(n));

		const Index strides[3] = {1, grid.dims[0], grid.dims[0] * grid.dims[1]};
		const double inv_h2 = 1.0 / (grid.spacing * grid.spacing);
		double worst = 0.0;
		for (Index n = 0; n < grid.size(); ++n)
		{
			const auto idx = grid.multi_index(n);
			bool interior = true;
			for (int d = 0; d < grid.dimension; ++d)
				interior = interior && idx[d] > 0 && idx[d] + 1 < grid.dims[d];
			if (!interior)
				continue;
			const Vector3 x = grid.position(n);
			if (singular && singular(x) < band_pixels * grid.spacing)
				continue;

			Complex laplacian = 0.0;
			for (int d = 0; d < grid.dimension; ++d)
				laplacian += (samples[n + strides[d]] + samples[n - strides[d]] - 2.0 * samples[n]) * inv_h2;
			const Complex k2e = k2(x) * samples[n];
			const double numerator = std::abs(laplacian + k2e);
			if (numerator == 0.0)
				continue;
			const double denominator = std::abs(k2e);
			if (denominator == 0.0)
				return std::numeric_limits<double>::infinity();
			worst = std::max(worst, numerator / denominator);
		}
		return worst;
	}
} // namespace seagle::analytic
