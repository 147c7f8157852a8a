#pragma once

#include <functional>
#include <vector>

#include "seagle/grid.hpp"

// Closed-form fields of a unit point source (line source in 2D) outside a
// homogeneous cylinder or sphere centered at the origin. The source sits on
// the +x axis in 2D and on the +z axis in 3D, at distance `source_distance`.
namespace seagle::analytic
{
	struct Scene
	{
		double radius = 1.0;          // m
		double index = 1.0;           // refractive index sqrt(eps / eps_b)
		double source_distance = 2.0; // m
		double kb = 1.0;              // background wavenumber, 1/m
		/// Highest order summed; 0 selects ceil(kb * radius) + 30.
		int truncation = 0;

		void validate() const;
		int order_limit() const;
	};

	struct SeriesValue
	{
		Complex value;
		bool converged = true;
	};

	struct Coefficients
	{
		Complex inner;  // a_m / A_l
		Complex regular; // b_m / B_l
		Complex singular; // c_m / C_l
	};

	/// (a_m, b_m, c_m) for any integer m.
	Coefficients radial_coeffs_2d(int m, const Scene &scene);
	/// R_m(r, r_s), three-branch radial function.
	Complex radial_function_2d(int m, double r, const Scene &scene);

	/// (A_l, B_l, C_l), l >= 0.
	Coefficients radial_coeffs_3d(int l, const Scene &scene);
	Complex radial_function_3d(int l, double r, const Scene &scene);

	/// Cylinder solution with precomputed coefficients, for dense sampling. Outside
	/// the object the free-space term is evaluated in closed form and only the
	/// scattered part is summed.
	class CylinderField
	{
	public:
		explicit CylinderField(const Scene &scene);
		SeriesValue at_polar(double r, double theta) const;
		/// Point in the x-y plane, cylinder axis through the origin.
		SeriesValue at(const Vector3 &point) const;
		const Scene &scene() const { return scene_; }

	private:
		Scene scene_;
		std::vector<Coefficients> coeffs_;     // m = 0..M
		std::vector<Complex> source_hankel_;   // H_m(rho_s)
	};

	/// Sphere solution with precomputed coefficients.
	class SphereField
	{
	public:
		explicit SphereField(const Scene &scene);
		SeriesValue at_spherical(double r, double theta) const;
		SeriesValue at(const Vector3 &point) const;
		const Scene &scene() const { return scene_; }

	private:
		Scene scene_;
		std::vector<Coefficients> coeffs_;
		std::vector<Complex> source_hankel_;
	};

	SeriesValue analytic_field_2d(double r, double theta, const Scene &scene);
	SeriesValue analytic_field_3d(double r, double theta, const Scene &scene);

	using FieldSampler = std::function<Complex(const Vector3 &)>;
	using WavenumberSquared = std::function<double(const Vector3 &)>;
	/// Distance from a point to the nearest singular feature (source, interface).
	using SingularDistance = std::function<double(const Vector3 &)>;

	/// max over interior pixels of |lap E + k^2 E| / |k^2 E|, using the
	/// second-order finite-difference Laplacian. Pixels within `band_pixels`
	/// of a singular feature are skipped.
	double helmholtz_residual(const FieldSampler &field, const WavenumberSquared &k2, const DomainGrid &grid,
							  const SingularDistance &singular = {}, double band_pixels = 3.0);
} // namespace seagle::analytic
