#pragma once

#include <string>
#include <vector>

#include "seagle/grid.hpp"

namespace seagle
{
	/// Disk in 2D, ball in 3D. Contrast is the relative permittivity excess
	/// (eps - eps_b) / eps_b, so the potential inside is contrast * kb^2.
	struct Cylinder
	{
		Vector3 center = Vector3::Zero(); // m
		double radius = 1.0;              // m
		double contrast = 0.0;

		bool operator==(const Cylinder &) const = default;
	};

	struct PhantomSpec
	{
		enum class Kind
		{
			none,
			cylinders,
			shepp_logan,
			from_file,
		};

		Kind kind = Kind::none;
		std::vector<Cylinder> cylinders;
		/// Peak contrast of the Shepp-Logan head.
		double contrast = 0.2;
		/// Half-width of the Shepp-Logan head's unit square, m; 0 uses the grid half-width.
		double half_width = 0.0;
		/// Image CSV holding the potential (1/m^2) on the same grid.
		std::string path;
		/// Sub-samples per axis used for area-weighted pixel coverage.
		int supersample = 4;

		void validate() const;
		bool operator==(const PhantomSpec &) const = default;
	};

	std::string to_string(PhantomSpec::Kind kind);
	PhantomSpec::Kind parse_phantom_kind(const std::string &name);

	/// Scattering potential f = kb^2 * contrast, pixel values weighted by the
	/// covered fraction of each pixel.
	RealVector render_phantom(const PhantomSpec &spec, const DomainGrid &grid);

	/// Contrast of a potential image, max|f| / kb^2.
	double contrast_of(const RealVector &f, const DomainGrid &grid);
} // namespace seagle
