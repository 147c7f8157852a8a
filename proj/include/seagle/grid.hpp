#pragma once

#include <array>
#include <vector>

#include "seagle/types.hpp"

namespace seagle
{
	/// Uniform pixel/voxel grid of the imaging domain together with the
	/// illumination wavelength and background permittivity.
	///
	/// Pixels are stored x-fastest: n = ix + nx * (iy + ny * iz). Unused axes
	/// (z in 2D) have extent 1 and zero origin.
	struct DomainGrid
	{
		int dimension = 2;
		std::array<Index, 3> dims{1, 1, 1};
		double spacing = 1.0;     // m
		Vector3 origin = Vector3::Zero(); // center of pixel (0,...,0), m
		double wavelength = 1.0;  // vacuum, m
		double background_permittivity = 1.0;

		/// Grid of `dims` pixels centered on the coordinate origin.
		static DomainGrid centered(int dimension, std::array<Index, 3> dims, double spacing, double wavelength,
								   double background_permittivity = 1.0);

		void validate() const;

		Index size() const { return dims[0] * dims[1] * dims[2]; }
		double wavenumber() const { return 2.0 * pi / wavelength; }
		double background_wavenumber() const;
		/// Pixel area (2D) or voxel volume (3D).
		double cell_measure() const;

		Index linear_index(Index ix, Index iy, Index iz = 0) const { return ix + dims[0] * (iy + dims[1] * iz); }
		std::array<Index, 3> multi_index(Index n) const;
		Vector3 position(Index n) const;
		Vector3 position(Index ix, Index iy, Index iz) const;

		/// Axis-aligned bounding box of the pixel footprints.
		Vector3 lower_corner() const;
		Vector3 upper_corner() const;
		bool contains(const Vector3 &point) const;

		/// Same physical extent with `factor` times as many pixels per axis.
		DomainGrid refined(int factor) const;

		bool operator==(const DomainGrid &) const = default;
	};

	/// Point receivers (sensor locations) in physical coordinates.
	struct SensorSet
	{
		std::vector<Vector3> positions;

		Index size() const { return Index(positions.size()); }

		/// `count` points evenly spaced on a circle in the z = 0 plane,
		/// starting at angle `start_angle` (radians).
		static SensorSet ring(Index count, double radius, double start_angle = 0.0, const Vector3 &center = Vector3::Zero());

		/// Number of positions inside the grid bounding box.
		Index count_inside(const DomainGrid &grid) const;
	};
} // namespace seagle
