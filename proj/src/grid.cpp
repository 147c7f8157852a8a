#include "seagle/grid.hpp"

#include <cmath>
#include <iostream>

namespace seagle
{
	namespace
	{
		void default_warning(const std::string &message) { std::cerr << "warning: " << message << '\n'; }
		WarningHandler warning_handler = &default_warning;
	} // namespace

	void set_warning_handler(WarningHandler handler) { warning_handler = handler ? handler : &default_warning; }
	void warn(const std::string &message) { warning_handler(message); }

	DomainGrid DomainGrid::centered(int dimension, std::array<Index, 3> dims, double spacing, double wavelength,
									double background_permittivity)
	{
		DomainGrid grid;
		grid.dimension = dimension;
		grid.dims = dims;
		if (dimension == 2)
			grid.dims[2] = 1;
		grid.spacing = spacing;
		grid.wavelength = wavelength;
		grid.background_permittivity = background_permittivity;
		for (int d = 0; d < dimension; ++d)
			grid.origin[d] = -0.5 * double(grid.dims[d] - 1) * spacing;
		grid.validate();
		return grid;
	}

	void DomainGrid::validate() const
	{
		if (dimension != 2 && dimension != 3)
			throw ConfigError("grid dimension must be 2 or 3");
		for (int d = 0; d < 3; ++d)
		{
			if (dims[d] < 1)
				throw ConfigError("grid dims must be >= 1");
		}
		if (dimension == 2 && dims[2] != 1)
			throw ConfigError("2D grid must have a single z slice");
		if (!(spacing > 0.0) || !std::isfinite(spacing))
			throw ConfigError("grid spacing must be positive");
		if (!(wavelength > 0.0) || !std::isfinite(wavelength))
			throw ConfigError("wavelength must be positive");
		if (!(background_permittivity > 0.0) || !std::isfinite(background_permittivity))
			throw ConfigError("background permittivity must be positive");
	}

	double DomainGrid::background_wavenumber() const { return wavenumber() * std::sqrt(background_permittivity); }

	double DomainGrid::cell_measure() const { return dimension == 2 ? spacing * spacing : spacing * spacing * spacing; }

	std::array<Index, 3> DomainGrid::multi_index(Index n) const
	{
		const Index ix = n % dims[0];
		const Index rest = n / dims[0];
		return {ix, rest % dims[1], rest / dims[1]};
	}

	Vector3 DomainGrid::position(Index ix, Index iy, Index iz) const
	{
		return origin + spacing * Vector3(double(ix), double(iy), double(iz));
	}

	Vector3 DomainGrid::position(Index n) const
	{
		const auto idx = multi_index(n);
		return position(idx[0], idx[1], idx[2]);
	}

	Vector3 DomainGrid::lower_corner() const
	{
		Vector3 corner = origin;
		for (int d = 0; d < dimension; ++d)
			corner[d] -= 0.5 * spacing;
		return corner;
	}

	Vector3 DomainGrid::upper_corner() const
	{
		Vector3 corner = origin;
		for (int d = 0; d < dimension; ++d)
			corner[d] += (double(dims[d]) - 0.5) * spacing;
		return corner;
	}

	bool DomainGrid::contains(const Vector3 &point) const
	{
		const Vector3 lo = lower_corner();
		const Vector3 hi = upper_corner();
		for (int d = 0; d < dimension; ++d)
		{
			if (point[d] < lo[d] || point[d] > hi[d])
				return false;
		}
		return true;
	}

	DomainGrid DomainGrid::refined(int factor) const
	{
		if (factor < 1)
			throw ConfigError("refinement factor must be >= 1");
		DomainGrid fine = *this;
		fine.spacing = spacing / factor;
		for (int d = 0; d < dimension; ++d)
		{
			fine.dims[d] = dims[d] * factor;
			fine.origin[d] = origin[d] - 0.5 * spacing + 0.5 * fine.spacing;
		}
		return fine;
	}

	SensorSet SensorSet::ring(Index count, double radius, double start_angle, const Vector3 &center)
	{
		if (count < 1)
			throw ConfigError("sensor ring needs at least one sensor");
		SensorSet set;
		set.positions.reserve(count);
		for (Index i = 0; i < count; ++i)
		{
			const double angle = start_angle + 2.0 * pi * double(i) / double(count);
			set.positions.push_back(center + Vector3(radius * std::cos(angle), radius * std::sin(angle), 0.0));
		}
		return set;
	}

	Index SensorSet::count_inside(const DomainGrid &grid) const
	{
		Index inside = 0;
		for (const auto &p : positions)
			inside += grid.contains(p) ? 1 : 0;
		return inside;
	}
} // namespace seagle
