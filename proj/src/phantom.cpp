#include "seagle/phantom.hpp"

#include <cmath>

#include "seagle/io.hpp"

namespace seagle
{
	void PhantomSpec::validate() const
	{
		if (supersample < 1)
			throw ConfigError("phantom supersample must be >= 1");
		if (kind == Kind::cylinders)
		{
			for (const auto &c : cylinders)
				if (!(c.radius > 0.0) || !std::isfinite(c.contrast) || !c.center.allFinite())
					throw ConfigError("cylinder needs a positive radius, finite center and finite contrast");
		}
		if (kind == Kind::shepp_logan && (!std::isfinite(contrast) || !(half_width >= 0.0)))
			throw ConfigError("Shepp-Logan phantom needs a finite contrast and non-negative half-width");
		if (kind == Kind::from_file && path.empty())
			throw ConfigError("from_file phantom needs a path");
	}

	std::string to_string(PhantomSpec::Kind kind)
	{
		switch (kind)
		{
		case PhantomSpec::Kind::none: return "none";
		case PhantomSpec::Kind::cylinders: return "cylinders";
		case PhantomSpec::Kind::shepp_logan: return "shepp_logan";
		case PhantomSpec::Kind::from_file: return "from_file";
		}
		return "unknown";
	}

	PhantomSpec::Kind parse_phantom_kind(const std::string &name)
	{
		for (auto kind : {PhantomSpec::Kind::none, PhantomSpec::Kind::cylinders, PhantomSpec::Kind::shepp_logan,
						  PhantomSpec::Kind::from_file})
			if (to_string(kind) == name)
				return kind;
		throw ConfigError("unknown phantom kind '" + name + "'");
	}

	namespace
	{
		struct Ellipse
		{
			double value, a, b, x0, y0, phi_deg;
		};

		// Modified (higher-contrast) Shepp-Logan table on the unit square.
		constexpr Ellipse shepp_logan_table[] = {
			{1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
			{-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
			{-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
			{-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
			{0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
			{0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
			{0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
			{0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
			{0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
			{0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
		};

		double shepp_logan_value(double x, double y)
		{
			double v = 0.0;
			for (const auto &e : shepp_logan_table)
			{
				const double phi = e.phi_deg * pi / 180.0;
				const double dx = x - e.x0, dy = y - e.y0;
				const double u = dx * std::cos(phi) + dy * std::sin(phi);
				const double w = -dx * std::sin(phi) + dy * std::cos(phi);
				if ((u * u) / (e.a * e.a) + (w * w) / (e.b * e.b) <= 1.0)
					v += e.value;
			}
			return v;
		}

		// Averages `value` over supersample^D points inside each pixel.
		template <typename Fn>
		RealVector render_coverage(const DomainGrid &grid, int supersample, Fn value)
		{
			RealVector out(grid.size());
			const int sz = grid.dimension == 3 ? supersample : 1;
			const double weight = 1.0 / (double(supersample) * supersample * sz);
			for (Index n = 0; n < grid.size(); ++n)
			{
				const Vector3 c = grid.position(n);
				double sum = 0.0;
				for (int k = 0; k < sz; ++k)
					for (int j = 0; j < supersample; ++j)
						for (int i = 0; i < supersample; ++i)
						{
							Vector3 p = c;
							p.x() += ((i + 0.5) / supersample - 0.5) * grid.spacing;
							p.y() += ((j + 0.5) / supersample - 0.5) * grid.spacing;
							if (grid.dimension == 3)
								p.z() += ((k + 0.5) / supersample - 0.5) * grid.spacing;
							sum += value(p);
						}
				out[n] = sum * weight;
			}
			return out;
		}
	} // namespace

	RealVector render_phantom(const PhantomSpec &spec, const DomainGrid &grid)
	{
		spec.validate();
		grid.validate();
		const double kb2 = std::pow(grid.background_wavenumber(), 2);
		switch (spec.kind)
		{
		case PhantomSpec::Kind::none: return RealVector::Zero(grid.size());
		case PhantomSpec::Kind::cylinders:
		{
			const int dim = grid.dimension;
			return kb2 * render_coverage(grid, spec.supersample, [&](const Vector3 &p) {
					   double v = 0.0;
					   for (const auto &c : spec.cylinders)
					   {
						   Vector3 d = p - c.center;
						   if (dim == 2)
							   d.z() = 0.0;
						   if (d.squaredNorm() <= c.radius * c.radius)
							   v += c.contrast;
					   }
					   return v;
				   });
		}
		case PhantomSpec::Kind::shepp_logan:
		{
			if (grid.dimension != 2)
				throw ConfigError("Shepp-Logan phantom is two-dimensional");
			const Vector3 lo = grid.lower_corner(), hi = grid.upper_corner();
			const Vector3 mid = 0.5 * (lo + hi);
			const double half = spec.half_width > 0.0 ? spec.half_width : 0.5 * std::min(hi.x() - lo.x(), hi.y() - lo.y());
			RealVector f = render_coverage(grid, spec.supersample, [&](const Vector3 &p) {
				return shepp_logan_value((p.x() - mid.x()) / half, (p.y() - mid.y()) / half);
			});
			const double peak = f.cwiseAbs().maxCoeff();
			if (peak == 0.0)
				throw ConfigError("Shepp-Logan phantom does not intersect the grid");
			return (spec.contrast * kb2 / peak) * f;
		}
		case PhantomSpec::Kind::from_file:
		{
			const ImageData image = load_image_csv(spec.path);
			if (image.grid.dims != grid.dims || image.grid.dimension != grid.dimension)
				throw ConfigError("phantom file grid does not match the configured grid");
			return image.values;
		}
		}
		throw ConfigError("unhandled phantom kind");
	}

	double contrast_of(const RealVector &f, const DomainGrid &grid)
	{
		return f.size() == 0 ? 0.0 : f.cwiseAbs().maxCoeff() / std::pow(grid.background_wavenumber(), 2);
	}
} // namespace seagle
