#include "seagle/greens.hpp"

#include <cmath>
#include <mutex>

#include <fftw3.h>

#include "seagle/special.hpp"

namespace seagle
{
	Complex green_2d(double distance, double kb)
	{
		if (!(distance > 0.0))
			throw SingularityError("green_2d evaluated at zero separation");
		if (!(kb > 0.0))
			throw ConfigError("green_2d requires a positive wavenumber");
		return 0.25 * imag_unit * special::hankel1_0(kb * distance);
	}

	Complex green_2d(const Vector3 &displacement, double kb) { return green_2d(displacement.norm(), kb); }

	Complex green_3d(double distance, double kb)
	{
		if (!(distance > 0.0))
			throw SingularityError("green_3d evaluated at zero separation");
		return std::exp(imag_unit * (kb * distance)) / (4.0 * pi * distance);
	}

	Complex green_3d(const Vector3 &displacement, double kb) { return green_3d(displacement.norm(), kb); }

	Complex green(const DomainGrid &grid, const Vector3 &displacement)
	{
		return grid.dimension == 2 ? green_2d(displacement, grid.background_wavenumber())
								   : green_3d(displacement, grid.background_wavenumber());
	}

	Complex green_2d_cell_integral(double kb, double area)
	{
		// int_0^a r H0(kr) dr = a H1(ka)/k + 2j/(pi k^2)
		const double a = std::sqrt(area / pi);
		const Complex h1 = special::hankel1_1(kb * a);
		return 0.5 * imag_unit * pi * a / kb * h1 - 1.0 / (kb * kb);
	}

	Complex green_3d_cell_integral(double kb, double volume)
	{
		// int_0^a r exp(jkr) dr
		const double a = std::cbrt(3.0 * volume / (4.0 * pi));
		const double ka = kb * a;
		if (ka < 1e-4)
			return Complex(0.5 * a * a - kb * kb * a * a * a * a / 8.0, kb * a * a * a / 3.0);
		return (std::exp(imag_unit * ka) * Complex(1.0, -ka) - 1.0) / (kb * kb);
	}

	Complex interaction_weight(const DomainGrid &grid, const std::array<Index, 3> &offset)
	{
		const double kb = grid.background_wavenumber();
		if (offset[0] == 0 && offset[1] == 0 && offset[2] == 0)
		{
			return grid.dimension == 2 ? green_2d_cell_integral(kb, grid.cell_measure())
									   : green_3d_cell_integral(kb, grid.cell_measure());
		}
		const Vector3 r = grid.spacing * Vector3(double(offset[0]), double(offset[1]), double(offset[2]));
		return green(grid, r) * grid.cell_measure();
	}

	namespace
	{
		std::mutex &planner_mutex()
		{
			static std::mutex m;
			return m;
		}

		fftw_complex *as_fftw(Complex *p) { return reinterpret_cast<fftw_complex *>(p); }
	} // namespace

	struct DomainOperator::Impl
	{
		DomainGrid grid;
		std::array<Index, 3> padded{1, 1, 1};
		Index padded_size = 1;
		ComplexVector kernel_hat;
		ComplexVector adjoint_hat;
		fftw_plan forward = nullptr;
		fftw_plan backward = nullptr;

		explicit Impl(const DomainGrid &g) : grid(g)
		{
			grid.validate();
			for (int d = 0; d < grid.dimension; ++d)
			{
				if (grid.dims[d] < 2)
					throw ConfigError("domain operator needs at least 2 pixels per axis");
				padded[d] = 2 * grid.dims[d];
			}
			padded_size = padded[0] * padded[1] * padded[2];

			// fftw takes row-major extents with the fastest axis last.
			int n[3];
			int rank = grid.dimension;
			for (int d = 0; d < rank; ++d)
				n[d] = int(padded[rank - 1 - d]);

			ComplexVector scratch(padded_size);
			{
				std::lock_guard<std::mutex> lock(planner_mutex());
				forward = fftw_plan_dft(rank, n, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_FORWARD,
										FFTW_ESTIMATE | FFTW_UNALIGNED);
				backward = fftw_plan_dft(rank, n, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_BACKWARD,
										 FFTW_ESTIMATE | FFTW_UNALIGNED);
			}
			if (!forward || !backward)
				throw NumericalError("fftw planning failed");

			// Wrapped offsets: padded index p maps to offset p (p < n) or p - 2n (p > n);
			// p == n is never reached by a valid pixel pair and stays zero.
			kernel_hat = ComplexVector::Zero(padded_size);
			auto wrap = [](Index p, Index extent, Index padded_extent, bool &valid) {
				if (p < extent)
					return p;
				if (p == extent)
				{
					valid = false;
					return Index(0);
				}
				return p - padded_extent;
			};
			for (Index pz = 0; pz < padded[2]; ++pz)
				for (Index py = 0; py < padded[1]; ++py)
					for (Index px = 0; px < padded[0]; ++px)
					{
						bool valid = true;
						std::array<Index, 3> offset{wrap(px, grid.dims[0], padded[0], valid),
													wrap(py, grid.dims[1], padded[1], valid),
													grid.dimension == 3 ? wrap(pz, grid.dims[2], padded[2], valid) : Index(0)};
						if (!valid)
							continue;
						kernel_hat[px + padded[0] * (py + padded[1] * pz)] = interaction_weight(grid, offset);
					}
			adjoint_hat = kernel_hat.conjugate();
			fftw_execute_dft(forward, as_fftw(kernel_hat.data()), as_fftw(kernel_hat.data()));
			fftw_execute_dft(forward, as_fftw(adjoint_hat.data()), as_fftw(adjoint_hat.data()));
		}

		~Impl()
		{
			std::lock_guard<std::mutex> lock(planner_mutex());
			fftw_destroy_plan(forward);
			fftw_destroy_plan(backward);
		}

		Impl(const Impl &) = delete;
		Impl &operator=(const Impl &) = delete;

		ComplexVector convolve(const ComplexVector &v, const ComplexVector &spectrum) const
		{
			require_same_size(v.size(), grid.size(), "Green's operator input");
			ComplexVector buffer = ComplexVector::Zero(padded_size);
			const auto &dims = grid.dims;
			Index n = 0;
			for (Index iz = 0; iz < dims[2]; ++iz)
				for (Index iy = 0; iy < dims[1]; ++iy)
				{
					const Index row = padded[0] * (iy + padded[1] * iz);
					for (Index ix = 0; ix < dims[0]; ++ix, ++n)
						buffer[row + ix] = v[n];
				}
			fftw_execute_dft(forward, as_fftw(buffer.data()), as_fftw(buffer.data()));
			buffer.array() *= spectrum.array();
			fftw_execute_dft(backward, as_fftw(buffer.data()), as_fftw(buffer.data()));

			const double scale = 1.0 / double(padded_size);
			ComplexVector out(grid.size());
			n = 0;
			for (Index iz = 0; iz < dims[2]; ++iz)
				for (Index iy = 0; iy < dims[1]; ++iy)
				{
					const Index row = padded[0] * (iy + padded[1] * iz);
					for (Index ix = 0; ix < dims[0]; ++ix, ++n)
						out[n] = buffer[row + ix] * scale;
				}
			return out;
		}
	};

	DomainOperator::DomainOperator(const DomainGrid &grid) : impl_(std::make_shared<const Impl>(grid)) {}

	const DomainGrid &DomainOperator::grid() const { return impl_->grid; }

	ComplexVector DomainOperator::apply(const ComplexVector &v) const { return impl_->convolve(v, impl_->kernel_hat); }

	ComplexVector DomainOperator::apply_adjoint(const ComplexVector &v) const
	{
		return impl_->convolve(v, impl_->adjoint_hat);
	}

	SensorOperator::SensorOperator(const DomainGrid &grid, const SensorSet &sensors) : grid_(grid)
	{
		grid_.validate();
		if (sensors.size() < 1)
			throw ConfigError("sensor set is empty");
		if (const Index inside = sensors.count_inside(grid_); inside > 0)
			warn(std::to_string(inside) + " sensor(s) lie inside the imaging domain");

		const double tolerance = 1e-12 * grid_.spacing;
		auto matrix = std::make_shared<ComplexMatrix>(sensors.size(), grid_.size());
		const double weight = grid_.cell_measure();
		for (Index n = 0; n < grid_.size(); ++n)
		{
			const Vector3 pixel = grid_.position(n);
			for (Index m = 0; m < sensors.size(); ++m)
			{
				const Vector3 r = sensors.positions[m] - pixel;
				if (r.norm() <= tolerance)
					throw SingularityError("sensor " + std::to_string(m) + " coincides with pixel center " + std::to_string(n));
				(*matrix)(m, n) = green(grid_, r) * weight;
			}
		}
		matrix_ = std::move(matrix);
	}

	ComplexVector SensorOperator::apply(const ComplexVector &v) const
	{
		require_same_size(v.size(), matrix_->cols(), "sensor operator input");
		return (*matrix_) * v;
	}

	ComplexVector SensorOperator::apply_adjoint(const ComplexVector &w) const
	{
		require_same_size(w.size(), matrix_->rows(), "sensor operator adjoint input");
		return matrix_->adjoint() * w;
	}

	ComplexVector SensorOperator::apply(const ComplexVector &v, std::span<const Index> rows) const
	{
		require_same_size(v.size(), matrix_->cols(), "sensor operator input");
		ComplexVector out(Index(rows.size()));
		for (Index i = 0; i < Index(rows.size()); ++i)
			out[i] = (matrix_->row(rows[i]) * v).value();
		return out;
	}

	ComplexVector SensorOperator::apply_adjoint(const ComplexVector &w, std::span<const Index> rows) const
	{
		require_same_size(w.size(), Index(rows.size()), "sensor operator adjoint input");
		ComplexVector out = ComplexVector::Zero(matrix_->cols());
		for (Index i = 0; i < Index(rows.size()); ++i)
			out += matrix_->row(rows[i]).adjoint() * w[i];
		return out;
	}

	ComplexVector apply_A(const RealVector &f, const ComplexVector &u, const DomainOperator &G)
	{
		require_same_size(f.size(), G.size(), "apply_A potential");
		require_same_size(u.size(), G.size(), "apply_A field");
		const ComplexVector weighted = f.cast<Complex>().cwiseProduct(u);
		return u - G.apply(weighted);
	}

	ComplexVector apply_AH(const RealVector &f, const ComplexVector &u, const DomainOperator &G)
	{
		require_same_size(f.size(), G.size(), "apply_AH potential");
		require_same_size(u.size(), G.size(), "apply_AH field");
		return u - f.cast<Complex>().cwiseProduct(G.apply_adjoint(u));
	}
} // namespace seagle
