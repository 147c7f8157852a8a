#pragma once

#include <memory>
#include <span>

#include "seagle/grid.hpp"

namespace seagle
{
	/// Outgoing 2D Helmholtz Green's function (j/4) H0^(1)(kb |r|).
	Complex green_2d(double distance, double kb);
	Complex green_2d(const Vector3 &displacement, double kb);

	/// Outgoing 3D Helmholtz Green's function exp(j kb |r|) / (4 pi |r|).
	Complex green_3d(double distance, double kb);
	Complex green_3d(const Vector3 &displacement, double kb);

	/// Green's function of the grid's dimension.
	Complex green(const DomainGrid &grid, const Vector3 &displacement);

	/// Integral of the 2D Green's function over a disk of the given area centered on the singularity.
	Complex green_2d_cell_integral(double kb, double area);
	/// Integral of the 3D Green's function over a ball of the given volume centered on the singularity.
	Complex green_3d_cell_integral(double kb, double volume);

	/// Interaction weight between two pixels separated by an integer offset:
	/// g(offset * spacing) * cell measure, or the cell integral at zero offset.
	Complex interaction_weight(const DomainGrid &grid, const std::array<Index, 3> &offset);

	/// Domain-to-domain Green's operator G, applied as a convolution on a
	/// zero-padded grid of doubled extent per axis. Immutable and cheap to copy.
	class DomainOperator
	{
	public:
		explicit DomainOperator(const DomainGrid &grid);

		const DomainGrid &grid() const;
		Index size() const { return grid().size(); }

		ComplexVector apply(const ComplexVector &v) const;
		ComplexVector apply_adjoint(const ComplexVector &v) const;

	private:
		struct Impl;
		std::shared_ptr<const Impl> impl_;
	};

	/// Domain-to-sensor Green's operator H (dense M x N).
	class SensorOperator
	{
	public:
		SensorOperator(const DomainGrid &grid, const SensorSet &sensors);

		const DomainGrid &grid() const { return grid_; }
		Index sensor_count() const { return matrix_->rows(); }
		const ComplexMatrix &matrix() const { return *matrix_; }

		ComplexVector apply(const ComplexVector &v) const;
		ComplexVector apply_adjoint(const ComplexVector &w) const;

		/// H restricted to a subset of sensor rows (receiver masking).
		ComplexVector apply(const ComplexVector &v, std::span<const Index> rows) const;
		ComplexVector apply_adjoint(const ComplexVector &w, std::span<const Index> rows) const;

	private:
		DomainGrid grid_;
		std::shared_ptr<const ComplexMatrix> matrix_;
	};

	/// A u = u - G (f . u)
	ComplexVector apply_A(const RealVector &f, const ComplexVector &u, const DomainOperator &G);
	/// A^H u = u - f . G^H u   (f is real)
	ComplexVector apply_AH(const RealVector &f, const ComplexVector &u, const DomainOperator &G);
} // namespace seagle
