#pragma once

#include <limits>

#include "seagle/grid.hpp"

namespace seagle
{
	/// Stacked finite differences: row n holds ([D_1 f]_n, ..., [D_D f]_n).
	using GradientField = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;

	enum class TvVariant
	{
		isotropic,
		anisotropic,
	};

	struct BoxConstraint
	{
		double lower = -std::numeric_limits<double>::infinity();
		double upper = std::numeric_limits<double>::infinity();

		void validate() const;
		bool operator==(const BoxConstraint &) const = default;
	};

	/// Forward differences with replicate (Neumann) closure at the far edge.
	GradientField grad_op(const RealVector &f, const DomainGrid &grid);
	/// Exact adjoint of grad_op (negative divergence).
	RealVector grad_adjoint(const GradientField &g, const DomainGrid &grid);

	double tv_value(const RealVector &f, const DomainGrid &grid, TvVariant variant);

	RealVector proj_box(const RealVector &f, const BoxConstraint &box);
	GradientField proj_dual(const GradientField &g, TvVariant variant);

	struct ProxOptions
	{
		TvVariant variant = TvVariant::isotropic;
		int max_iters = 10;
		double delta_in = 1e-4;
		/// Dual step is 1 / (step_factor * tau).
		double step_factor = 12.0;
	};

	struct ProxResult
	{
		RealVector f;
		GradientField dual;
		int iterations = 0;
	};

	/// prox_{tau R}(z) constrained to `box`, by fast gradient projection on the
	/// dual. `warm_dual` (N x D) seeds the dual iterate; zero when null.
	ProxResult prox_tv(const RealVector &z, double tau, const BoxConstraint &box, const DomainGrid &grid,
					   const ProxOptions &options = {}, const GradientField *warm_dual = nullptr);

	/// Dual objective Q(g) minimized by the FGP iteration.
	double tv_dual_objective(const GradientField &g, const RealVector &z, double tau, const BoxConstraint &box,
							 const DomainGrid &grid);

	/// 1/2 |f - z|^2 + tau TV(f)
	double prox_objective(const RealVector &f, const RealVector &z, double tau, const DomainGrid &grid, TvVariant variant);
} // namespace seagle
