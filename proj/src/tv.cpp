#include "seagle/tv.hpp"

#include <algorithm>
#include <cmath>

namespace seagle
{
	void BoxConstraint::validate() const
	{
		if (std::isnan(lower) || std::isnan(upper) || lower > upper)
			throw ConfigError("box constraint requires lower <= upper");
	}

	namespace
	{
		Index axis_stride(const DomainGrid &grid, int d)
		{
			return d == 0 ? 1 : d == 1 ? grid.dims[0] : grid.dims[0] * grid.dims[1];
		}
	} // namespace

	GradientField grad_op(const RealVector &f, const DomainGrid &grid)
	{
		require_same_size(f.size(), grid.size(), "grad_op");
		GradientField g = GradientField::Zero(f.size(), grid.dimension);
		for (Index n = 0; n < f.size(); ++n)
		{
			const auto idx = grid.multi_index(n);
			for (int d = 0; d < grid.dimension; ++d)
			{
				if (idx[d] + 1 < grid.dims[d])
					g(n, d) = f[n + axis_stride(grid, d)] - f[n];
			}
		}
		return g;
	}

	RealVector grad_adjoint(const GradientField &g, const DomainGrid &grid)
	{
		require_same_size(g.rows(), grid.size(), "grad_adjoint");
		require_same_size(g.cols(), grid.dimension, "grad_adjoint components");
		RealVector out = RealVector::Zero(g.rows());
		for (Index n = 0; n < g.rows(); ++n)
		{
			const auto idx = grid.multi_index(n);
			for (int d = 0; d < grid.dimension; ++d)
			{
				if (idx[d] + 1 < grid.dims[d])
				{
					out[n + axis_stride(grid, d)] += g(n, d);
					out[n] -= g(n, d);
				}
			}
		}
		return out;
	}

	double tv_value(const RealVector &f, const DomainGrid &grid, TvVariant variant)
	{
		const GradientField g = grad_op(f, grid);
		if (variant == TvVariant::anisotropic)
			return g.cwiseAbs().sum();
		return g.rowwise().norm().sum();
	}

	RealVector proj_box(const RealVector &f, const BoxConstraint &box)
	{
		return f.unaryExpr([&](double v) { return std::clamp(v, box.lower, box.upper); });
	}

	GradientField proj_dual(const GradientField &g, TvVariant variant)
	{
		GradientField out = g;
		if (variant == TvVariant::anisotropic)
		{
			out = g.unaryExpr([](double v) { return v / std::max(1.0, std::abs(v)); });
			return out;
		}
		for (Index n = 0; n < g.rows(); ++n)
			out.row(n) /= std::max(1.0, g.row(n).norm());
		return out;
	}

	ProxResult prox_tv(const RealVector &z, double tau, const BoxConstraint &box, const DomainGrid &grid,
					   const ProxOptions &options, const GradientField *warm_dual)
	{
		require_same_size(z.size(), grid.size(), "prox_tv");
		if (!(tau >= 0.0) || !std::isfinite(tau))
			throw ConfigError("prox_tv requires tau >= 0");
		if (options.max_iters < 1 || !(options.step_factor > 0.0) || !(options.delta_in >= 0.0))
			throw ConfigError("prox_tv options invalid");
		box.validate();

		ProxResult result;
		if (warm_dual)
		{
			require_same_size(warm_dual->rows(), z.size(), "prox_tv warm dual");
			require_same_size(warm_dual->cols(), grid.dimension, "prox_tv warm dual components");
			result.dual = *warm_dual;
		}
		else
		{
			result.dual = GradientField::Zero(z.size(), grid.dimension);
		}
		if (tau == 0.0)
		{
			result.f = proj_box(z, box);
			return result;
		}

		const double step = 1.0 / (options.step_factor * tau);
		GradientField g_prev = result.dual;
		GradientField g_tilde = g_prev;
		double q_prev = 1.0;
		int t = 0;
		while (t < options.max_iters)
		{
			++t;
			const RealVector primal = proj_box(z - tau * grad_adjoint(g_tilde, grid), box);
			GradientField g = proj_dual(g_tilde + step * grad_op(primal, grid), options.variant);
			// Clamped duals can repeat exactly while the extrapolated point still moves,
			// so the step from g_tilde has to be small as well.
			const double previous_norm = g_prev.norm();
			const double change = std::max((g - g_prev).norm(), (g - g_tilde).norm());
			const double q = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * q_prev * q_prev));
			g_tilde = g + ((q_prev - 1.0) / q) * (g - g_prev);
			g_prev = std::move(g);
			q_prev = q;
			if (previous_norm > 0.0 && change <= options.delta_in * previous_norm)
				break;
		}
		result.iterations = t;
		result.f = proj_box(z - tau * grad_adjoint(g_prev, grid), box);
		result.dual = std::move(g_prev);
		return result;
	}

	double tv_dual_objective(const GradientField &g, const RealVector &z, double tau, const BoxConstraint &box,
							 const DomainGrid &grid)
	{
		const RealVector w = z - tau * grad_adjoint(g, grid);
		return -0.5 * (w - proj_box(w, box)).squaredNorm() + 0.5 * w.squaredNorm();
	}

	double prox_objective(const RealVector &f, const RealVector &z, double tau, const DomainGrid &grid, TvVariant variant)
	{
		return 0.5 * (f - z).squaredNorm() + tau * tv_value(f, grid, variant);
	}
} // namespace seagle
