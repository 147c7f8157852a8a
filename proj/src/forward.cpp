#include "seagle/forward.hpp"

#include <cmath>
#include <random>

namespace seagle
{
	void ForwardConfig::validate() const
	{
		if (max_iters < 1)
			throw ConfigError("forward max_iters must be >= 1");
		if (!(delta_tol >= 0.0))
			throw ConfigError("forward delta_tol must be >= 0");
		if (step_mode == StepMode::fixed && !(fixed_step > 0.0))
			throw ConfigError("fixed forward step must be positive");
	}

	double scattering_objective(const RealVector &f, const ComplexVector &u, const ComplexVector &u_in,
								const DomainOperator &G)
	{
		require_same_size(u_in.size(), u.size(), "scattering_objective");
		return 0.5 * (apply_A(f, u, G) - u_in).squaredNorm();
	}

	ComplexVector objective_gradient(const RealVector &f, const ComplexVector &u, const ComplexVector &u_in,
									 const DomainOperator &G)
	{
		require_same_size(u_in.size(), u.size(), "objective_gradient");
		return apply_AH(f, apply_A(f, u, G) - u_in, G);
	}

	double estimate_normal_norm(const RealVector &f, const DomainOperator &G, int max_iters, double rel_tol)
	{
		std::mt19937_64 rng(0x5ea61e);
		std::normal_distribution<double> normal;
		ComplexVector v(G.size());
		for (Index i = 0; i < v.size(); ++i)
			v[i] = Complex(normal(rng), normal(rng));
		v.normalize();

		double estimate = 0.0;
		for (int it = 0; it < max_iters; ++it)
		{
			ComplexVector w = apply_AH(f, apply_A(f, v, G), G);
			const double next = w.norm();
			if (next == 0.0)
				return 0.0;
			v = w / next;
			const bool settled = estimate > 0.0 && std::abs(next - estimate) < rel_tol * next;
			estimate = next;
			if (settled)
				break;
		}
		return estimate;
	}

	ForwardTrace forward_solve(const RealVector &f, const ComplexVector &u_in, const DomainOperator &G,
							   const ForwardConfig &cfg, const ComplexVector *initial)
	{
		cfg.validate();
		require_same_size(f.size(), G.size(), "forward_solve potential");
		require_same_size(u_in.size(), G.size(), "forward_solve incident field");
		if (initial)
			require_same_size(initial->size(), G.size(), "forward_solve initial field");

		const ComplexVector fc = f.cast<Complex>();
		auto apply_a = [&](const ComplexVector &v) -> ComplexVector { return v - G.apply(fc.cwiseProduct(v)); };

		ForwardTrace trace;
		if (cfg.record_history)
		{
			trace.s_history.reserve(cfg.max_iters);
			trace.adjoint_residual_history.reserve(cfg.max_iters);
		}

		// A u is carried along by linearity, so each iteration costs one G and one G^H.
		ComplexVector u_prev = initial ? *initial : u_in; // u^{k-1}
		ComplexVector u_prev2 = u_prev;                   // u^{k-2}
		ComplexVector au_prev = apply_a(u_prev);
		ComplexVector au_prev2 = au_prev;
		double t_prev = 0.0;

		for (int k = 1; k <= cfg.max_iters; ++k)
		{
			const double t = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_prev * t_prev));
			const double mu = cfg.accelerated ? (1.0 - t_prev) / t : 0.0;

			ComplexVector s = (1.0 - mu) * u_prev + mu * u_prev2;
			ComplexVector as = (1.0 - mu) * au_prev + mu * au_prev2;
			const ComplexVector residual = as - u_in;
			ComplexVector adjoint_residual = G.apply_adjoint(residual);
			const ComplexVector g = residual - fc.cwiseProduct(adjoint_residual);
			const double g_norm = g.norm();

			const bool converged = cfg.stop_rule == StopRule::gradient_norm
									   ? g_norm < cfg.delta_tol
									   : 0.5 * residual.squaredNorm() < cfg.delta_tol;

			const ComplexVector ag = apply_a(g);
			double gamma = cfg.fixed_step;
			if (cfg.step_mode == StepMode::adaptive)
			{
				const double ag_sq = ag.squaredNorm();
				if (ag_sq == 0.0)
				{
					if (g_norm > 0.0)
						throw NumericalError("forward step size degenerate: |A g| = 0 with |g| > 0");
					gamma = 1.0; // g == 0; the update is a no-op
				}
				else
				{
					gamma = g_norm * g_norm / ag_sq;
				}
			}

			ComplexVector u = s - gamma * g;
			ComplexVector au = as - gamma * ag;
			trace.objective_history.push_back(0.5 * (au - u_in).squaredNorm());
			trace.gamma_history.push_back(gamma);
			trace.mu_history.push_back(mu);
			if (cfg.record_history)
			{
				trace.s_history.push_back(std::move(s));
				trace.adjoint_residual_history.push_back(std::move(adjoint_residual));
			}

			u_prev2 = std::move(u_prev);
			au_prev2 = std::move(au_prev);
			u_prev = std::move(u);
			au_prev = std::move(au);
			t_prev = t;
			trace.iterations = k;
			if (!std::isfinite(g_norm))
				throw NumericalError("forward solve produced a non-finite gradient");
			if (converged)
				break;
		}
		trace.u_hat = std::move(u_prev);
		return trace;
	}

	ForwardTrace forward_solve(const RealVector &f, const ComplexVector &u_in, const DomainOperator &G,
							   const SensorOperator &H, const ForwardConfig &cfg)
	{
		ForwardTrace trace = forward_solve(f, u_in, G, cfg);
		trace.z = predict_scattered(trace.u_hat, f, H);
		return trace;
	}

	ComplexVector predict_scattered(const ComplexVector &u_hat, const RealVector &f, const SensorOperator &H)
	{
		require_same_size(u_hat.size(), f.size(), "predict_scattered");
		return H.apply(f.cast<Complex>().cwiseProduct(u_hat));
	}

	ComplexVector predict_scattered(const ComplexVector &u_hat, const RealVector &f, const SensorOperator &H,
									std::span<const Index> rows)
	{
		require_same_size(u_hat.size(), f.size(), "predict_scattered");
		return H.apply(f.cast<Complex>().cwiseProduct(u_hat), rows);
	}
} // namespace seagle
