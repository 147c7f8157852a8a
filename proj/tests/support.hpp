#pragma once

#include <cmath>
#include <random>

#include "seagle/greens.hpp"
#include "seagle/tv.hpp"

namespace seagle::testing
{
	inline std::mt19937_64 &rng()
	{
		static std::mt19937_64 engine(20240611);
		return engine;
	}

	inline ComplexVector random_complex(Index n, std::mt19937_64 &gen = rng())
	{
		std::normal_distribution<double> normal;
		ComplexVector v(n);
		for (Index i = 0; i < n; ++i)
			v[i] = Complex(normal(gen), normal(gen));
		return v;
	}

	inline RealVector random_real(Index n, double lo = 0.0, double hi = 1.0, std::mt19937_64 &gen = rng())
	{
		std::uniform_real_distribution<double> uniform(lo, hi);
		RealVector v(n);
		for (Index i = 0; i < n; ++i)
			v[i] = uniform(gen);
		return v;
	}

	/// Random potential with max contrast `contrast`.
	inline RealVector random_potential(const DomainGrid &grid, double contrast, std::mt19937_64 &gen = rng())
	{
		return random_real(grid.size(), 0.0, contrast * std::pow(grid.background_wavenumber(), 2), gen);
	}

	/// <a, b> = a^H b
	inline Complex inner(const ComplexVector &a, const ComplexVector &b) { return a.dot(b); }

	inline double adjoint_mismatch(const ComplexVector &ax, const ComplexVector &y, const ComplexVector &x,
								   const ComplexVector &ahy)
	{
		const Complex lhs = inner(ax, y), rhs = inner(x, ahy);
		return std::abs(lhs - rhs) / std::max(std::abs(lhs), ax.norm() * y.norm() * 1e-300);
	}

	/// Dense G built entry by entry from Green's function samples.
	inline ComplexMatrix dense_G(const DomainGrid &grid)
	{
		const Index n = grid.size();
		ComplexMatrix G(n, n);
		const double kb = grid.background_wavenumber();
		for (Index i = 0; i < n; ++i)
			for (Index j = 0; j < n; ++j)
			{
				if (i == j)
					G(i, j) = grid.dimension == 2 ? green_2d_cell_integral(kb, grid.cell_measure())
												  : green_3d_cell_integral(kb, grid.cell_measure());
				else
					G(i, j) = green(grid, grid.position(i) - grid.position(j)) * grid.cell_measure();
			}
		return G;
	}

	inline ComplexMatrix dense_A(const ComplexMatrix &G, const RealVector &f)
	{
		return ComplexMatrix::Identity(G.rows(), G.cols()) - G * f.cast<Complex>().asDiagonal();
	}

	struct OracleResult
	{
		RealVector f;
		double objective = 0.0;
		double gap = 0.0;
	};

	/// prox of tau*TV over a box by accelerated primal-dual (Chambolle-Pock,
	/// strongly convex variant) with a duality-gap certificate.
	inline OracleResult tv_prox_oracle(const RealVector &z, double tau, const BoxConstraint &box, const DomainGrid &grid,
									   TvVariant variant, int max_iters = 400000, double gap_tol = 1e-11)
	{
		const double L2 = 4.0 * grid.dimension; // |D|^2 bound
		double sigma = 1.0 / std::sqrt(L2), tau_p = 1.0 / std::sqrt(L2);
		RealVector f = proj_box(z, box), f_bar = f;
		GradientField p = GradientField::Zero(z.size(), grid.dimension);

		auto project = [&](const GradientField &g) { return GradientField(tau * proj_dual(g / tau, variant)); };
		auto primal = [&](const RealVector &x) { return prox_objective(x, z, tau, grid, variant); };
		auto dual = [&](const GradientField &q) {
			const RealVector w = z - grad_adjoint(q, grid);
			const RealVector x = proj_box(w, box);
			return 0.5 * (x - w).squaredNorm() - 0.5 * w.squaredNorm() + 0.5 * z.squaredNorm();
		};

		OracleResult out;
		for (int it = 0; it < max_iters; ++it)
		{
			p = project(p + sigma * grad_op(f_bar, grid));
			const RealVector f_prev = f;
			f = proj_box((f - tau_p * grad_adjoint(p, grid) + tau_p * z) / (1.0 + tau_p), box);
			const double theta = 1.0 / std::sqrt(1.0 + 2.0 * tau_p);
			tau_p *= theta;
			sigma /= theta;
			f_bar = f + theta * (f - f_prev);
			if (it % 200 == 0)
			{
				const double P = primal(f);
				const double gap = P - dual(p);
				if (gap <= gap_tol * std::max(P, 1e-300))
					break;
			}
		}
		out.f = f;
		out.objective = primal(f);
		out.gap = out.objective - dual(p);
		return out;
	}
} // namespace seagle::testing
