#pragma once

#include <span>
#include <vector>

#include "seagle/greens.hpp"

namespace seagle
{
	enum class StepMode
	{
		adaptive, // gamma_k = |g|^2 / |A g|^2
		fixed,    // gamma_k = fixed_step
	};

	enum class StopRule
	{
		gradient_norm, // |g|_2 < delta_tol
		objective,     // S(s^k) < delta_tol
	};

	struct ForwardConfig
	{
		int max_iters = 120;
		double delta_tol = 0.0;
		StopRule stop_rule = StopRule::gradient_norm;
		StepMode step_mode = StepMode::adaptive;
		double fixed_step = 0.0;
		/// false pins mu_k = 0, i.e. plain gradient descent on S.
		bool accelerated = true;
		/// Keep {s^k} and {G^H(A s^k - u_in)}; required for backpropagation.
		bool record_history = true;

		void validate() const;
	};

	/// Everything the backward pass needs from one forward solve.
	struct ForwardTrace
	{
		std::vector<ComplexVector> s_history;
		/// G^H (A s^k - u_in) for each k, reused by the backward pass.
		std::vector<ComplexVector> adjoint_residual_history;
		std::vector<double> gamma_history;
		std::vector<double> mu_history;
		/// S(u^k) for each k.
		std::vector<double> objective_history;
		ComplexVector u_hat;
		ComplexVector z;
		int iterations = 0;
	};

	/// S(u) = 1/2 |A u - u_in|^2
	double scattering_objective(const RealVector &f, const ComplexVector &u, const ComplexVector &u_in,
								const DomainOperator &G);

	/// grad S(u) = A^H (A u - u_in)
	ComplexVector objective_gradient(const RealVector &f, const ComplexVector &u, const ComplexVector &u_in,
									 const DomainOperator &G);

	/// Largest eigenvalue of A^H A by power iteration.
	double estimate_normal_norm(const RealVector &f, const DomainOperator &G, int max_iters = 20, double rel_tol = 1e-3);

	/// Accelerated-gradient expansion of the total field. u^0 = u^{-1} = u_in
	/// unless `initial` is given (warm start; invalidates backpropagation).
	ForwardTrace forward_solve(const RealVector &f, const ComplexVector &u_in, const DomainOperator &G,
							   const ForwardConfig &cfg, const ComplexVector *initial = nullptr);

	/// forward_solve followed by z = H (u_hat . f).
	ForwardTrace forward_solve(const RealVector &f, const ComplexVector &u_in, const DomainOperator &G,
							   const SensorOperator &H, const ForwardConfig &cfg);

	/// z = H (u_hat . f): scattered field only, no incident term.
	ComplexVector predict_scattered(const ComplexVector &u_hat, const RealVector &f, const SensorOperator &H);
	ComplexVector predict_scattered(const ComplexVector &u_hat, const RealVector &f, const SensorOperator &H,
									std::span<const Index> rows);
} // namespace seagle
