#pragma once

#include "seagle/forward.hpp"

namespace seagle
{
	/// D = 1/2 |y - z|^2
	double data_fidelity(const ComplexVector &y, const ComplexVector &z);

	/// S^k v = v - gamma_k A^H A v
	ComplexVector apply_Sk(const RealVector &f, double gamma_k, const ComplexVector &v, const DomainOperator &G);

	/// T^k v = conj(G^H (A s^k - u_in)) . v + conj(s^k) . G^H (A v)
	ComplexVector apply_Tk(const RealVector &f, const ComplexVector &s_k, const ComplexVector &v,
						   const ComplexVector &u_in, const DomainOperator &G);

	/// Reverse pass through a recorded forward trace.
	///
	/// `sensor_residual` is H^H (z - y) mapped back onto the grid. Returns
	/// Re{r^0}, the gradient of D with respect to f with the step sizes held
	/// fixed at their recorded values.
	RealVector backpropagate(const RealVector &f, const ForwardTrace &trace, const ComplexVector &sensor_residual,
							 const DomainOperator &G);

	struct FidelityGradient
	{
		RealVector gradient;
		double value = 0.0; // D(f)
		ComplexVector z;
		int forward_iterations = 0;
	};

	/// Runs the forward model and backpropagates the data residual.
	FidelityGradient gradient_data_fidelity(const RealVector &f, const ComplexVector &y, const ComplexVector &u_in,
											const DomainOperator &G, const SensorOperator &H, std::span<const Index> rows,
											const ForwardConfig &cfg);

	/// All sensor rows of H.
	RealVector gradient_data_fidelity(const RealVector &f, const ComplexVector &y, const ComplexVector &u_in,
									  const DomainOperator &G, const SensorOperator &H, const ForwardConfig &cfg);
} // namespace seagle
