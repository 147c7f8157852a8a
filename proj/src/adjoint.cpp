#include "seagle/adjoint.hpp"

#include <numeric>

namespace seagle
{
	double data_fidelity(const ComplexVector &y, const ComplexVector &z)
	{
		require_same_size(y.size(), z.size(), "data_fidelity");
		return 0.5 * (y - z).squaredNorm();
	}

	ComplexVector apply_Sk(const RealVector &f, double gamma_k, const ComplexVector &v, const DomainOperator &G)
	{
		return v - gamma_k * apply_AH(f, apply_A(f, v, G), G);
	}

	ComplexVector apply_Tk(const RealVector &f, const ComplexVector &s_k, const ComplexVector &v,
						   const ComplexVector &u_in, const DomainOperator &G)
	{
		require_same_size(s_k.size(), G.size(), "apply_Tk iterate");
		require_same_size(v.size(), G.size(), "apply_Tk input");
		const ComplexVector adjoint_residual = G.apply_adjoint(apply_A(f, s_k, G) - u_in);
		return adjoint_residual.conjugate().cwiseProduct(v) + s_k.conjugate().cwiseProduct(G.apply_adjoint(apply_A(f, v, G)));
	}

	RealVector backpropagate(const RealVector &f, const ForwardTrace &trace, const ComplexVector &sensor_residual,
							 const DomainOperator &G)
	{
		const int K = trace.iterations;
		require_same_size(f.size(), G.size(), "backpropagate potential");
		require_same_size(sensor_residual.size(), G.size(), "backpropagate residual");
		if (K < 1)
			throw DimensionError("backpropagate: empty forward trace");
		if (Index(trace.s_history.size()) != K || Index(trace.adjoint_residual_history.size()) != K ||
			Index(trace.gamma_history.size()) != K || Index(trace.mu_history.size()) != K)
			throw DimensionError("backpropagate: forward trace lengths do not match its iteration count");

		const ComplexVector fc = f.cast<Complex>();
		ComplexVector q = fc.cwiseProduct(sensor_residual);                   // q^K
		ComplexVector r = trace.u_hat.conjugate().cwiseProduct(sensor_residual); // r^K
		ComplexVector sq_next = ComplexVector::Zero(f.size());                // S^{k+1} q^{k+1}
		double mu_next = 0.0;                                                  // mu_{k+1}

		for (int k = K; k >= 1; --k)
		{
			const double gamma = trace.gamma_history[k - 1];
			const double mu = trace.mu_history[k - 1];

			const ComplexVector aq = q - G.apply(fc.cwiseProduct(q));
			const ComplexVector gh_aq = G.apply_adjoint(aq);
			ComplexVector sq = q - gamma * (aq - fc.cwiseProduct(gh_aq));

			r += gamma * (trace.adjoint_residual_history[k - 1].conjugate().cwiseProduct(q) +
						  trace.s_history[k - 1].conjugate().cwiseProduct(gh_aq));

			q = (1.0 - mu) * sq + mu_next * sq_next;
			sq_next = std::move(sq);
			mu_next = mu;
		}
		return r.real();
	}

	FidelityGradient gradient_data_fidelity(const RealVector &f, const ComplexVector &y, const ComplexVector &u_in,
											const DomainOperator &G, const SensorOperator &H, std::span<const Index> rows,
											const ForwardConfig &cfg)
	{
		ForwardConfig recording = cfg;
		recording.record_history = true;
		ForwardTrace trace = forward_solve(f, u_in, G, recording);
		ComplexVector z = predict_scattered(trace.u_hat, f, H, rows);
		require_same_size(y.size(), z.size(), "gradient_data_fidelity measurements");

		FidelityGradient out;
		const ComplexVector sensor_residual = H.apply_adjoint(z - y, rows);
		out.gradient = backpropagate(f, trace, sensor_residual, G);
		out.value = data_fidelity(y, z);
		out.z = std::move(z);
		out.forward_iterations = trace.iterations;
		return out;
	}

	RealVector gradient_data_fidelity(const RealVector &f, const ComplexVector &y, const ComplexVector &u_in,
									  const DomainOperator &G, const SensorOperator &H, const ForwardConfig &cfg)
	{
		std::vector<Index> rows(H.sensor_count());
		std::iota(rows.begin(), rows.end(), Index(0));
		return gradient_data_fidelity(f, y, u_in, G, H, rows, cfg).gradient;
	}
} // namespace seagle
