// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "seagle/analytic.hpp"
#include "seagle/io.hpp"
#include "seagle/metrics.hpp"
#include "support.hpp"

using namespace seagle;
using namespace seagle::testing;

namespace
{
	struct Outcome
	{
		bool ok = true;
		std::ostringstream detail;

		void require(bool condition, const std::string &what)
		{
			if (!condition)
			{
				ok = false;
				detail << " [failed: " << what << "]";
			}
		}
	};

	int failures = 0;

	void criterion(int number, const char *name, double budget_seconds, const std::function<void(Outcome &)> &body)
	{
		Outcome out;
		const auto start = std::chrono::steady_clock::now();
		try
		{
			body(out);
		}
		catch (const std::exception &e)
		{
			out.ok = false;
			out.detail << " [exception: " << e.what() << "]";
		}
		const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
		out.require(seconds < budget_seconds, "runtime budget");
		if (!out.ok)
			++failures;
		std::printf("%s %d %s:%s (%.1f s of %.0f s)\n", out.ok ? "PASS" : "FAIL", number, name, out.detail.str().c_str(),
					seconds, budget_seconds);
		std::fflush(stdout);
	}

	void adjoint_identities(Outcome &out)
	{
		const DomainGrid grid = DomainGrid::centered(2, {32, 32, 1}, 0.05, 1.0);
		const DomainGrid cube = DomainGrid::centered(3, {8, 8, 8}, 0.1, 1.0);
		const DomainOperator G(grid), G3(cube);
		const SensorOperator H(grid, SensorSet::ring(40, 2.5, 0.1));
		const RealVector f = random_potential(grid, 0.2);
		const Index n = grid.size();
		double g = 0.0, h = 0.0, a = 0.0, d = 0.0;
		for (int i = 0; i < 10; ++i)
		{
			const ComplexVector x = random_complex(n), y = random_complex(n), w = random_complex(H.sensor_count());
			g = std::max(g, adjoint_mismatch(G.apply(x), y, x, G.apply_adjoint(y)));
			const ComplexVector x3 = random_complex(cube.size()), y3 = random_complex(cube.size());
			g = std::max(g, adjoint_mismatch(G3.apply(x3), y3, x3, G3.apply_adjoint(y3)));
			h = std::max(h, adjoint_mismatch(H.apply(x), w, x, H.apply_adjoint(w)));
			a = std::max(a, adjoint_mismatch(apply_A(f, x, G), y, x, apply_AH(f, y, G)));

			const RealVector u = random_real(n, -1.0, 1.0);
			const GradientField v = random_real(2 * n, -1.0, 1.0).reshaped(n, 2);
			const double lhs = (grad_op(u, grid).array() * v.array()).sum(), rhs = u.dot(grad_adjoint(v, grid));
			d = std::max(d, std::abs(lhs - rhs) / std::abs(lhs));
		}
		out.detail << " G " << g << ", H " << h << ", A " << a << ", D " << d;
		out.require(std::max({g, h, a, d}) <= 1e-12, "relative mismatch <= 1e-12");
	}

	void gradient_check(Outcome &out)
	{
		const DomainGrid grid = DomainGrid::centered(2, {10, 10, 1}, 0.1, 1.0);
		const DomainOperator G(grid);
		const SensorOperator H(grid, SensorSet::ring(12, 2.0));
		Transmitter tx;
		tx.location = Vector3(3.0, 0.5, 0.0);
		const ComplexVector u_in = incident_field(tx, grid);
		const std::vector<int> ks{1, 3, 8};
		double fixed_worst = 0.0;
		std::vector<double> adaptive_worst(ks.size(), 0.0);
		for (int draw = 0; draw < 5; ++draw)
		{
			const RealVector f = random_potential(grid, 0.2);
			const ComplexVector y = 0.01 * random_complex(H.sensor_count());
			const double step = 1.0 / estimate_normal_norm(f, G, 60, 1e-9);
			for (const bool adaptive : {false, true})
				for (size_t k = 0; k < ks.size(); ++k)
				{
					ForwardConfig cfg;
					cfg.max_iters = ks[k];
					cfg.step_mode = adaptive ? StepMode::adaptive : StepMode::fixed;
					cfg.fixed_step = step;
					const RealVector grad = gradient_data_fidelity(f, y, u_in, G, H, cfg);
					auto D = [&](const RealVector &p) { return data_fidelity(y, forward_solve(p, u_in, G, H, cfg).z); };
					const double dh = 1e-4 * f.maxCoeff();
					RealVector fd(f.size());
					for (Index n = 0; n < f.size(); ++n)
					{
						RealVector p = f, m = f;
						p[n] += dh;
						m[n] -= dh;
						fd[n] = (D(p) - D(m)) / (2.0 * dh);
					}
					const double e = (grad - fd).norm() / fd.norm();
					if (adaptive)
						adaptive_worst[k] = std::max(adaptive_worst[k], e);
					else
						fixed_worst = std::max(fixed_worst, e);
				}
		}
		out.detail << " fixed " << fixed_worst << "; adaptive";
		for (size_t k = 0; k < ks.size(); ++k)
		{
			out.detail << " K=" << ks[k] << " " << adaptive_worst[k];
			out.require(adaptive_worst[k] <= 1e-3, "adaptive K=" + std::to_string(ks[k]) + " <= 1e-3");
		}
		out.require(fixed_worst <= 1e-6, "fixed <= 1e-6");
	}

	void forward_vs_analytic(Outcome &out)
	{
		const DomainGrid grid = DomainGrid::centered(2, {64, 64, 1}, 0.05, 1.0);
		const DomainOperator G(grid);
		const double kb = grid.background_wavenumber();
		const std::vector<int> ks{1, 2, 4, 8, 16, 32, 64, 128, 256};
		for (const double contrast : {0.05, 0.1, 0.2, 0.4})
		{
			analytic::Scene scene;
			scene.radius = 1.0;
			scene.index = std::sqrt(1.0 + contrast);
			scene.source_distance = 3.0;
			scene.kb = kb;
			const analytic::CylinderField field(scene);
			ComplexVector truth(grid.size());
			for (Index n = 0; n < grid.size(); ++n)
				truth[n] = field.at(grid.position(n)).value;

			PhantomSpec phantom;
			phantom.kind = PhantomSpec::Kind::cylinders;
			phantom.cylinders = {{Vector3::Zero(), scene.radius, contrast}};
			const RealVector f = render_phantom(phantom, grid);
			Transmitter tx;
			tx.location = Vector3(scene.source_distance, 0.0, 0.0);
			const ComplexVector u_in = incident_field(tx, grid);
			const double born = normalized_error(ComplexVector(u_in + G.apply(f.cast<Complex>().cwiseProduct(u_in))), truth);

			std::vector<double> errors;
			for (const int K : ks)
			{
				ForwardConfig cfg;
				cfg.max_iters = K;
				cfg.record_history = false;
				errors.push_back(normalized_error(forward_solve(f, u_in, G, cfg).u_hat, truth));
			}
			// Past the plateau (within twice the converged error) small wiggles are allowed.
			const double converged = errors.back();
			bool monotone = true;
			for (size_t i = 1; i < errors.size(); ++i)
				if (errors[i] > errors[i - 1] && errors[i] > 2.0 * converged)
					monotone = false;

			out.detail << " " << contrast * 100 << "%: " << converged << " vs Born " << born << ";";
			out.require(monotone, "non-increasing in K before the plateau");
			if (contrast >= 0.1)
				out.require(converged < born, "SEAGLE below Born");
			if (contrast == 0.1)
				out.require(converged <= 3e-2, "SEAGLE <= 3e-2 at 10%");
		}
	}

	void tv_prox(Outcome &out)
	{
		const DomainGrid grid = DomainGrid::centered(2, {5, 5, 1}, 1.0, 1.0);
		const double inf = std::numeric_limits<double>::infinity();
		double worst = 0.0;
		int instances = 0;
		bool nonexpansive = true;
		for (const TvVariant variant : {TvVariant::isotropic, TvVariant::anisotropic})
			for (const double tau : {0.01, 0.1, 1.0})
				for (const BoxConstraint box : {BoxConstraint{0.0, inf}, BoxConstraint{}})
				{
					ProxOptions options;
					options.variant = variant;
					options.max_iters = 2000;
					options.delta_in = 0.0;
					std::vector<RealVector> inputs, outputs;
					for (int i = 0; i < 4; ++i)
					{
						const RealVector z = random_real(25, -0.2, 1.0);
						const OracleResult oracle = tv_prox_oracle(z, tau, box, grid, variant);
						const RealVector p = prox_tv(z, tau, box, grid, options).f;
						const double objective = prox_objective(p, z, tau, grid, variant);
						worst = std::max(worst, std::abs(objective - oracle.objective) / oracle.objective);
						out.require(oracle.gap <= 1e-10 * oracle.objective, "oracle certified by its duality gap");
						inputs.push_back(z);
						outputs.push_back(p);
						++instances;
					}
					for (size_t i = 0; i < inputs.size(); ++i)
						for (size_t j = i + 1; j < inputs.size(); ++j)
							nonexpansive = nonexpansive && (outputs[i] - outputs[j]).norm() <=
																 (inputs[i] - inputs[j]).norm() * (1.0 + 1e-12);
				}
		out.detail << " " << instances << " instances, worst relative objective gap " << worst;
		out.require(instances >= 20, "at least 20 instances");
		out.require(worst <= 1e-8, "objective within 1e-8 of the oracle");
		out.require(nonexpansive, "nonexpansive on all pairs");
	}

	void end_to_end(Outcome &out)
	{
		ExperimentConfig cfg;
		cfg.grid = DomainGrid::centered(2, {64, 64, 1}, 0.1, 1.0);
		cfg.geometry.transmitters = 8;
		cfg.geometry.receivers = 60;
		cfg.geometry.ring_radius = 10.0;
		cfg.phantom.kind = PhantomSpec::Kind::cylinders;
		cfg.phantom.cylinders = {{Vector3(-1.2, -0.3, 0.0), 0.75, 0.2}, {Vector3(1.1, 0.6, 0.0), 0.75, 0.2}};
		cfg.recon.iterations = 50;
		cfg.recon.tau_rel = 1.5e-9;
		cfg.recon.forward.max_iters = 40;
		cfg.simulate.refine = 2;
		cfg.simulate.k_factor = 4;
		cfg.validate();

		const RingLayout layout = ring_layout(cfg.geometry, cfg.grid);
		const DomainGrid fine = cfg.grid.refined(cfg.simulate.refine);
		ForwardConfig data_forward = cfg.recon.forward;
		data_forward.max_iters *= cfg.simulate.k_factor;
		const MeasurementSet m = simulate_measurements(fine, render_phantom(cfg.phantom, fine), layout.receivers,
													   layout.transmitters, layout.active, data_forward);
		const RealVector truth = render_phantom(cfg.phantom, cfg.grid);

		const ReconReport seagle = fista_reconstruct(cfg.grid, m, cfg.recon, &truth);
		ReconConfig born_cfg = cfg.recon;
		born_cfg.model = ReconModel::born;
		const ReconReport born = fista_reconstruct(cfg.grid, m, born_cfg, &truth);

		out.detail << " data fit " << seagle.data_fit.back() << ", error " << seagle.recon_error.back() << " vs Born "
				   << born.recon_error.back() << " after " << seagle.iterations << " iterations";
		out.require(seagle.iterations <= 50, "at most 50 iterations");
		out.require(seagle.data_fit.back() <= 1e-2, "data fit <= 1e-2");
		out.require(seagle.recon_error.back() < born.recon_error.back(), "error below Born");
	}

	template <typename R>
	Complex slope_jump(R radial, double r0, double h)
	{
		const Complex right = (-3.0 * radial(r0) + 4.0 * radial(r0 + h) - radial(r0 + 2.0 * h)) / (2.0 * h);
		const Complex left = (3.0 * radial(r0) - 4.0 * radial(r0 - h) + radial(r0 - 2.0 * h)) / (2.0 * h);
		return right - left;
	}

	void analytic_consistency(Outcome &out)
	{
		analytic::Scene s;
		s.radius = 0.7;
		s.index = 1.4;
		s.source_distance = 1.8;
		s.kb = 2.0 * pi;
		const double rho = s.kb * s.radius;

		double interface = 0.0;
		for (int m = 0; m <= 10; ++m)
		{
			const analytic::Coefficients c = analytic::radial_coeffs_2d(m, s);
			const Complex inside = c.inner * std::cyl_bessel_j(double(m), s.index * rho);
			const Complex outside = c.regular * std::cyl_bessel_j(double(m), rho) + c.singular * std::cyl_neumann(double(m), rho);
			interface = std::max(interface, std::abs(inside - outside) / std::abs(outside));
			auto R = [&](double r) { return analytic::radial_function_2d(m, r, s); };
			const double h = 1e-4 * s.radius;
			const double scale = std::max(std::abs((R(s.radius + h) - R(s.radius - h)) / (2.0 * h)), std::abs(R(s.radius)) * s.kb);
			interface = std::max(interface, 1e-4 * std::abs(slope_jump(R, s.radius, h)) / scale);
		}
		for (int l = 0; l <= 8; ++l)
		{
			const analytic::Coefficients c = analytic::radial_coeffs_3d(l, s);
			const Complex inside = c.inner * std::sph_bessel(l, s.index * rho);
			const Complex outside = c.regular * std::sph_bessel(l, rho) + c.singular * std::sph_neumann(l, rho);
			interface = std::max(interface, std::abs(inside - outside) / std::abs(outside));
		}

		double jump = 0.0;
		const double h = 1e-4 * s.source_distance;
		for (int m : {0, 1, 4})
		{
			const Complex got = slope_jump([&](double r) { return analytic::radial_function_2d(m, r, s); }, s.source_distance, h);
			jump = std::max(jump, std::abs(got * s.source_distance + 1.0));
			const Complex got3 = slope_jump([&](double r) { return analytic::radial_function_3d(m, r, s); }, s.source_distance, h);
			jump = std::max(jump, std::abs(got3 * s.source_distance * s.source_distance + 1.0));
		}

		double reciprocity = 0.0;
		for (double r : {1.1, 2.4})
			for (double theta : {0.4, 2.2})
			{
				analytic::Scene swapped = s;
				swapped.source_distance = r;
				const Complex a = analytic::analytic_field_2d(r, theta, s).value;
				const Complex b = analytic::analytic_field_2d(s.source_distance, theta, swapped).value;
				const Complex a3 = analytic::analytic_field_3d(r, theta, s).value;
				const Complex b3 = analytic::analytic_field_3d(s.source_distance, theta, swapped).value;
				reciprocity = std::max({reciprocity, std::abs(a - b) / std::abs(a), std::abs(a3 - b3) / std::abs(a3)});
			}

		analytic::Scene patch = s;
		patch.radius = 1.0;
		patch.index = 1.3;
		patch.source_distance = 2.5;
		const analytic::CylinderField field(patch);
		auto sample = [&](const Vector3 &x) { return field.at(x).value; };
		auto k2 = [&](const Vector3 &x) { return std::pow(x.norm() < patch.radius ? patch.index * patch.kb : patch.kb, 2); };
		auto singular = [&](const Vector3 &x) {
			return std::min(std::abs(x.norm() - patch.radius), (x - Vector3(patch.source_distance, 0.0, 0.0)).norm());
		};
		double worst_ratio = std::numeric_limits<double>::infinity();
		for (const Vector3 &center : {Vector3(0.0, 0.0, 0.0), Vector3(0.0, 1.6, 0.0)})
		{
			double residual[2];
			for (int level = 0; level < 2; ++level)
			{
				DomainGrid grid = DomainGrid::centered(2, {Index(12) << level, Index(12) << level, 1}, 0.05 / (1 << level), 1.0);
				grid.origin += center;
				residual[level] = analytic::helmholtz_residual(sample, k2, grid, singular, 3.0 * (1 << level));
			}
			worst_ratio = std::min(worst_ratio, residual[0] / residual[1]);
		}

		out.detail << " interface " << interface << ", source jump " << jump << ", reciprocity " << reciprocity
				   << ", residual ratio on halving " << worst_ratio;
		out.require(interface <= 1e-10, "interface continuity");
		out.require(jump <= 1e-6, "source jump conditions");
		out.require(reciprocity <= 1e-8, "reciprocity");
		out.require(worst_ratio >= 3.0, "second-order residual decay");
	}

	void fresnel_plumbing(Outcome &out)
	{
		std::ostringstream text;
		for (int t = 1; t <= 8; ++t)
			for (int r = 1; r <= 360; ++r)
			{
				int distance = std::abs((r - 1) - (t - 1) * 45) % 360;
				distance = std::min(distance, 360 - distance);
				if (distance < 60)
					continue;
				const double re = std::cos(0.01 * r + t), im = std::sin(0.02 * r - t);
				text << t << " " << r << " 3.0 " << re + 0.001 * r << " " << im << " " << re << " " << im << "\n";
			}
		std::istringstream in(text.str());
		const MeasurementSet m = parse_fresnel_ascii(in);
		bool shape = m.transmitter_count() == 8 && m.frequency_hz == 3e9;
		for (const auto &rows : m.active)
			shape = shape && rows.size() == 241;
		out.require(shape, "8 x 241 at 3 GHz");

		const std::vector<size_t> want{120, 60, 30, 15, 8, 4, 2};
		std::vector<size_t> counts;
		bool nested = true;
		MeasurementSet previous = m;
		for (int factor = 2; factor <= 128; factor *= 2)
		{
			const MeasurementSet sub = subsample_receivers(m, factor);
			for (size_t t = 0; t < 8; ++t)
			{
				for (Index slot : sub.active[t])
					nested = nested && std::find(previous.active[t].begin(), previous.active[t].end(), slot) !=
										   previous.active[t].end();
				nested = nested && sub.active[t].size() == sub.active[0].size();
			}
			counts.push_back(sub.active[0].size());
			previous = sub;
		}
		out.detail << " counts";
		for (size_t c : counts)
			out.detail << " " << c;
		out.require(counts == want, "counts 120 ... 2");
		out.require(nested, "nested subsets");
	}

	void metric_examples(Outcome &out)
	{
		RealVector f = RealVector::Zero(8);
		f[0] = 10.0;
		RealVector e = f;
		e[1] = 1.0;
		const double zero = normalized_error(f, f), one = normalized_error(RealVector(RealVector::Zero(8)), f);
		const double twenty = snr_db(e, f);
		out.detail << " " << zero << ", " << one << ", " << twenty << " dB";
		out.require(zero == 0.0 && one == 1.0 && twenty == 20.0, "exact values");
	}
}

int main()
{
	criterion(1, "adjoint identities", 5.0, adjoint_identities);
	criterion(2, "gradient against finite differences", 60.0, gradient_check);
	criterion(3, "forward model against the analytic cylinder", 300.0, forward_vs_analytic);
	criterion(4, "TV prox against an independent solver", 120.0, tv_prox);
	criterion(5, "end-to-end two-cylinder reconstruction", 600.0, end_to_end);
	criterion(6, "analytic self-consistency", 120.0, analytic_consistency);
	criterion(7, "Fresnel layout and subsampling", 10.0, fresnel_plumbing);
	criterion(8, "metric examples", 1.0, metric_examples);
	return failures == 0 ? 0 : 1;
}
