#include "seagle/recon.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <mutex>
#include <random>
#include <thread>

#include "seagle/metrics.hpp"

namespace seagle
{
	Complex Transmitter::field_at(const Vector3 &point, double kb, int dimension) const
	{
		if (kind == Kind::plane_wave)
			return amplitude * std::exp(imag_unit * (kb * location.dot(point)));
		const Vector3 d = point - location;
		return amplitude * (dimension == 2 ? green_2d(d, kb) : green_3d(d, kb));
	}

	ComplexVector incident_field(const Transmitter &tx, const DomainGrid &grid)
	{
		ComplexVector u(grid.size());
		const double kb = grid.background_wavenumber();
		for (Index n = 0; n < grid.size(); ++n)
			u[n] = tx.field_at(grid.position(n), kb, grid.dimension);
		return u;
	}

	ComplexVector incident_at(const Transmitter &tx, const SensorSet &sensors, std::span<const Index> rows, double kb,
							  int dimension)
	{
		ComplexVector u(Index(rows.size()));
		for (size_t i = 0; i < rows.size(); ++i)
			u[Index(i)] = tx.field_at(sensors.positions.at(size_t(rows[i])), kb, dimension);
		return u;
	}

	Index MeasurementSet::measurement_count() const
	{
		Index total = 0;
		for (const auto &rows : active)
			total += Index(rows.size());
		return total;
	}

	double MeasurementSet::squared_norm() const
	{
		double total = 0.0;
		for (const auto &v : y)
			total += v.squaredNorm();
		return total;
	}

	void MeasurementSet::validate() const
	{
		if (transmitters.empty())
			throw ConfigError("measurement set has no transmitters");
		if (receivers.size() < 1)
			throw ConfigError("measurement set has no receivers");
		require_same_size(Index(active.size()), transmitter_count(), "measurement set receiver lists");
		require_same_size(Index(y.size()), transmitter_count(), "measurement set data");
		for (size_t t = 0; t < y.size(); ++t)
		{
			require_same_size(y[t].size(), Index(active[t].size()), "measurement set transmitter data");
			for (const Index slot : active[t])
				if (slot < 0 || slot >= receivers.size())
					throw DimensionError("measurement set receiver slot out of range");
			if (!y[t].allFinite())
				throw NumericalError("measurement set contains non-finite data for transmitter " + std::to_string(t));
		}
		for (const auto &tx : transmitters)
		{
			if (!tx.location.allFinite() || !std::isfinite(std::abs(tx.amplitude)))
				throw ConfigError("transmitter has non-finite geometry or amplitude");
			if (tx.kind == Transmitter::Kind::plane_wave && std::abs(tx.location.norm() - 1.0) > 1e-9)
				throw ConfigError("plane-wave direction must be a unit vector");
		}
	}

	std::vector<std::vector<Index>> all_receivers(Index transmitters, Index receivers)
	{
		std::vector<Index> slots(static_cast<size_t>(receivers));
		for (Index m = 0; m < receivers; ++m)
			slots[size_t(m)] = m;
		return std::vector<std::vector<Index>>(static_cast<size_t>(transmitters), slots);
	}

	namespace
	{
		void warn_on_frequency_mismatch(const DomainGrid &grid, const MeasurementSet &measurements)
		{
			if (measurements.frequency_hz <= 0.0)
				return;
			const double expected = speed_of_light / grid.wavelength;
			if (std::abs(measurements.frequency_hz - expected) > 1e-6 * expected)
				warn("measurement frequency " + std::to_string(measurements.frequency_hz) +
					 " Hz differs from the grid wavelength's " + std::to_string(expected) + " Hz");
		}

		// Runs fn(t) for t in [0, count) on up to `workers` threads. Results are
		// written to per-transmitter slots by fn, so the caller's reduction
		// order does not depend on scheduling.
		void for_each_transmitter(Index count, int workers, const std::function<void(Index)> &fn)
		{
			const int threads = int(std::min<Index>(std::max(workers, 1), count));
			if (threads <= 1)
			{
				for (Index t = 0; t < count; ++t)
					fn(t);
				return;
			}
			std::atomic<Index> next{0};
			std::exception_ptr failure;
			std::mutex failure_mutex;
			std::vector<std::thread> pool;
			for (int w = 0; w < threads; ++w)
				pool.emplace_back([&] {
					for (Index t = next++; t < count; t = next++)
					{
						try
						{
							fn(t);
						}
						catch (...)
						{
							std::lock_guard lock(failure_mutex);
							if (!failure)
								failure = std::current_exception();
						}
					}
				});
			for (auto &thread : pool)
				thread.join();
			if (failure)
				std::rethrow_exception(failure);
		}

		bool linear_model(const ReconConfig &cfg) { return cfg.model != ReconModel::seagle; }
	} // namespace

	ScatteringSetup::ScatteringSetup(const DomainGrid &grid_, const MeasurementSet &measurements)
		: grid(grid_), G(grid_), H(grid_, measurements.receivers)
	{
		measurements.validate();
		warn_on_frequency_mismatch(grid, measurements);
		for (const auto &tx : measurements.transmitters)
			u_in.push_back(incident_field(tx, grid));
	}

	std::string to_string(ReconModel model)
	{
		switch (model)
		{
		case ReconModel::seagle: return "seagle";
		case ReconModel::born: return "born";
		case ReconModel::rytov: return "rytov";
		}
		return "unknown";
	}

	ReconModel parse_recon_model(const std::string &name)
	{
		if (name == "seagle")
			return ReconModel::seagle;
		if (name == "born")
			return ReconModel::born;
		if (name == "rytov")
			return ReconModel::rytov;
		throw ConfigError("unknown reconstruction model '" + name + "'");
	}

	void ReconConfig::validate() const
	{
		forward.validate();
		if (iterations < 1)
			throw ConfigError("reconstruction needs at least one iteration");
		if (!(tau_rel >= 0.0) || !std::isfinite(tau_rel))
			throw ConfigError("tau_rel must be finite and >= 0");
		if (tau && (!(*tau >= 0.0) || !std::isfinite(*tau)))
			throw ConfigError("tau must be finite and >= 0");
		if (gamma && (!(*gamma > 0.0) || !std::isfinite(*gamma)))
			throw ConfigError("FISTA step gamma must be finite and > 0");
		if (prox.max_iters < 1 || !(prox.delta_in >= 0.0) || !(prox.step_factor > 0.0))
			throw ConfigError("TV prox options invalid");
		box.validate();
		if (!(rel_tol >= 0.0))
			throw ConfigError("rel_tol must be >= 0");
		if (workers < 1)
			throw ConfigError("workers must be >= 1");
	}

	bool ReconConfig::operator==(const ReconConfig &o) const
	{
		const auto &a = forward, &b = o.forward;
		const bool same_forward = a.max_iters == b.max_iters && a.delta_tol == b.delta_tol && a.stop_rule == b.stop_rule &&
								  a.step_mode == b.step_mode && a.fixed_step == b.fixed_step &&
								  a.accelerated == b.accelerated && a.record_history == b.record_history;
		const bool same_prox = prox.variant == o.prox.variant && prox.max_iters == o.prox.max_iters &&
							   prox.delta_in == o.prox.delta_in && prox.step_factor == o.prox.step_factor;
		return same_forward && same_prox && model == o.model && iterations == o.iterations && tau_rel == o.tau_rel &&
			   tau == o.tau && gamma == o.gamma && box == o.box && accelerated == o.accelerated && rel_tol == o.rel_tol &&
			   workers == o.workers && track_data_fit == o.track_data_fit;
	}

	ComplexVector born_predict(const RealVector &f, const ComplexVector &u_in, const SensorOperator &H)
	{
		require_same_size(f.size(), u_in.size(), "born_predict");
		return H.apply(u_in.cwiseProduct(f.cast<Complex>()));
	}

	ComplexVector born_predict(const RealVector &f, const ComplexVector &u_in, const SensorOperator &H,
							   std::span<const Index> rows)
	{
		require_same_size(f.size(), u_in.size(), "born_predict");
		return H.apply(u_in.cwiseProduct(f.cast<Complex>()), rows);
	}

	RealVector born_gradient(const RealVector &f, const ComplexVector &y, const ComplexVector &u_in,
							 const SensorOperator &H)
	{
		const ComplexVector z = born_predict(f, u_in, H);
		require_same_size(z.size(), y.size(), "born_gradient");
		return u_in.conjugate().cwiseProduct(H.apply_adjoint(z - y)).real();
	}

	RealVector born_gradient(const RealVector &f, const ComplexVector &y, const ComplexVector &u_in,
							 const SensorOperator &H, std::span<const Index> rows)
	{
		const ComplexVector z = born_predict(f, u_in, H, rows);
		require_same_size(z.size(), y.size(), "born_gradient");
		return u_in.conjugate().cwiseProduct(H.apply_adjoint(z - y, rows)).real();
	}

	RytovData rytov_transform(const ComplexVector &u_total, const ComplexVector &u_in)
	{
		require_same_size(u_total.size(), u_in.size(), "rytov_transform");
		RytovData out;
		out.values.resize(u_in.size());
		double previous = 0.0, offset = 0.0;
		for (Index i = 0; i < u_in.size(); ++i)
		{
			if (u_in[i] == 0.0)
				throw NumericalError("rytov_transform: incident field vanishes at receiver " + std::to_string(i));
			const Complex ratio = u_total[i] / u_in[i];
			if (ratio == 0.0 || !std::isfinite(std::abs(ratio)))
				throw NumericalError("rytov_transform: total field vanishes at receiver " + std::to_string(i));
			double phase = std::arg(ratio) + offset;
			if (i > 0)
			{
				while (phase - previous > pi)
				{
					phase -= 2.0 * pi;
					offset -= 2.0 * pi;
					++out.unwrap_corrections;
				}
				while (phase - previous < -pi)
				{
					phase += 2.0 * pi;
					offset += 2.0 * pi;
					++out.unwrap_corrections;
				}
			}
			previous = phase;
			out.values[i] = u_in[i] * Complex(std::log(std::abs(ratio)), phase);
		}
		return out;
	}

	MeasurementSet rytov_measurements(const MeasurementSet &measurements, const DomainGrid &grid, int *corrections)
	{
		measurements.validate();
		MeasurementSet out = measurements;
		int total = 0;
		for (Index t = 0; t < measurements.transmitter_count(); ++t)
		{
			const auto &rows = measurements.active[size_t(t)];
			const ComplexVector u_in = incident_at(measurements.transmitters[size_t(t)], measurements.receivers, rows,
												   grid.background_wavenumber(), grid.dimension);
			RytovData r = rytov_transform(measurements.y[size_t(t)] + u_in, u_in);
			total += r.unwrap_corrections;
			out.y[size_t(t)] = std::move(r.values);
		}
		if (corrections)
			*corrections = total;
		if (total > 0)
			warn("rytov_transform: " + std::to_string(total) + " phase jump(s) exceeded pi and were unwrapped");
		return out;
	}

	std::vector<ComplexVector> predict_measurements(const RealVector &f, const ScatteringSetup &setup,
													const MeasurementSet &measurements, const ReconConfig &cfg)
	{
		const Index count = measurements.transmitter_count();
		std::vector<ComplexVector> z(static_cast<size_t>(count));
		ForwardConfig forward = cfg.forward;
		forward.record_history = false;
		for_each_transmitter(count, cfg.workers, [&](Index t) {
			const auto &rows = measurements.active[size_t(t)];
			const auto &u_in = setup.u_in[size_t(t)];
			if (linear_model(cfg))
				z[size_t(t)] = born_predict(f, u_in, setup.H, rows);
			else
				z[size_t(t)] = predict_scattered(forward_solve(f, u_in, setup.G, forward).u_hat, f, setup.H, rows);
		});
		return z;
	}

	double total_fidelity(const RealVector &f, const ScatteringSetup &setup, const MeasurementSet &measurements,
						  const ReconConfig &cfg)
	{
		const auto z = predict_measurements(f, setup, measurements, cfg);
		double total = 0.0;
		for (size_t t = 0; t < z.size(); ++t)
			total += data_fidelity(measurements.y[t], z[t]);
		return total;
	}

	GradientSum total_gradient(const RealVector &f, const ScatteringSetup &setup, const MeasurementSet &measurements,
							   const ReconConfig &cfg)
	{
		require_same_size(f.size(), setup.grid.size(), "total_gradient");
		require_same_size(Index(setup.u_in.size()), measurements.transmitter_count(), "total_gradient transmitters");
		const Index count = measurements.transmitter_count();
		std::vector<RealVector> parts(static_cast<size_t>(count));
		std::vector<double> values(static_cast<size_t>(count));
		for_each_transmitter(count, cfg.workers, [&](Index t) {
			const auto &rows = measurements.active[size_t(t)];
			const auto &y = measurements.y[size_t(t)];
			const auto &u_in = setup.u_in[size_t(t)];
			if (linear_model(cfg))
			{
				const ComplexVector z = born_predict(f, u_in, setup.H, rows);
				parts[size_t(t)] = u_in.conjugate().cwiseProduct(setup.H.apply_adjoint(z - y, rows)).real();
				values[size_t(t)] = data_fidelity(y, z);
			}
			else
			{
				FidelityGradient g = gradient_data_fidelity(f, y, u_in, setup.G, setup.H, rows, cfg.forward);
				parts[size_t(t)] = std::move(g.gradient);
				values[size_t(t)] = g.value;
			}
		});

		GradientSum sum{RealVector::Zero(f.size()), 0.0};
		for (size_t t = 0; t < parts.size(); ++t)
		{
			sum.gradient += parts[t];
			sum.value += values[t];
		}
		return sum;
	}

	namespace
	{
		double backtracked_step(const RealVector &f0, const GradientSum &g0, const ScatteringSetup &setup,
								const MeasurementSet &measurements, const ReconConfig &cfg)
		{
			const double g2 = g0.gradient.squaredNorm();
			if (g2 == 0.0)
				return 1.0;
			double gamma = 2.0 * g0.value / g2;
			for (int attempt = 0; attempt < 60; ++attempt)
			{
				const double trial = total_fidelity(f0 - gamma * g0.gradient, setup, measurements, cfg);
				if (std::isfinite(trial) && trial <= g0.value - 0.5 * gamma * g2)
					return gamma;
				gamma *= 0.5;
			}
			throw NumericalError("FISTA step backtracking failed to satisfy the quadratic bound");
		}

		double normalized_fit(const std::vector<ComplexVector> &z, const MeasurementSet &measurements)
		{
			double residual = 0.0;
			for (size_t t = 0; t < z.size(); ++t)
				residual += (z[t] - measurements.y[t]).squaredNorm();
			const double reference = measurements.squared_norm();
			if (reference == 0.0)
				return residual == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
			return residual / reference;
		}
	} // namespace

	ReconReport fista_reconstruct(const DomainGrid &grid, const MeasurementSet &input, const ReconConfig &cfg,
								  const RealVector *ground_truth, const RealVector *initial)
	{
		cfg.validate();
		grid.validate();
		ReconReport report;
		const MeasurementSet measurements =
			cfg.model == ReconModel::rytov ? rytov_measurements(input, grid, &report.unwrap_corrections) : input;
		const ScatteringSetup setup(grid, measurements);
		if (ground_truth)
			require_same_size(ground_truth->size(), grid.size(), "fista_reconstruct ground truth");

		RealVector f = initial ? *initial : RealVector::Zero(grid.size());
		require_same_size(f.size(), grid.size(), "fista_reconstruct initial image");
		report.tau = cfg.tau ? *cfg.tau : cfg.tau_rel * measurements.squared_norm();

		GradientSum grad = total_gradient(f, setup, measurements, cfg);
		if (!grad.gradient.allFinite())
			throw NumericalError("non-finite data-fidelity gradient at the initial image");
		report.gamma = cfg.gamma ? *cfg.gamma : backtracked_step(f, grad, setup, measurements, cfg);
		const double prox_weight = report.gamma * report.tau;
		if (!std::isfinite(prox_weight))
			throw NumericalError("gamma * tau overflows");

		RealVector s = f;
		GradientField dual = GradientField::Zero(grid.size(), grid.dimension);
		double q = 1.0;
		for (int t = 1; t <= cfg.iterations; ++t)
		{
			const auto start = std::chrono::steady_clock::now();
			if (t > 1)
			{
				grad = total_gradient(s, setup, measurements, cfg);
				if (!grad.gradient.allFinite())
					throw NumericalError("non-finite data-fidelity gradient at FISTA iteration " + std::to_string(t));
			}
			ProxResult prox = prox_tv(s - report.gamma * grad.gradient, prox_weight, cfg.box, grid, cfg.prox, &dual);
			dual = std::move(prox.dual);
			RealVector f_next = std::move(prox.f);
			if (!f_next.allFinite())
				throw NumericalError("non-finite iterate at FISTA iteration " + std::to_string(t));

			const double q_next = cfg.accelerated ? 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * q * q)) : 1.0;
			s = f_next + ((q - 1.0) / q_next) * (f_next - f);
			const double change = (f_next - f).norm();
			const double scale = f.norm();
			f = std::move(f_next);
			q = q_next;

			if (cfg.track_data_fit)
				report.data_fit.push_back(normalized_fit(predict_measurements(f, setup, measurements, cfg), measurements));
			if (ground_truth)
				report.recon_error.push_back(ground_truth->squaredNorm() > 0.0
												 ? normalized_recon_error(f, *ground_truth)
												 : f.squaredNorm());
			report.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
			report.iterations = t;

			if (change <= cfg.rel_tol * scale)
			{
				report.converged = true;
				break;
			}
		}
		if (!cfg.track_data_fit)
			report.data_fit.push_back(normalized_fit(predict_measurements(f, setup, measurements, cfg), measurements));
		report.f_hat = std::move(f);
		return report;
	}

	MeasurementSet simulate_measurements(const DomainGrid &grid, const RealVector &f, const SensorSet &receivers,
										 const std::vector<Transmitter> &transmitters,
										 const std::vector<std::vector<Index>> &active, const ForwardConfig &cfg,
										 int workers)
	{
		grid.validate();
		require_same_size(f.size(), grid.size(), "simulate_measurements");
		MeasurementSet out;
		out.receivers = receivers;
		out.transmitters = transmitters;
		out.active = active;
		out.frequency_hz = speed_of_light / grid.wavelength;
		out.y.assign(transmitters.size(), ComplexVector());
		require_same_size(Index(active.size()), Index(transmitters.size()), "simulate_measurements receiver lists");

		const SensorOperator H(grid, receivers);
		const DomainOperator G(grid);
		ForwardConfig forward = cfg;
		forward.record_history = false;
		for_each_transmitter(Index(transmitters.size()), workers, [&](Index t) {
			const ComplexVector u_in = incident_field(transmitters[size_t(t)], grid);
			const ForwardTrace trace = forward_solve(f, u_in, G, forward);
			out.y[size_t(t)] = predict_scattered(trace.u_hat, f, H, active[size_t(t)]);
		});
		out.validate();
		return out;
	}

	void add_noise(MeasurementSet &measurements, double snr_db, std::uint64_t seed)
	{
		if (std::isinf(snr_db) && snr_db > 0.0)
			return;
		if (!std::isfinite(snr_db))
			throw ConfigError("noise SNR must be finite or +inf");
		std::mt19937_64 rng(seed);
		std::normal_distribution<double> normal;
		for (auto &y : measurements.y)
		{
			if (y.size() == 0)
				continue;
			const double power = y.squaredNorm() / double(y.size());
			const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0) / 2.0);
			for (Index i = 0; i < y.size(); ++i)
			{
				const double re = normal(rng);
				const double im = normal(rng);
				y[i] += sigma * Complex(re, im);
			}
		}
	}
} // namespace seagle
