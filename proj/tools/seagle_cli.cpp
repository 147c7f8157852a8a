#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "json.hpp"

#include "seagle/analytic.hpp"
#include "seagle/io.hpp"
#include "seagle/metrics.hpp"

using namespace seagle;

namespace
{
	enum ExitCode
	{
		exit_ok = 0,
		exit_usage = 1,
		exit_numerical = 2,
		exit_io = 3,
	};

	std::filesystem::path prepare_output(const ExperimentConfig &cfg, const std::string &override_dir)
	{
		const auto dir = output_directory(override_dir.empty() ? cfg.output_dir : override_dir);
		std::error_code ec;
		std::filesystem::create_directories(dir, ec);
		if (ec)
			throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
		return dir;
	}

	void write_text(const std::filesystem::path &path, const std::string &text)
	{
		std::ofstream out(path, std::ios::binary);
		if (!out || !(out << text))
			throw IoError("cannot write " + path.string());
	}

	std::vector<double> parse_range(const std::string &text)
	{
		double lo, step, hi;
		if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &lo, &step, &hi) != 3 || !(step > 0.0) || hi < lo)
			throw ConfigError("range must look like start:step:stop with step > 0");
		std::vector<double> out;
		for (int i = 0; lo + i * step <= hi * (1.0 + 1e-12); ++i)
			out.push_back(lo + i * step);
		return out;
	}

	struct SimulateArgs
	{
		std::string config, out = "measurements.txt", output_dir;
		int workers = 1;
	};

	int run_simulate(const SimulateArgs &args)
	{
		const ExperimentConfig cfg = load_config(args.config);
		const auto dir = prepare_output(cfg, args.output_dir);
		const RingLayout layout = ring_layout(cfg.geometry, cfg.grid);

		const DomainGrid fine = cfg.grid.refined(cfg.simulate.refine);
		const RealVector f_fine = render_phantom(cfg.phantom, fine);
		ForwardConfig forward = cfg.recon.forward;
		forward.max_iters *= cfg.simulate.k_factor;
		MeasurementSet m =
			simulate_measurements(fine, f_fine, layout.receivers, layout.transmitters, layout.active, forward, args.workers);
		add_noise(m, cfg.simulate.noise_snr_db, cfg.seed);
		write_measurements(m, dir / args.out);

		const RealVector f = render_phantom(cfg.phantom, cfg.grid);
		write_image_csv(f, cfg.grid, dir / "truth.csv");
		if (cfg.grid.dimension == 2)
			write_pgm(f, cfg.grid, dir / "truth.pgm");
		std::cout << "wrote " << (dir / args.out).string() << " (" << m.transmitter_count() << " transmitters, "
				  << m.measurement_count() << " samples)\n";
		return exit_ok;
	}

	struct ReconstructArgs
	{
		std::string config, measurements, truth, model, prefix = "recon", output_dir;
		int iterations = 0, workers = 0, subsample = 1;
	};

	int run_reconstruct(const ReconstructArgs &args)
	{
		ExperimentConfig cfg = load_config(args.config);
		if (!args.model.empty())
			cfg.recon.model = parse_recon_model(args.model);
		if (args.iterations > 0)
			cfg.recon.iterations = args.iterations;
		if (args.workers > 0)
			cfg.recon.workers = args.workers;
		const auto dir = prepare_output(cfg, args.output_dir);

		MeasurementSet m = subsample_receivers(read_measurements(args.measurements), args.subsample);
		RealVector truth;
		if (!args.truth.empty())
		{
			const ImageData image = load_image_csv(args.truth);
			if (image.grid.dims != cfg.grid.dims)
				throw ConfigError("ground-truth image grid does not match the configured grid");
			truth = image.values;
		}
		const ReconReport report =
			fista_reconstruct(cfg.grid, m, cfg.recon, args.truth.empty() ? nullptr : &truth);

		write_image_csv(report.f_hat, cfg.grid, dir / (args.prefix + ".csv"));
		if (cfg.grid.dimension == 2)
			write_pgm(report.f_hat, cfg.grid, dir / (args.prefix + ".pgm"));
		write_text(dir / (args.prefix + "_report.json"), report_json(report, cfg.recon));
		std::cout << to_string(cfg.recon.model) << ": " << report.iterations << " iterations, data fit "
				  << format_double(report.data_fit.back());
		if (!report.recon_error.empty())
			std::cout << ", reconstruction error " << format_double(report.recon_error.back());
		std::cout << "\n";
		return exit_ok;
	}

	struct AnalyticArgs
	{
		int dimension = 2, truncation = 0;
		double radius = 1.0, index = 1.1, source_distance = 2.0, wavelength = 1.0, spacing = 0.05;
		Index pixels = 64;
		std::string out = "analytic.csv", output_dir;
	};

	int run_analytic(const AnalyticArgs &args)
	{
		analytic::Scene scene;
		scene.radius = args.radius;
		scene.index = args.index;
		scene.source_distance = args.source_distance;
		scene.kb = 2.0 * pi / args.wavelength;
		scene.truncation = args.truncation;
		scene.validate();

		const auto dir = output_directory(args.output_dir);
		std::filesystem::create_directories(dir);
		Table table{{"x_m", "y_m", "z_m", "re", "im", "converged"}, {}};
		const analytic::CylinderField cylinder(args.dimension == 2 ? scene : analytic::Scene{1.0, 1.0, 2.0, 1.0, 1});
		const analytic::SphereField sphere(args.dimension == 3 ? scene : analytic::Scene{1.0, 1.0, 2.0, 1.0, 1});
		const double half = 0.5 * double(args.pixels - 1) * args.spacing;
		for (Index j = 0; j < args.pixels; ++j)
			for (Index i = 0; i < args.pixels; ++i)
			{
				// 2D samples the x-y plane; 3D the x-z plane holding the source axis.
				const double a = -half + double(i) * args.spacing, b = -half + double(j) * args.spacing;
				const Vector3 p = args.dimension == 2 ? Vector3(a, b, 0.0) : Vector3(a, 0.0, b);
				const Vector3 source = args.dimension == 2 ? Vector3(scene.source_distance, 0, 0) : Vector3(0, 0, scene.source_distance);
				if ((p - source).norm() == 0.0)
					continue;
				const analytic::SeriesValue v = args.dimension == 2 ? cylinder.at(p) : sphere.at(p);
				table.rows.push_back({p.x(), p.y(), p.z(), v.value.real(), v.value.imag(), v.converged ? 1.0 : 0.0});
			}
		write_table_csv(table, dir / args.out,
						{"analytic field of a unit point source, " + std::to_string(args.dimension) + "D",
						 "radius_m=" + format_double(scene.radius) + " index=" + format_double(scene.index) +
							 " source_distance_m=" + format_double(scene.source_distance) +
							 " wavelength_m=" + format_double(args.wavelength)});
		std::cout << "wrote " << (dir / args.out).string() << "\n";
		return exit_ok;
	}

	struct GradcheckArgs
	{
		Index size = 10;
		double contrast = 0.2;
		std::uint64_t seed = 7;
	};

	// Central finite differences of D against the backpropagated gradient.
	int run_gradcheck(const GradcheckArgs &args)
	{
		const DomainGrid grid = DomainGrid::centered(2, {args.size, args.size, 1}, 0.1, 1.0);
		const double kb2 = std::pow(grid.background_wavenumber(), 2);
		std::mt19937_64 rng(args.seed);
		std::uniform_real_distribution<double> unit(0.0, 1.0);
		std::normal_distribution<double> normal;

		RealVector f(grid.size());
		for (Index n = 0; n < f.size(); ++n)
			f[n] = args.contrast * kb2 * unit(rng);
		const SensorSet sensors = SensorSet::ring(12, 2.0);
		const DomainOperator G(grid);
		const SensorOperator H(grid, sensors);
		Transmitter tx;
		tx.location = Vector3(3.0, 0.5, 0.0);
		const ComplexVector u_in = incident_field(tx, grid);
		ComplexVector y(sensors.size());
		for (Index m = 0; m < y.size(); ++m)
			y[m] = 0.01 * Complex(normal(rng), normal(rng));

		const double nu = 1.0 / estimate_normal_norm(f, G, 60, 1e-9);
		bool ok = true;
		for (const bool adaptive : {false, true})
			for (const int K : {1, 3, 8})
			{
				ForwardConfig cfg;
				cfg.max_iters = K;
				cfg.step_mode = adaptive ? StepMode::adaptive : StepMode::fixed;
				cfg.fixed_step = nu;
				const RealVector g = gradient_data_fidelity(f, y, u_in, G, H, cfg);
				auto D = [&](const RealVector &p) {
					return data_fidelity(y, forward_solve(p, u_in, G, H, cfg).z);
				};
				RealVector fd(f.size());
				const double h = 1e-4 * f.cwiseAbs().maxCoeff();
				for (Index n = 0; n < f.size(); ++n)
				{
					RealVector a = f, b = f;
					a[n] += h;
					b[n] -= h;
					fd[n] = (D(a) - D(b)) / (2.0 * h);
				}
				const double err = (g - fd).norm() / fd.norm();
				const double limit = adaptive ? 1e-3 : 1e-6;
				const bool pass = err <= limit;
				ok = ok && pass;
				std::printf("%-8s K=%d  relative error %.3e  (limit %.0e)  %s\n", adaptive ? "adaptive" : "fixed", K, err,
							limit, pass ? "PASS" : "FAIL");
			}
		return ok ? exit_ok : exit_numerical;
	}

	struct MetricsArgs
	{
		std::string estimate, reference, kind = "image";
	};

	int run_metrics(const MetricsArgs &args)
	{
		nlohmann::json out;
		auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("inf"); };
		if (args.kind == "image")
		{
			const ImageData a = load_image_csv(args.estimate), b = load_image_csv(args.reference);
			if (a.grid.dims != b.grid.dims)
				throw DimensionError("metrics: image grids differ");
			out[to_string(MetricName::normalized_recon_error)] = normalized_recon_error(a.values, b.values);
			out[to_string(MetricName::snr_db)] = finite_or_null(snr_db(a.values, b.values));
		}
		else if (args.kind == "measurements")
		{
			const MeasurementSet a = read_measurements(args.estimate), b = read_measurements(args.reference);
			if (a.active != b.active)
				throw DimensionError("metrics: measurement layouts differ");
			ComplexVector za(a.measurement_count()), zb(b.measurement_count());
			Index k = 0;
			for (size_t t = 0; t < a.y.size(); ++t)
			{
				za.segment(k, a.y[t].size()) = a.y[t];
				zb.segment(k, b.y[t].size()) = b.y[t];
				k += a.y[t].size();
			}
			out[to_string(MetricName::normalized_data_fit)] = normalized_data_fit(za, zb);
			out[to_string(MetricName::normalized_error)] = normalized_error(za, zb);
		}
		else
			throw ConfigError("metrics --kind must be image or measurements");
		std::cout << out.dump(2) << "\n";
		return exit_ok;
	}

	struct SweepArgs
	{
		std::string config, contrast, subsample, measurements, truth, out = "sweep.csv", output_dir;
		std::vector<int> ks{1, 2, 4, 8, 16, 32, 64, 120};
		double radius_wavelengths = 1.0, source_wavelengths = 3.0;
	};

	// Forward model against the analytic cylinder for a range of contrasts.
	Table contrast_sweep(const ExperimentConfig &cfg, const SweepArgs &args)
	{
		if (cfg.grid.dimension != 2)
			throw ConfigError("contrast sweep runs on a 2D grid");
		const DomainGrid &grid = cfg.grid;
		const double kb = grid.background_wavenumber();
		const double lambda_b = 2.0 * pi / kb;
		const DomainOperator G(grid);
		Table table{{"contrast", "K", "seagle_error", "born_error"}, {}};
		for (const double contrast : parse_range(args.contrast))
		{
			analytic::Scene scene;
			scene.radius = args.radius_wavelengths * lambda_b;
			scene.index = std::sqrt(1.0 + contrast);
			scene.source_distance = args.source_wavelengths * lambda_b;
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
			const ComplexVector born = u_in + G.apply(f.cast<Complex>().cwiseProduct(u_in));
			const double born_error = normalized_error(born, truth);
			for (const int K : args.ks)
			{
				ForwardConfig fc = cfg.recon.forward;
				fc.max_iters = K;
				fc.record_history = false;
				const ForwardTrace trace = forward_solve(f, u_in, G, fc);
				table.rows.push_back({contrast, double(K), normalized_error(trace.u_hat, truth), born_error});
			}
		}
		return table;
	}

	Table subsample_sweep(const ExperimentConfig &cfg, const SweepArgs &args)
	{
		if (args.measurements.empty())
			throw ConfigError("subsampling sweep needs --measurements");
		const MeasurementSet full = read_measurements(args.measurements);
		RealVector truth;
		if (!args.truth.empty())
			truth = load_image_csv(args.truth).values;
		Table table{{"factor", "receivers_per_transmitter", "data_fit", "recon_error"}, {}};
		std::vector<int> factors;
		for (const double v : parse_range(args.subsample))
			factors.push_back(int(std::lround(v)));
		for (const int factor : factors)
		{
			const MeasurementSet m = subsample_receivers(full, factor);
			const ReconReport r = fista_reconstruct(cfg.grid, m, cfg.recon, truth.size() ? &truth : nullptr);
			table.rows.push_back({double(factor), double(m.active.front().size()), r.data_fit.back(),
								  r.recon_error.empty() ? std::nan("") : r.recon_error.back()});
		}
		return table;
	}

	int run_sweep(const SweepArgs &args)
	{
		const ExperimentConfig cfg = load_config(args.config);
		const auto dir = prepare_output(cfg, args.output_dir);
		if (args.contrast.empty() == args.subsample.empty())
			throw ConfigError("sweep needs exactly one of --contrast or --subsample");
		const Table table = args.contrast.empty() ? subsample_sweep(cfg, args) : contrast_sweep(cfg, args);
		write_table_csv(table, dir / args.out, {args.contrast.empty() ? "receiver subsampling sweep" : "contrast sweep"});
		std::cout << "wrote " << (dir / args.out).string() << " (" << table.rows.size() << " rows)\n";
		return exit_ok;
	}
} // namespace

int main(int argc, char **argv)
{
	CLI::App app{"Series-expansion inverse scattering: simulation, reconstruction and analytic checks"};
	app.require_subcommand(1);

	SimulateArgs sim;
	auto *simulate = app.add_subcommand("simulate", "phantom -> synthetic measurement file");
	simulate->add_option("-c,--config", sim.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
	simulate->add_option("-o,--out", sim.out, "measurement file name");
	simulate->add_option("--output-dir", sim.output_dir, "output directory");
	simulate->add_option("-j,--workers", sim.workers, "worker threads")->check(CLI::PositiveNumber);

	ReconstructArgs rec;
	auto *reconstruct = app.add_subcommand("reconstruct", "measurements + config -> image and report");
	reconstruct->add_option("-c,--config", rec.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
	reconstruct->add_option("-m,--measurements", rec.measurements, "measurement file")->required()->check(CLI::ExistingFile);
	reconstruct->add_option("--truth", rec.truth, "ground-truth image CSV")->check(CLI::ExistingFile);
	reconstruct->add_option("--model", rec.model, "seagle, born or rytov");
	reconstruct->add_option("--iterations", rec.iterations, "FISTA iterations");
	reconstruct->add_option("--subsample", rec.subsample, "receiver decimation factor");
	reconstruct->add_option("--prefix", rec.prefix, "output file prefix");
	reconstruct->add_option("--output-dir", rec.output_dir, "output directory");
	reconstruct->add_option("-j,--workers", rec.workers, "worker threads");

	AnalyticArgs ana;
	auto *analytic_cmd = app.add_subcommand("analytic", "closed-form cylinder/sphere field samples -> CSV");
	analytic_cmd->add_option("--dimension", ana.dimension)->check(CLI::IsMember({2, 3}));
	analytic_cmd->add_option("--radius", ana.radius, "object radius, m");
	analytic_cmd->add_option("--index", ana.index, "refractive index");
	analytic_cmd->add_option("--source-distance", ana.source_distance, "source distance from the center, m");
	analytic_cmd->add_option("--wavelength", ana.wavelength, "background wavelength, m");
	analytic_cmd->add_option("--truncation", ana.truncation, "highest series order (0: automatic)");
	analytic_cmd->add_option("--pixels", ana.pixels, "samples per axis");
	analytic_cmd->add_option("--spacing", ana.spacing, "sample spacing, m");
	analytic_cmd->add_option("-o,--out", ana.out, "CSV file name");
	analytic_cmd->add_option("--output-dir", ana.output_dir, "output directory");

	GradcheckArgs gc;
	auto *gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the backpropagated gradient");
	gradcheck->add_option("--size", gc.size, "pixels per axis");
	gradcheck->add_option("--contrast", gc.contrast, "random potential contrast");
	gradcheck->add_option("--seed", gc.seed, "random seed");

	MetricsArgs met;
	auto *metrics_cmd = app.add_subcommand("metrics", "compare two images or measurement files -> JSON");
	metrics_cmd->add_option("estimate", met.estimate)->required()->check(CLI::ExistingFile);
	metrics_cmd->add_option("reference", met.reference)->required()->check(CLI::ExistingFile);
	metrics_cmd->add_option("--kind", met.kind, "image or measurements");

	SweepArgs sw;
	auto *sweep = app.add_subcommand("sweep", "contrast or subsampling sweeps -> CSV");
	sweep->add_option("-c,--config", sw.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
	sweep->add_option("--contrast", sw.contrast, "start:step:stop");
	sweep->add_option("--subsample", sw.subsample, "start:step:stop decimation factors");
	sweep->add_option("--iterations", sw.ks, "forward iteration counts for the contrast sweep");
	sweep->add_option("--radius", sw.radius_wavelengths, "cylinder radius in background wavelengths");
	sweep->add_option("--source", sw.source_wavelengths, "source distance in background wavelengths");
	sweep->add_option("-m,--measurements", sw.measurements, "measurement file for --subsample");
	sweep->add_option("--truth", sw.truth, "ground-truth image CSV for --subsample");
	sweep->add_option("-o,--out", sw.out, "CSV file name");
	sweep->add_option("--output-dir", sw.output_dir, "output directory");

	try
	{
		app.parse(argc, argv);
	}
	catch (const CLI::ParseError &e)
	{
		const int code = app.exit(e);
		return code == 0 ? exit_ok : exit_usage;
	}

	try
	{
		if (*simulate)
			return run_simulate(sim);
		if (*reconstruct)
			return run_reconstruct(rec);
		if (*analytic_cmd)
			return run_analytic(ana);
		if (*gradcheck)
			return run_gradcheck(gc);
		if (*metrics_cmd)
			return run_metrics(met);
		if (*sweep)
			return run_sweep(sw);
	}
	catch (const ConfigError &e)
	{
		std::cerr << "error: " << e.what() << "\n";
		return exit_usage;
	}
	catch (const IoError &e)
	{
		std::cerr << "error: " << e.what() << "\n";
		return exit_io;
	}
	catch (const std::filesystem::filesystem_error &e)
	{
		std::cerr << "error: " << e.what() << "\n";
		return exit_io;
	}
	catch (const std::exception &e)
	{
		std::cerr << "error: " << e.what() << "\n";
		return exit_numerical;
	}
	return exit_usage;
}
