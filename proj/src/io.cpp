#include "seagle/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace seagle
{
	using nlohmann::json;

	std::string format_double(double v)
	{
		char buffer[32];
		std::snprintf(buffer, sizeof buffer, "%.17g", v);
		return buffer;
	}

	void GeometrySpec::validate() const
	{
		if (transmitters < 1 || receivers < 1)
			throw ConfigError("geometry needs at least one transmitter and one receiver");
		if (!(ring_radius > 0.0) || !std::isfinite(ring_radius))
			throw ConfigError("ring radius must be positive");
		if (!(exclusion_half_angle_deg >= 0.0) || exclusion_half_angle_deg >= 180.0)
			throw ConfigError("exclusion half-angle must lie in [0, 180) degrees");
		if (subsample < 1 || subsample > 128 || (subsample & (subsample - 1)) != 0)
			throw ConfigError("subsample factor must be one of 1, 2, 4, ..., 128");
	}

	void SimulateSpec::validate() const
	{
		if (refine < 1 || k_factor < 1)
			throw ConfigError("simulate.refine and simulate.k_factor must be >= 1");
		if (std::isnan(noise_snr_db) || noise_snr_db == -std::numeric_limits<double>::infinity())
			throw ConfigError("simulate.noise_snr_db must be a number or null");
	}

	void ExperimentConfig::validate() const
	{
		grid.validate();
		geometry.validate();
		phantom.validate();
		recon.validate();
		simulate.validate();
	}

	bool ExperimentConfig::operator==(const ExperimentConfig &o) const
	{
		return grid == o.grid && geometry == o.geometry && phantom == o.phantom && recon == o.recon &&
			   simulate == o.simulate && output_dir == o.output_dir && seed == o.seed;
	}

	namespace
	{
		void check_keys(const json &j, std::initializer_list<const char *> allowed, const std::string &where)
		{
			if (!j.is_object())
				throw ConfigError(where + " must be a JSON object");
			for (const auto &item : j.items())
			{
				bool known = false;
				for (const char *key : allowed)
					known = known || item.key() == key;
				if (!known)
					throw ConfigError("unknown key '" + item.key() + "' in " + where);
			}
		}

		template <typename T>
		void read(const json &j, const char *key, T &out)
		{
			if (j.contains(key))
				out = j.at(key).get<T>();
		}

		// null encodes an infinite bound.
		void read_bound(const json &j, const char *key, double &out, double infinite)
		{
			if (!j.contains(key))
				return;
			out = j.at(key).is_null() ? infinite : j.at(key).get<double>();
		}

		json bound(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

		Vector3 read_vector3(const json &j)
		{
			if (!j.is_array() || j.size() < 1 || j.size() > 3)
				throw ConfigError("expected an array of 1 to 3 coordinates");
			Vector3 v = Vector3::Zero();
			for (size_t i = 0; i < j.size(); ++i)
				v[Index(i)] = j[i].get<double>();
			return v;
		}

		json write_vector3(const Vector3 &v) { return json::array({v.x(), v.y(), v.z()}); }

		DomainGrid parse_grid(const json &j)
		{
			check_keys(j, {"dimension", "dims", "spacing_m", "origin_m", "wavelength_m", "background_permittivity"}, "grid");
			int dimension = 2;
			read(j, "dimension", dimension);
			if (dimension != 2 && dimension != 3)
				throw ConfigError("grid.dimension must be 2 or 3");
			std::array<Index, 3> dims{1, 1, 1};
			if (!j.contains("dims") || !j.at("dims").is_array() || j.at("dims").size() < size_t(dimension))
				throw ConfigError("grid.dims needs one entry per axis");
			for (int d = 0; d < dimension; ++d)
				dims[d] = j.at("dims")[size_t(d)].get<Index>();
			double spacing = 0.0, wavelength = 0.0, eps_b = 1.0;
			read(j, "spacing_m", spacing);
			read(j, "wavelength_m", wavelength);
			read(j, "background_permittivity", eps_b);
			for (int d = 0; d < dimension; ++d)
				if (dims[d] < 1)
					throw ConfigError("grid.dims entries must be >= 1");
			DomainGrid grid = DomainGrid::centered(dimension, dims, spacing, wavelength, eps_b);
			if (j.contains("origin_m"))
				grid.origin = read_vector3(j.at("origin_m"));
			grid.validate();
			return grid;
		}

		json grid_json(const DomainGrid &g)
		{
			json dims = json::array();
			for (int d = 0; d < g.dimension; ++d)
				dims.push_back(g.dims[d]);
			return {{"dimension", g.dimension},
					{"dims", dims},
					{"spacing_m", g.spacing},
					{"origin_m", write_vector3(g.origin)},
					{"wavelength_m", g.wavelength},
					{"background_permittivity", g.background_permittivity}};
		}

		Transmitter::Kind parse_incident(const std::string &name)
		{
			if (name == "point_source")
				return Transmitter::Kind::point_source;
			if (name == "plane_wave")
				return Transmitter::Kind::plane_wave;
			throw ConfigError("unknown incident kind '" + name + "'");
		}

		std::string incident_name(Transmitter::Kind kind)
		{
			return kind == Transmitter::Kind::plane_wave ? "plane_wave" : "point_source";
		}

		GeometrySpec parse_geometry(const json &j)
		{
			check_keys(j, {"transmitters", "receivers", "ring_radius_m", "exclusion_half_angle_deg", "subsample", "incident"},
					   "geometry");
			GeometrySpec g;
			read(j, "transmitters", g.transmitters);
			read(j, "receivers", g.receivers);
			read(j, "ring_radius_m", g.ring_radius);
			read(j, "exclusion_half_angle_deg", g.exclusion_half_angle_deg);
			read(j, "subsample", g.subsample);
			if (j.contains("incident"))
				g.incident = parse_incident(j.at("incident").get<std::string>());
			return g;
		}

		json geometry_json(const GeometrySpec &g)
		{
			return {{"transmitters", g.transmitters},
					{"receivers", g.receivers},
					{"ring_radius_m", g.ring_radius},
					{"exclusion_half_angle_deg", g.exclusion_half_angle_deg},
					{"subsample", g.subsample},
					{"incident", incident_name(g.incident)}};
		}

		PhantomSpec parse_phantom(const json &j)
		{
			check_keys(j, {"kind", "cylinders", "contrast", "half_width_m", "path", "supersample"}, "phantom");
			PhantomSpec p;
			if (j.contains("kind"))
				p.kind = parse_phantom_kind(j.at("kind").get<std::string>());
			read(j, "contrast", p.contrast);
			read(j, "half_width_m", p.half_width);
			read(j, "path", p.path);
			read(j, "supersample", p.supersample);
			if (j.contains("cylinders"))
				for (const auto &c : j.at("cylinders"))
				{
					check_keys(c, {"center_m", "radius_m", "contrast"}, "phantom.cylinders[]");
					Cylinder cyl;
					if (c.contains("center_m"))
						cyl.center = read_vector3(c.at("center_m"));
					read(c, "radius_m", cyl.radius);
					read(c, "contrast", cyl.contrast);
					p.cylinders.push_back(cyl);
				}
			return p;
		}

		json phantom_json(const PhantomSpec &p)
		{
			json cylinders = json::array();
			for (const auto &c : p.cylinders)
				cylinders.push_back({{"center_m", write_vector3(c.center)}, {"radius_m", c.radius}, {"contrast", c.contrast}});
			return {{"kind", to_string(p.kind)},     {"cylinders", cylinders}, {"contrast", p.contrast},
					{"half_width_m", p.half_width}, {"path", p.path},         {"supersample", p.supersample}};
		}

		ForwardConfig parse_forward(const json &j)
		{
			check_keys(j, {"max_iters", "delta_tol", "stop_rule", "step_mode", "fixed_step", "accelerated"}, "recon.forward");
			ForwardConfig f;
			read(j, "max_iters", f.max_iters);
			read(j, "delta_tol", f.delta_tol);
			read(j, "fixed_step", f.fixed_step);
			read(j, "accelerated", f.accelerated);
			if (j.contains("stop_rule"))
			{
				const auto name = j.at("stop_rule").get<std::string>();
				if (name == "gradient_norm")
					f.stop_rule = StopRule::gradient_norm;
				else if (name == "objective")
					f.stop_rule = StopRule::objective;
				else
					throw ConfigError("unknown stop_rule '" + name + "'");
			}
			if (j.contains("step_mode"))
			{
				const auto name = j.at("step_mode").get<std::string>();
				if (name == "adaptive")
					f.step_mode = StepMode::adaptive;
				else if (name == "fixed")
					f.step_mode = StepMode::fixed;
				else
					throw ConfigError("unknown step_mode '" + name + "'");
			}
			return f;
		}

		json forward_json(const ForwardConfig &f)
		{
			return {{"max_iters", f.max_iters},
					{"delta_tol", f.delta_tol},
					{"stop_rule", f.stop_rule == StopRule::objective ? "objective" : "gradient_norm"},
					{"step_mode", f.step_mode == StepMode::fixed ? "fixed" : "adaptive"},
					{"fixed_step", f.fixed_step},
					{"accelerated", f.accelerated}};
		}

		ReconConfig parse_recon(const json &j)
		{
			check_keys(j, {"model", "forward", "iterations", "tau_rel", "tau", "gamma", "tv", "box", "accelerated", "rel_tol",
						   "workers", "track_data_fit"},
					   "recon");
			ReconConfig r;
			if (j.contains("model"))
				r.model = parse_recon_model(j.at("model").get<std::string>());
			if (j.contains("forward"))
				r.forward = parse_forward(j.at("forward"));
			read(j, "iterations", r.iterations);
			read(j, "tau_rel", r.tau_rel);
			if (j.contains("tau") && !j.at("tau").is_null())
				r.tau = j.at("tau").get<double>();
			if (j.contains("gamma") && !j.at("gamma").is_null())
				r.gamma = j.at("gamma").get<double>();
			read(j, "accelerated", r.accelerated);
			read(j, "rel_tol", r.rel_tol);
			read(j, "workers", r.workers);
			read(j, "track_data_fit", r.track_data_fit);
			if (j.contains("tv"))
			{
				const json &tv = j.at("tv");
				check_keys(tv, {"variant", "max_iters", "delta_in", "step_factor"}, "recon.tv");
				if (tv.contains("variant"))
				{
					const auto name = tv.at("variant").get<std::string>();
					if (name == "isotropic")
						r.prox.variant = TvVariant::isotropic;
					else if (name == "anisotropic")
						r.prox.variant = TvVariant::anisotropic;
					else
						throw ConfigError("unknown TV variant '" + name + "'");
				}
				read(tv, "max_iters", r.prox.max_iters);
				read(tv, "delta_in", r.prox.delta_in);
				read(tv, "step_factor", r.prox.step_factor);
			}
			if (j.contains("box"))
			{
				const json &box = j.at("box");
				check_keys(box, {"lower", "upper"}, "recon.box");
				read_bound(box, "lower", r.box.lower, -std::numeric_limits<double>::infinity());
				read_bound(box, "upper", r.box.upper, std::numeric_limits<double>::infinity());
			}
			return r;
		}

		json recon_json(const ReconConfig &r)
		{
			return {{"model", to_string(r.model)},
					{"forward", forward_json(r.forward)},
					{"iterations", r.iterations},
					{"tau_rel", r.tau_rel},
					{"tau", r.tau ? json(*r.tau) : json(nullptr)},
					{"gamma", r.gamma ? json(*r.gamma) : json(nullptr)},
					{"tv",
					 {{"variant", r.prox.variant == TvVariant::anisotropic ? "anisotropic" : "isotropic"},
					  {"max_iters", r.prox.max_iters},
					  {"delta_in", r.prox.delta_in},
					  {"step_factor", r.prox.step_factor}}},
					{"box", {{"lower", bound(r.box.lower)}, {"upper", bound(r.box.upper)}}},
					{"accelerated", r.accelerated},
					{"rel_tol", r.rel_tol},
					{"workers", r.workers},
					{"track_data_fit", r.track_data_fit}};
		}

		SimulateSpec parse_simulate(const json &j)
		{
			check_keys(j, {"refine", "k_factor", "noise_snr_db"}, "simulate");
			SimulateSpec s;
			read(j, "refine", s.refine);
			read(j, "k_factor", s.k_factor);
			read_bound(j, "noise_snr_db", s.noise_snr_db, std::numeric_limits<double>::infinity());
			return s;
		}
	} // namespace

	ExperimentConfig parse_config(const std::string &text)
	{
		json j;
		try
		{
			j = json::parse(text, nullptr, true, true);
		}
		catch (const json::parse_error &e)
		{
			throw ParseError(std::string("config is not valid JSON: ") + e.what());
		}
		try
		{
			check_keys(j, {"grid", "geometry", "phantom", "recon", "simulate", "output_dir", "seed"}, "config");
			ExperimentConfig c;
			if (!j.contains("grid"))
				throw ConfigError("config needs a grid section");
			c.grid = parse_grid(j.at("grid"));
			if (j.contains("geometry"))
				c.geometry = parse_geometry(j.at("geometry"));
			if (j.contains("phantom"))
				c.phantom = parse_phantom(j.at("phantom"));
			if (j.contains("recon"))
				c.recon = parse_recon(j.at("recon"));
			if (j.contains("simulate"))
				c.simulate = parse_simulate(j.at("simulate"));
			read(j, "output_dir", c.output_dir);
			read(j, "seed", c.seed);
			c.validate();
			return c;
		}
		catch (const json::exception &e)
		{
			throw ConfigError(std::string("config has a value of the wrong type: ") + e.what());
		}
	}

	ExperimentConfig load_config(const std::filesystem::path &path)
	{
		std::ifstream in(path);
		if (!in)
			throw IoError("cannot open config " + path.string());
		std::stringstream buffer;
		buffer << in.rdbuf();
		return parse_config(buffer.str());
	}

	std::string serialize_config(const ExperimentConfig &c)
	{
		const json j = {{"grid", grid_json(c.grid)},
						{"geometry", geometry_json(c.geometry)},
						{"phantom", phantom_json(c.phantom)},
						{"recon", recon_json(c.recon)},
						{"simulate",
						 {{"refine", c.simulate.refine},
						  {"k_factor", c.simulate.k_factor},
						  {"noise_snr_db", bound(c.simulate.noise_snr_db)}}},
						{"output_dir", c.output_dir},
						{"seed", c.seed}};
		return j.dump(2) + "\n";
	}

	std::filesystem::path output_directory(const std::string &configured)
	{
		if (!configured.empty())
			return configured;
		if (const char *env = std::getenv("SEAGLE_OUTPUT_DIR"); env && *env)
			return env;
		return std::filesystem::current_path();
	}

	RingLayout ring_layout(const GeometrySpec &geometry, const DomainGrid &grid)
	{
		geometry.validate();
		RingLayout layout;
		layout.receivers = SensorSet::ring(geometry.receivers, geometry.ring_radius);
		// Transmitters sit half a receiver pitch off the receiver slots so no
		// receiver coincides with a source.
		const double offset = pi / double(geometry.receivers);
		for (Index t = 0; t < geometry.transmitters; ++t)
		{
			const double angle = 2.0 * pi * double(t) / double(geometry.transmitters) + offset;
			const Vector3 dir(std::cos(angle), std::sin(angle), 0.0);
			Transmitter tx;
			tx.kind = geometry.incident;
			// A plane wave travels from the transmitter position toward the center.
			tx.location = geometry.incident == Transmitter::Kind::plane_wave ? Vector3(-dir) : Vector3(geometry.ring_radius * dir);
			layout.transmitters.push_back(tx);

			std::vector<Index> rows;
			for (Index m = 0; m < geometry.receivers; ++m)
			{
				const double rx_angle = 2.0 * pi * double(m) / double(geometry.receivers);
				const double separation = std::abs(std::remainder(rx_angle - angle, 2.0 * pi)) * 180.0 / pi;
				if (separation > geometry.exclusion_half_angle_deg || geometry.exclusion_half_angle_deg == 0.0)
					rows.push_back(m);
			}
			layout.active.push_back(subsample_indices(rows, geometry.subsample));
		}
		if (const Index inside = layout.receivers.count_inside(grid); inside > 0)
			warn(std::to_string(inside) + " receiver(s) of the ring lie inside the imaging domain");
		return layout;
	}

	std::vector<Index> subsample_indices(const std::vector<Index> &active, int factor)
	{
		if (factor < 1 || factor > 128 || (factor & (factor - 1)) != 0)
			throw ConfigError("subsample factor must be one of 1, 2, 4, ..., 128");
		if (factor == 1)
			return active;
		std::vector<Index> kept;
		for (size_t i = 0; i + 1 < active.size(); ++i)
			if (i % size_t(factor) == 0)
				kept.push_back(active[i]);
		return kept;
	}

	MeasurementSet subsample_receivers(const MeasurementSet &measurements, int factor)
	{
		measurements.validate();
		MeasurementSet out = measurements;
		for (size_t t = 0; t < measurements.active.size(); ++t)
		{
			const auto &rows = measurements.active[t];
			std::vector<Index> positions(rows.size());
			for (size_t i = 0; i < rows.size(); ++i)
				positions[i] = Index(i);
			const std::vector<Index> kept = subsample_indices(positions, factor);
			out.active[t].clear();
			out.y[t].resize(Index(kept.size()));
			for (size_t i = 0; i < kept.size(); ++i)
			{
				out.active[t].push_back(rows[size_t(kept[i])]);
				out.y[t][Index(i)] = measurements.y[t][kept[i]];
			}
		}
		return out;
	}

	void write_measurements(const MeasurementSet &m, const std::filesystem::path &path)
	{
		m.validate();
		json receivers = json::array();
		for (const auto &p : m.receivers.positions)
			receivers.push_back(write_vector3(p));
		json transmitters = json::array();
		for (const auto &tx : m.transmitters)
			transmitters.push_back({{"kind", incident_name(tx.kind)},
									{"location_m", write_vector3(tx.location)},
									{"amplitude", json::array({tx.amplitude.real(), tx.amplitude.imag()})}});
		const json header = {{"format", "seagle-measurements"},
							 {"version", 1},
							 {"frequency_hz", m.frequency_hz},
							 {"receivers", receivers},
							 {"transmitters", transmitters}};

		std::ofstream out(path, std::ios::binary);
		if (!out)
			throw IoError("cannot write measurements to " + path.string());
		out << header.dump() << "\n---\ntx,rx,re,im\n";
		for (size_t t = 0; t < m.y.size(); ++t)
			for (size_t i = 0; i < m.active[t].size(); ++i)
			{
				const Complex v = m.y[t][Index(i)];
				out << t << ',' << m.active[t][i] << ',' << format_double(v.real()) << ',' << format_double(v.imag()) << '\n';
			}
		if (!out)
			throw IoError("failed writing measurements to " + path.string());
	}

	MeasurementSet read_measurements(const std::filesystem::path &path)
	{
		std::ifstream in(path, std::ios::binary);
		if (!in)
			throw IoError("cannot open measurements " + path.string());
		std::string header_text, line;
		int line_number = 0;
		while (std::getline(in, line))
		{
			++line_number;
			if (line == "---")
				break;
			header_text += line + "\n";
		}
		if (line != "---")
			throw ParseError(path.string() + ": missing '---' separator after the JSON header");

		MeasurementSet m;
		try
		{
			const json header = json::parse(header_text);
			if (header.value("format", "") != "seagle-measurements")
				throw ParseError(path.string() + ": not a measurement file");
			m.frequency_hz = header.at("frequency_hz").get<double>();
			for (const auto &p : header.at("receivers"))
				m.receivers.positions.push_back(read_vector3(p));
			for (const auto &t : header.at("transmitters"))
			{
				Transmitter tx;
				tx.kind = parse_incident(t.at("kind").get<std::string>());
				tx.location = read_vector3(t.at("location_m"));
				tx.amplitude = {t.at("amplitude")[0].get<double>(), t.at("amplitude")[1].get<double>()};
				m.transmitters.push_back(tx);
			}
		}
		catch (const json::exception &e)
		{
			throw ParseError(path.string() + ": bad header: " + e.what());
		}

		std::vector<std::vector<Complex>> values(m.transmitters.size());
		m.active.assign(m.transmitters.size(), {});
		if (!std::getline(in, line) || line != "tx,rx,re,im")
			throw ParseError(path.string() + ":" + std::to_string(line_number + 1) + ": expected column header tx,rx,re,im");
		++line_number;
		while (std::getline(in, line))
		{
			++line_number;
			if (line.empty())
				continue;
			long long tx = 0, rx = 0;
			double re = 0.0, im = 0.0;
			char extra = 0;
			if (std::sscanf(line.c_str(), "%lld,%lld,%lf,%lf%c", &tx, &rx, &re, &im, &extra) != 4)
				throw ParseError(path.string() + ":" + std::to_string(line_number) + ": malformed row");
			if (tx < 0 || size_t(tx) >= m.transmitters.size() || rx < 0 || rx >= m.receivers.size())
				throw ParseError(path.string() + ":" + std::to_string(line_number) + ": index out of range");
			m.active[size_t(tx)].push_back(Index(rx));
			values[size_t(tx)].push_back({re, im});
		}
		for (const auto &v : values)
			m.y.push_back(Eigen::Map<const ComplexVector>(v.data(), Index(v.size())));
		m.validate();
		return m;
	}

	MeasurementSet parse_fresnel_ascii(std::istream &in, const FresnelOptions &options)
	{
		struct Row
		{
			long long tx, rx;
			Complex total, incident;
		};
		std::vector<Row> rows;
		bool any_row = false;
		std::string line;
		for (int line_number = 1; std::getline(in, line); ++line_number)
		{
			const auto first = line.find_first_not_of(" \t\r");
			if (first == std::string::npos || line[first] == '#' || line[first] == '%' || line[first] == '!')
				continue;
			for (char &c : line)
				if (c == ',' || c == ';')
					c = ' ';
			std::istringstream fields(line);
			double v[7];
			int count = 0;
			while (count < 7 && fields >> v[count])
				++count;
			std::string trailing;
			if (count != 7 || (fields >> trailing))
				throw ParseError("Fresnel file line " + std::to_string(line_number) + ": expected 7 numeric columns");
			if (v[0] != std::floor(v[0]) || v[1] != std::floor(v[1]) || v[0] < 1 || v[1] < 1 ||
				v[1] > double(options.receiver_slots))
				throw ParseError("Fresnel file line " + std::to_string(line_number) + ": bad transmitter/receiver index");
			any_row = true;
			const double frequency = v[2] < 1e3 ? v[2] * 1e9 : v[2];
			if (std::abs(frequency - options.frequency_hz) > 1e-6 * options.frequency_hz)
				continue;
			rows.push_back({(long long)v[0], (long long)v[1], {v[3], v[4]}, {v[5], v[6]}});
		}
		if (!any_row)
			throw ParseError("Fresnel file holds no data rows");
		if (rows.empty())
			throw ParseError("Fresnel file has no rows at " + format_double(options.frequency_hz) + " Hz");

		std::set<long long> tx_ids;
		for (const auto &r : rows)
			tx_ids.insert(r.tx);
		const long long tx_count = *tx_ids.rbegin();

		MeasurementSet m;
		m.frequency_hz = options.frequency_hz;
		const double kb = 2.0 * pi * options.frequency_hz / speed_of_light;
		for (Index s = 0; s < options.receiver_slots; ++s)
		{
			const double angle = 2.0 * pi * double(s) / double(options.receiver_slots);
			m.receivers.positions.push_back(options.ring_radius * Vector3(std::cos(angle), std::sin(angle), 0.0));
		}
		std::vector<std::vector<Complex>> y(static_cast<size_t>(tx_count)), incident(static_cast<size_t>(tx_count));
		m.active.assign(size_t(tx_count), {});
		for (const auto &r : rows)
		{
			m.active[size_t(r.tx - 1)].push_back(Index(r.rx - 1));
			y[size_t(r.tx - 1)].push_back(r.total - r.incident);
			incident[size_t(r.tx - 1)].push_back(r.incident);
		}
		for (long long t = 0; t < tx_count; ++t)
		{
			const double angle = 2.0 * pi * double(t) / double(tx_count);
			Transmitter tx;
			tx.location = options.ring_radius * Vector3(std::cos(angle), std::sin(angle), 0.0);
			// Least-squares amplitude of a line source against the recorded incident field.
			Complex numerator = 0.0;
			double denominator = 0.0;
			for (size_t i = 0; i < m.active[size_t(t)].size(); ++i)
			{
				const Vector3 &p = m.receivers.positions[size_t(m.active[size_t(t)][i])];
				const Vector3 d = p - tx.location;
				if (d.norm() == 0.0)
					continue;
				const Complex g = green_2d(d, kb);
				numerator += std::conj(g) * incident[size_t(t)][i];
				denominator += std::norm(g);
			}
			tx.amplitude = denominator > 0.0 ? numerator / denominator : Complex(1.0);
			m.transmitters.push_back(tx);
			m.y.push_back(Eigen::Map<const ComplexVector>(y[size_t(t)].data(), Index(y[size_t(t)].size())));
		}
		m.validate();
		return m;
	}

	MeasurementSet load_fresnel_ascii(const std::filesystem::path &path, const FresnelOptions &options)
	{
		std::ifstream in(path);
		if (!in)
			throw IoError("cannot open Fresnel file " + path.string());
		return parse_fresnel_ascii(in, options);
	}

	namespace
	{
		std::string grid_line(const DomainGrid &g)
		{
			std::ostringstream s;
			s << "dimension=" << g.dimension << " dims=" << g.dims[0] << ',' << g.dims[1] << ',' << g.dims[2]
			  << " spacing_m=" << format_double(g.spacing) << " origin_m=" << format_double(g.origin.x()) << ','
			  << format_double(g.origin.y()) << ',' << format_double(g.origin.z())
			  << " wavelength_m=" << format_double(g.wavelength)
			  << " background_permittivity=" << format_double(g.background_permittivity);
			return s.str();
		}

		DomainGrid parse_grid_line(const std::string &text)
		{
			std::map<std::string, std::string> fields;
			std::istringstream s(text);
			std::string token;
			while (s >> token)
			{
				const auto eq = token.find('=');
				if (eq == std::string::npos)
					throw ParseError("image grid header: malformed field '" + token + "'");
				fields[token.substr(0, eq)] = token.substr(eq + 1);
			}
			auto triple = [&](const std::string &key) {
				std::array<double, 3> v{};
				if (!fields.count(key) ||
					std::sscanf(fields[key].c_str(), "%lf,%lf,%lf", &v[0], &v[1], &v[2]) != 3)
					throw ParseError("image grid header: missing or malformed " + key);
				return v;
			};
			auto scalar = [&](const std::string &key) {
				if (!fields.count(key))
					throw ParseError("image grid header: missing " + key);
				return std::stod(fields[key]);
			};
			DomainGrid g;
			g.dimension = int(scalar("dimension"));
			const auto dims = triple("dims");
			const auto origin = triple("origin_m");
			for (int d = 0; d < 3; ++d)
				g.dims[d] = Index(dims[d]);
			g.origin = Vector3(origin[0], origin[1], origin[2]);
			g.spacing = scalar("spacing_m");
			g.wavelength = scalar("wavelength_m");
			g.background_permittivity = scalar("background_permittivity");
			g.validate();
			return g;
		}
	} // namespace

	void write_image_csv(const RealVector &f, const DomainGrid &grid, const std::filesystem::path &path,
						 const std::string &units)
	{
		grid.validate();
		require_same_size(f.size(), grid.size(), "write_image_csv");
		std::ofstream out(path, std::ios::binary);
		if (!out)
			throw IoError("cannot write image " + path.string());
		out << "# seagle image\n# units: " << units << "\n# grid: " << grid_line(grid) << "\nix,iy,iz,value\n";
		for (Index n = 0; n < f.size(); ++n)
		{
			const auto idx = grid.multi_index(n);
			out << idx[0] << ',' << idx[1] << ',' << idx[2] << ',' << format_double(f[n]) << '\n';
		}
		if (!out)
			throw IoError("failed writing image " + path.string());
	}

	ImageData load_image_csv(const std::filesystem::path &path)
	{
		std::ifstream in(path, std::ios::binary);
		if (!in)
			throw IoError("cannot open image " + path.string());
		std::string line;
		std::optional<DomainGrid> grid;
		int line_number = 0;
		while (std::getline(in, line))
		{
			++line_number;
			if (line.rfind("# grid:", 0) == 0)
				grid = parse_grid_line(line.substr(7));
			else if (line.rfind("#", 0) != 0)
				break;
		}
		if (!grid)
			throw ParseError(path.string() + ": image has no grid header");
		if (line != "ix,iy,iz,value")
			throw ParseError(path.string() + ":" + std::to_string(line_number) + ": expected column header ix,iy,iz,value");

		ImageData image{*grid, RealVector::Constant(grid->size(), std::numeric_limits<double>::quiet_NaN())};
		Index filled = 0;
		while (std::getline(in, line))
		{
			++line_number;
			if (line.empty())
				continue;
			long long ix, iy, iz;
			double v;
			char extra;
			if (std::sscanf(line.c_str(), "%lld,%lld,%lld,%lf%c", &ix, &iy, &iz, &v, &extra) != 4)
				throw ParseError(path.string() + ":" + std::to_string(line_number) + ": malformed row");
			if (ix < 0 || iy < 0 || iz < 0 || ix >= grid->dims[0] || iy >= grid->dims[1] || iz >= grid->dims[2])
				throw ParseError(path.string() + ":" + std::to_string(line_number) + ": pixel index out of range");
			image.values[grid->linear_index(ix, iy, iz)] = v;
			++filled;
		}
		if (filled != grid->size())
			throw ParseError(path.string() + ": expected " + std::to_string(grid->size()) + " pixels, found " +
							 std::to_string(filled));
		return image;
	}

	void write_pgm(const RealVector &f, const DomainGrid &grid, const std::filesystem::path &path)
	{
		require_same_size(f.size(), grid.size(), "write_pgm");
		if (grid.dimension != 2)
			throw ConfigError("PGM output needs a 2D image");
		const double lo = f.minCoeff(), hi = f.maxCoeff();
		std::ofstream out(path, std::ios::binary);
		if (!out)
			throw IoError("cannot write image " + path.string());
		const Index w = grid.dims[0], h = grid.dims[1];
		out << "P5\n" << w << ' ' << h << "\n65535\n";
		// Top row of the file is the largest y.
		for (Index iy = h - 1; iy >= 0; --iy)
			for (Index ix = 0; ix < w; ++ix)
			{
				const double v = f[grid.linear_index(ix, iy)];
				const unsigned level =
					hi > lo ? unsigned(std::lround((v - lo) / (hi - lo) * 65535.0)) : 32768u;
				out.put(char(level >> 8));
				out.put(char(level & 0xff));
			}
		if (!out)
			throw IoError("failed writing image " + path.string());

		std::ofstream window(path.string() + ".window");
		if (!window)
			throw IoError("cannot write window sidecar for " + path.string());
		window << "min " << format_double(lo) << "\nmax " << format_double(hi) << "\n";
	}

	void write_table_csv(const Table &table, const std::filesystem::path &path, const std::vector<std::string> &comments)
	{
		std::ofstream out(path, std::ios::binary);
		if (!out)
			throw IoError("cannot write table " + path.string());
		for (const auto &c : comments)
			out << "# " << c << '\n';
		for (size_t i = 0; i < table.columns.size(); ++i)
			out << (i ? "," : "") << table.columns[i];
		out << '\n';
		for (const auto &row : table.rows)
		{
			if (row.size() != table.columns.size())
				throw DimensionError("table row width does not match its columns");
			for (size_t i = 0; i < row.size(); ++i)
				out << (i ? "," : "") << format_double(row[i]);
			out << '\n';
		}
		if (!out)
			throw IoError("failed writing table " + path.string());
	}

	std::string report_json(const ReconReport &report, const ReconConfig &cfg)
	{
		const json j = {{"model", to_string(cfg.model)},
						{"iterations", report.iterations},
						{"converged", report.converged},
						{"gamma", report.gamma},
						{"tau", report.tau},
						{"data_fit", report.data_fit},
						{"recon_error", report.recon_error},
						{"seconds", report.seconds},
						{"unwrap_corrections", report.unwrap_corrections}};
		return j.dump(2) + "\n";
	}
} // namespace seagle
