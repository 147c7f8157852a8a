#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "doctest.h"

#include "seagle/io.hpp"
#include "support.hpp"

using namespace seagle;
using namespace seagle::testing;
namespace fs = std::filesystem;

namespace
{
	struct TempDir
	{
		fs::path path;
		TempDir()
		{
			path = fs::temp_directory_path() / ("seagle_test_" + std::to_string(std::random_device{}()));
			fs::create_directories(path);
		}
		~TempDir() { fs::remove_all(path); }
	};

	std::string slurp(const fs::path &p)
	{
		std::ifstream in(p, std::ios::binary);
		return {std::istreambuf_iterator<char>(in), {}};
	}

	// Fresnel-style rows: 8 transmitters, 360 slots, 241 receivers each
	// (the 119 nearest the transmitter skipped), plus rows at another frequency.
	std::string fresnel_text(bool scatter, const char *separator = " ")
	{
		std::ostringstream out;
		out << "# synthetic single-frequency file\n";
		for (int t = 1; t <= 8; ++t)
		{
			const int tx_slot = (t - 1) * 45;
			int written = 0;
			for (int r = 1; r <= 360; ++r)
			{
				int distance = std::abs((r - 1) - tx_slot) % 360;
				distance = std::min(distance, 360 - distance);
				if (distance < 60)
					continue;
				++written;
				for (double ghz : {3.0, 5.0})
				{
					const double inc_re = std::cos(0.01 * r + t), inc_im = std::sin(0.02 * r - t);
					const double tot_re = inc_re + (scatter ? 0.001 * r : 0.0), tot_im = inc_im + (scatter ? -0.002 * t : 0.0);
					out << t << separator << r << separator << ghz << separator << tot_re << separator << tot_im << separator
						<< inc_re << separator << inc_im << "\n";
				}
			}
			REQUIRE(written == 241);
		}
		return out.str();
	}
}

TEST_CASE("config round trip")
{
	ExperimentConfig c;
	c.grid = DomainGrid::centered(2, {32, 24, 1}, 0.05, 0.7, 1.1);
	c.geometry.transmitters = 6;
	c.geometry.exclusion_half_angle_deg = 30.0;
	c.geometry.subsample = 4;
	c.geometry.incident = Transmitter::Kind::plane_wave;
	c.phantom.kind = PhantomSpec::Kind::cylinders;
	c.phantom.cylinders = {Cylinder{Vector3(0.1, -0.2, 0.0), 0.3, 0.15}};
	c.recon.model = ReconModel::rytov;
	c.recon.tau = 1e-3;
	c.recon.gamma = 0.25;
	c.recon.box = BoxConstraint{0.0, 2.0};
	c.recon.forward.stop_rule = StopRule::objective;
	c.recon.prox.variant = TvVariant::anisotropic;
	c.simulate.noise_snr_db = 30.0;
	c.output_dir = "out";
	c.seed = 99;

	const std::string text = serialize_config(c);
	const ExperimentConfig back = parse_config(text);
	CHECK(back == c);
	CHECK(serialize_config(back) == text);

	const ExperimentConfig defaults;
	CHECK(parse_config(serialize_config(defaults)) == defaults);
	CHECK_THROWS_AS(parse_config("{}"), ConfigError);
}

TEST_CASE("config rejects unknown keys and bad values")
{
	CHECK_THROWS_AS(parse_config(R"({"sede": 3})"), ConfigError);
	CHECK_THROWS_AS(parse_config(R"({"grid": {"spacing": 0.1}})"), ConfigError);
	CHECK_THROWS_AS(parse_config(R"({"grid": {"dims": [0, 16]}})"), ConfigError);
	CHECK_THROWS_AS(parse_config(R"({"grid": {"spacing_m": -1}})"), ConfigError);
	CHECK_THROWS_AS(parse_config(R"({"geometry": {"subsample": 3}})"), ConfigError);
	CHECK_THROWS_AS(parse_config(R"({"recon": {"iterations": 0}})"), ConfigError);
	CHECK_THROWS_AS(parse_config("{ not json"), ParseError);
}

TEST_CASE("output directory resolution")
{
	CHECK(output_directory("explicit") == fs::path("explicit"));
	setenv("SEAGLE_OUTPUT_DIR", "/tmp/from_env", 1);
	CHECK(output_directory("") == fs::path("/tmp/from_env"));
	unsetenv("SEAGLE_OUTPUT_DIR");
	CHECK(output_directory("") == fs::current_path());
}

TEST_CASE("ring layout")
{
	GeometrySpec g;
	g.transmitters = 4;
	g.receivers = 36;
	g.ring_radius = 5.0;
	g.exclusion_half_angle_deg = 45.0;
	const DomainGrid grid = DomainGrid::centered(2, {8, 8, 1}, 0.1, 1.0);
	const RingLayout layout = ring_layout(g, grid);
	CHECK(layout.receivers.size() == 36);
	REQUIRE(layout.transmitters.size() == 4);
	for (size_t t = 0; t < 4; ++t)
	{
		CHECK(layout.transmitters[t].location.norm() == doctest::Approx(5.0));
		for (const Vector3 &rx : layout.receivers.positions)
			CHECK((rx - layout.transmitters[t].location).norm() > 0.1);
		// Sources sit half a pitch off the receivers, so ten fall within 45 degrees.
		CHECK(layout.active[t].size() == 36 - 10);
	}
}

TEST_CASE("subsampling keeps nested regular subsets")
{
	std::vector<Index> active(241);
	for (Index i = 0; i < 241; ++i)
		active[size_t(i)] = 60 + i;
	const std::vector<size_t> want{120, 60, 30, 15, 8, 4, 2};
	std::vector<Index> previous = active;
	int k = 0;
	for (int factor = 2; factor <= 128; factor *= 2, ++k)
	{
		const std::vector<Index> kept = subsample_indices(active, factor);
		CHECK(kept.size() == want[size_t(k)]);
		for (Index slot : kept)
			CHECK(std::find(previous.begin(), previous.end(), slot) != previous.end());
		previous = kept;
	}
	CHECK(subsample_indices(active, 1) == active);
	CHECK_THROWS_AS(subsample_indices(active, 3), ConfigError);
	CHECK_THROWS_AS(subsample_indices(active, 256), ConfigError);
}

TEST_CASE("measurement file round trip")
{
	TempDir dir;
	MeasurementSet m;
	m.receivers = SensorSet::ring(7, 2.5, 0.3);
	m.transmitters.resize(2);
	m.transmitters[0].location = Vector3(3.0, 0.1, 0.0);
	m.transmitters[0].amplitude = Complex(0.3, -1.0 / 3.0);
	m.transmitters[1].kind = Transmitter::Kind::plane_wave;
	m.transmitters[1].location = Vector3(0.0, -1.0, 0.0);
	m.active = {{0, 2, 5}, {1, 3, 4, 6}};
	m.y = {random_complex(3), random_complex(4)};
	m.frequency_hz = 2.998e8;
	write_measurements(m, dir.path / "m.txt");
	const MeasurementSet back = read_measurements(dir.path / "m.txt");
	CHECK(back.frequency_hz == m.frequency_hz);
	CHECK(back.active == m.active);
	CHECK(back.y == m.y);
	REQUIRE(back.receivers.size() == m.receivers.size());
	for (Index i = 0; i < m.receivers.size(); ++i)
		CHECK(back.receivers.positions[size_t(i)] == m.receivers.positions[size_t(i)]);
	CHECK(back.transmitters[0].amplitude == m.transmitters[0].amplitude);
	CHECK(back.transmitters[1].kind == Transmitter::Kind::plane_wave);

	std::ofstream(dir.path / "bad.txt") << "{\"format\": \"other\"}\n---\n";
	CHECK_THROWS_AS(read_measurements(dir.path / "bad.txt"), IoError);
	CHECK_THROWS_AS(read_measurements(dir.path / "missing.txt"), IoError);
}

TEST_CASE("Fresnel layout loads 8 x 241 at 3 GHz")
{
	std::istringstream in(fresnel_text(true));
	const MeasurementSet m = parse_fresnel_ascii(in);
	CHECK(m.transmitter_count() == 8);
	CHECK(m.receivers.size() == 360);
	CHECK(m.frequency_hz == 3e9);
	for (const auto &rows : m.active)
		CHECK(rows.size() == 241);
	CHECK(std::abs(m.y[0][0] - Complex(0.001 * m.active[0][0] + 0.001, -0.002)) <= 1e-12);
	CHECK(m.receivers.positions[90].y() == doctest::Approx(1.67));

	const std::vector<size_t> want{120, 60, 30, 15, 8, 4, 2};
	int k = 0;
	MeasurementSet previous = m;
	for (int factor = 2; factor <= 128; factor *= 2, ++k)
	{
		const MeasurementSet sub = subsample_receivers(m, factor);
		for (size_t t = 0; t < 8; ++t)
		{
			CHECK(sub.active[t].size() == want[size_t(k)]);
			CHECK(sub.y[t].size() == Index(want[size_t(k)]));
			for (Index slot : sub.active[t])
				CHECK(std::find(previous.active[t].begin(), previous.active[t].end(), slot) != previous.active[t].end());
		}
		previous = sub;
	}
}

TEST_CASE("Fresnel loader edge cases")
{
	std::istringstream same(fresnel_text(false, ", "));
	const MeasurementSet m = parse_fresnel_ascii(same);
	CHECK(m.squared_norm() == 0.0);

	std::istringstream bad("1 2 3.0 0.1 0.2\n");
	CHECK_THROWS_AS(parse_fresnel_ascii(bad), ParseError);
	std::istringstream other("1 2 5.0 0.1 0.2 0.3 0.4\n");
	CHECK_THROWS_AS(parse_fresnel_ascii(other), ParseError);
	std::istringstream index("0 2 3.0 0.1 0.2 0.3 0.4\n");
	CHECK_THROWS_AS(parse_fresnel_ascii(index), ParseError);
	CHECK_THROWS_AS(load_fresnel_ascii("/nonexistent/fresnel.txt"), IoError);
}

TEST_CASE("image CSV round trip is bit exact")
{
	TempDir dir;
	const DomainGrid grid = DomainGrid::centered(2, {5, 4, 1}, 0.037, 0.9);
	RealVector f = random_real(grid.size(), -1.0, 1.0);
	f[3] = 1.0 / 3.0;
	f[7] = 5e-300;
	write_image_csv(f, grid, dir.path / "f.csv");
	const std::string text = slurp(dir.path / "f.csv");
	CHECK(text.find("# units: 1/m^2") != std::string::npos);
	CHECK(text.find("dims=5,4,1") != std::string::npos);
	const ImageData back = load_image_csv(dir.path / "f.csv");
	CHECK(back.values == f);
	CHECK(back.grid == grid);
}

TEST_CASE("PGM output")
{
	TempDir dir;
	const DomainGrid grid = DomainGrid::centered(2, {3, 2, 1}, 0.1, 1.0);
	write_pgm(RealVector::Constant(6, 4.2), grid, dir.path / "c.pgm");
	const std::string flat = slurp(dir.path / "c.pgm");
	const std::string header = "P5\n3 2\n65535\n";
	REQUIRE(flat.substr(0, header.size()) == header);
	for (size_t i = header.size(); i < flat.size(); i += 2)
		CHECK(((unsigned char)flat[i] << 8 | (unsigned char)flat[i + 1]) == 32768);
	CHECK(fs::exists(dir.path / "c.pgm.window"));

	RealVector ramp(6);
	ramp << 0, 1, 2, 3, 4, 5;
	write_pgm(ramp, grid, dir.path / "r.pgm");
	const std::string data = slurp(dir.path / "r.pgm").substr(header.size());
	auto pixel = [&](size_t i) { return (unsigned char)data[2 * i] << 8 | (unsigned char)data[2 * i + 1]; };
	// First PGM row is the top of the image (largest y).
	CHECK(pixel(0) == 39321);
	CHECK(pixel(5) == 26214);
	CHECK(pixel(3) == 0);
	CHECK(pixel(2) == 65535);
	const std::string window = slurp(dir.path / "r.pgm.window");
	CHECK(window.find("min 0") != std::string::npos);
	CHECK(window.find("max 5") != std::string::npos);
}

TEST_CASE("table and report output")
{
	TempDir dir;
	Table t{{"k", "error"}, {{1, 0.5}, {2, 0.25}}};
	write_table_csv(t, dir.path / "t.csv", {"sweep"});
	CHECK(slurp(dir.path / "t.csv") == "# sweep\nk,error\n1,0.5\n2,0.25\n");

	ReconReport r;
	r.f_hat = RealVector::Zero(2);
	r.data_fit = {1.0, 0.5};
	r.iterations = 2;
	const std::string json = report_json(r, ReconConfig{});
	CHECK(json.find("\"data_fit\"") != std::string::npos);
	CHECK(format_double(0.1) == "0.10000000000000001");
}
