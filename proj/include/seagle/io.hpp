#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "seagle/phantom.hpp"
#include "seagle/recon.hpp"

namespace seagle
{
	/// Transmitter/receiver ring layout.
	struct GeometrySpec
	{
		Index transmitters = 8;
		Index receivers = 60;
		double ring_radius = 10.0; // m
		/// Receivers within this angle of a transmitter are not read for it.
		double exclusion_half_angle_deg = 0.0;
		/// Regular decimation of each transmitter's receiver list (1, 2, 4, ..., 128).
		int subsample = 1;
		Transmitter::Kind incident = Transmitter::Kind::point_source;

		void validate() const;
		bool operator==(const GeometrySpec &) const = default;
	};

	struct SimulateSpec
	{
		int refine = 2;   // data grid refinement factor
		int k_factor = 4; // forward iterations relative to the reconstruction's
		double noise_snr_db = std::numeric_limits<double>::infinity();

		void validate() const;
		bool operator==(const SimulateSpec &) const = default;
	};

	struct ExperimentConfig
	{
		DomainGrid grid;
		GeometrySpec geometry;
		PhantomSpec phantom;
		ReconConfig recon;
		SimulateSpec simulate;
		std::string output_dir;
		std::uint64_t seed = 0;

		void validate() const;
		bool operator==(const ExperimentConfig &) const;
	};

	ExperimentConfig parse_config(const std::string &text);
	ExperimentConfig load_config(const std::filesystem::path &path);
	std::string serialize_config(const ExperimentConfig &config);

	/// Output directory: explicit value, else $SEAGLE_OUTPUT_DIR, else the current directory.
	std::filesystem::path output_directory(const std::string &configured);

	/// Transmitters and per-transmitter receiver lists for a ring layout.
	struct RingLayout
	{
		SensorSet receivers;
		std::vector<Transmitter> transmitters;
		std::vector<std::vector<Index>> active;
	};
	RingLayout ring_layout(const GeometrySpec &geometry, const DomainGrid &grid);

	/// Keeps position i of each receiver list when i % factor == 0 and i is not
	/// the last position. factor 1 keeps everything.
	MeasurementSet subsample_receivers(const MeasurementSet &measurements, int factor);
	std::vector<Index> subsample_indices(const std::vector<Index> &active, int factor);

	/// Native measurement file: JSON header, a "---" line, then tx,rx,re,im rows.
	void write_measurements(const MeasurementSet &measurements, const std::filesystem::path &path);
	MeasurementSet read_measurements(const std::filesystem::path &path);

	/// Fresnel single-frequency ASCII layout.
	struct FresnelOptions
	{
		double frequency_hz = 3e9;
		double ring_radius = 1.67; // m, receivers and transmitters
		Index receiver_slots = 360;
	};

	/// Rows of "tx rx freq Re(total) Im(total) Re(incident) Im(incident)", 1-based
	/// indices, whitespace or comma separated. Frequencies below 1e3 are read as GHz.
	MeasurementSet load_fresnel_ascii(const std::filesystem::path &path, const FresnelOptions &options = {});
	MeasurementSet parse_fresnel_ascii(std::istream &in, const FresnelOptions &options = {});

	struct ImageData
	{
		DomainGrid grid;
		RealVector values;
	};

	/// `#` header lines with units and grid, then ix,iy,iz,value rows.
	void write_image_csv(const RealVector &f, const DomainGrid &grid, const std::filesystem::path &path,
						 const std::string &units = "1/m^2");
	ImageData load_image_csv(const std::filesystem::path &path);

	/// 16-bit binary PGM of a 2D image, min-max windowed; the window goes to
	/// `<path>.window`. A constant image maps to mid-gray.
	void write_pgm(const RealVector &f, const DomainGrid &grid, const std::filesystem::path &path);

	struct Table
	{
		std::vector<std::string> columns;
		std::vector<std::vector<double>> rows;
	};
	void write_table_csv(const Table &table, const std::filesystem::path &path, const std::vector<std::string> &comments = {});

	/// Serializes a reconstruction report as JSON.
	std::string report_json(const ReconReport &report, const ReconConfig &cfg);

	/// printf("%.17g")
	std::string format_double(double v);
} // namespace seagle
