#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seagle/adjoint.hpp"
#include "seagle/tv.hpp"

namespace seagle
{
	inline constexpr double speed_of_light = 299792458.0; // m/s

	struct Transmitter
	{
		enum class Kind
		{
			point_source, // line source in 2D
			plane_wave,
		};

		Kind kind = Kind::point_source;
		/// Source position (point_source) or unit propagation direction (plane_wave).
		Vector3 location = Vector3::Zero();
		Complex amplitude = 1.0;

		/// Incident field at arbitrary points for background wavenumber kb.
		Complex field_at(const Vector3 &point, double kb, int dimension) const;
	};

	/// Incident field sampled at every pixel center of `grid`.
	ComplexVector incident_field(const Transmitter &tx, const DomainGrid &grid);
	/// Incident field at the given receiver slots.
	ComplexVector incident_at(const Transmitter &tx, const SensorSet &sensors, std::span<const Index> rows,
							  double kb, int dimension);

	/// Scattered-field measurements for several illuminations sharing one
	/// receiver layout. Each transmitter reads a subset of the receiver slots.
	struct MeasurementSet
	{
		SensorSet receivers;
		std::vector<Transmitter> transmitters;
		std::vector<std::vector<Index>> active; // receiver slots per transmitter
		std::vector<ComplexVector> y;           // y[t][i] belongs to slot active[t][i]
		double frequency_hz = 0.0;

		Index transmitter_count() const { return Index(transmitters.size()); }
		Index measurement_count() const;
		/// sum over transmitters of |y_t|^2
		double squared_norm() const;
		void validate() const;
	};

	/// Every slot active for every transmitter.
	std::vector<std::vector<Index>> all_receivers(Index transmitters, Index receivers);

	/// Operators and incident fields shared by all iterations of a reconstruction.
	struct ScatteringSetup
	{
		DomainGrid grid;
		DomainOperator G;
		SensorOperator H;
		std::vector<ComplexVector> u_in;

		ScatteringSetup(const DomainGrid &grid, const MeasurementSet &measurements);
	};

	enum class ReconModel
	{
		seagle,
		born,
		rytov,
	};

	std::string to_string(ReconModel model);
	ReconModel parse_recon_model(const std::string &name);

	struct ReconConfig
	{
		ReconModel model = ReconModel::seagle;
		ForwardConfig forward;
		int iterations = 50;
		/// tau = tau_rel * |y|^2 unless `tau` is set.
		double tau_rel = 1.5e-9;
		std::optional<double> tau;
		/// FISTA step; estimated by backtracking at the first iterate when unset.
		std::optional<double> gamma;
		ProxOptions prox;
		BoxConstraint box{0.0, std::numeric_limits<double>::infinity()};
		/// false gives ISTA (q_t = 1).
		bool accelerated = true;
		double rel_tol = 1e-6;
		/// Worker threads for the per-transmitter gradient sum.
		int workers = 1;
		/// Evaluate the data fit at every iterate (one extra forward solve per iteration).
		bool track_data_fit = true;

		void validate() const;
		bool operator==(const ReconConfig &) const;
	};

	struct ReconReport
	{
		RealVector f_hat;
		std::vector<double> data_fit;     // |z(f^t) - y|^2 / |y|^2
		std::vector<double> recon_error;  // |f^t - f|^2 / |f|^2, with ground truth
		std::vector<double> seconds;      // wall clock per iteration
		double gamma = 0.0;
		double tau = 0.0;
		int iterations = 0;
		bool converged = false; // relative change fell below rel_tol
		int unwrap_corrections = 0;
	};

	/// z_B = H (u_in . f)
	ComplexVector born_predict(const RealVector &f, const ComplexVector &u_in, const SensorOperator &H);
	ComplexVector born_predict(const RealVector &f, const ComplexVector &u_in, const SensorOperator &H,
							   std::span<const Index> rows);
	/// Re{conj(u_in) . H^H (z_B - y)}
	RealVector born_gradient(const RealVector &f, const ComplexVector &y, const ComplexVector &u_in,
							 const SensorOperator &H);
	RealVector born_gradient(const RealVector &f, const ComplexVector &y, const ComplexVector &u_in,
							 const SensorOperator &H, std::span<const Index> rows);

	struct RytovData
	{
		ComplexVector values;
		/// Phase jumps larger than pi folded back by unwrapping.
		int unwrap_corrections = 0;
	};

	/// u_in . (log|u/u_in| + j unwrap(arg(u/u_in))), unwrapped along the receiver index.
	RytovData rytov_transform(const ComplexVector &u_total, const ComplexVector &u_in);

	/// Replaces every y_t by its Rytov transform.
	MeasurementSet rytov_measurements(const MeasurementSet &measurements, const DomainGrid &grid, int *corrections = nullptr);

	struct GradientSum
	{
		RealVector gradient;
		double value = 0.0; // sum of D_t
	};

	/// Sum over transmitters of the data-fidelity gradient for the chosen model.
	GradientSum total_gradient(const RealVector &f, const ScatteringSetup &setup, const MeasurementSet &measurements,
							   const ReconConfig &cfg);
	/// Sum over transmitters of D_t without the backward pass.
	double total_fidelity(const RealVector &f, const ScatteringSetup &setup, const MeasurementSet &measurements,
						  const ReconConfig &cfg);

	/// Predicted scattered fields per transmitter.
	std::vector<ComplexVector> predict_measurements(const RealVector &f, const ScatteringSetup &setup,
													const MeasurementSet &measurements, const ReconConfig &cfg);

	/// TV-regularized FISTA. `initial` defaults to the background (zero potential).
	ReconReport fista_reconstruct(const DomainGrid &grid, const MeasurementSet &measurements, const ReconConfig &cfg,
								  const RealVector *ground_truth = nullptr, const RealVector *initial = nullptr);

	/// Synthetic scattered data for the potential `f` on `grid` with the full forward model.
	MeasurementSet simulate_measurements(const DomainGrid &grid, const RealVector &f, const SensorSet &receivers,
										 const std::vector<Transmitter> &transmitters,
										 const std::vector<std::vector<Index>> &active, const ForwardConfig &cfg,
										 int workers = 1);

	/// Adds circular complex Gaussian noise at the given SNR (dB) relative to each y_t.
	void add_noise(MeasurementSet &measurements, double snr_db, std::uint64_t seed);
} // namespace seagle
