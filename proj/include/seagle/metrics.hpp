#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "seagle/types.hpp"

namespace seagle
{
	enum class MetricName
	{
		normalized_error,
		normalized_data_fit,
		normalized_recon_error,
		snr_db,
	};

	struct MetricValue
	{
		MetricName name;
		double value;
	};

	std::string to_string(MetricName name);

	/// |estimate - reference|^2 / |reference|^2
	template <typename DerivedA, typename DerivedB>
	double normalized_error(const Eigen::MatrixBase<DerivedA> &estimate, const Eigen::MatrixBase<DerivedB> &reference)
	{
		require_same_size(estimate.size(), reference.size(), "normalized_error");
		const double denominator = reference.squaredNorm();
		if (denominator == 0.0)
			throw NumericalError("normalized error undefined for a zero reference");
		return (estimate - reference).squaredNorm() / denominator;
	}

	/// |z(f_hat) - y|^2 / |y|^2, i.e. D(f_hat) / D(0).
	template <typename DerivedA, typename DerivedB>
	double normalized_data_fit(const Eigen::MatrixBase<DerivedA> &predicted, const Eigen::MatrixBase<DerivedB> &measured)
	{
		return normalized_error(predicted, measured);
	}

	template <typename DerivedA, typename DerivedB>
	double normalized_recon_error(const Eigen::MatrixBase<DerivedA> &f_hat, const Eigen::MatrixBase<DerivedB> &f_true)
	{
		return normalized_error(f_hat, f_true);
	}

	/// 10 log10(|ref|^2 / |f_hat - ref|^2); +inf when they coincide exactly.
	template <typename DerivedA, typename DerivedB>
	double snr_db(const Eigen::MatrixBase<DerivedA> &f_hat, const Eigen::MatrixBase<DerivedB> &reference)
	{
		require_same_size(f_hat.size(), reference.size(), "snr_db");
		const double signal = reference.squaredNorm();
		if (signal == 0.0)
			throw NumericalError("snr undefined for a zero reference");
		const double noise = (f_hat - reference).squaredNorm();
		if (noise == 0.0)
			return std::numeric_limits<double>::infinity();
		return 10.0 * std::log10(signal / noise);
	}
} // namespace seagle
