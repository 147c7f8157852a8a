#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace seagle
{
	using Index = Eigen::Index;
	using Complex = std::complex<double>;

	template <typename Scalar>
	using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

	/// Real image over the domain grid, e.g. the scattering potential k^2 (eps - eps_b).
	using RealVector = Vector<double>;
	/// Complex field over the domain grid or over a sensor set.
	using ComplexVector = Vector<Complex>;
	using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
	using Vector3 = Eigen::Vector3d;

	inline constexpr double pi = 3.14159265358979323846264338327950288;
	inline constexpr Complex imag_unit{0.0, 1.0};

	// Error hierarchy. The CLI maps these onto exit codes.
	class Error : public std::runtime_error
	{
	public:
		using std::runtime_error::runtime_error;
	};

	class DimensionError : public Error
	{
	public:
		using Error::Error;
	};

	class SingularityError : public Error
	{
	public:
		using Error::Error;
	};

	class ConfigError : public Error
	{
	public:
		using Error::Error;
	};

	class NumericalError : public Error
	{
	public:
		using Error::Error;
	};

	class IoError : public Error
	{
	public:
		using Error::Error;
	};

	class ParseError : public IoError
	{
	public:
		using IoError::IoError;
	};

	inline void require_same_size(Index a, Index b, const char *what)
	{
		if (a != b)
			throw DimensionError(std::string(what) + ": size mismatch (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
	}

	/// Emits a warning on stderr; replaceable for tests and embedding.
	using WarningHandler = void (*)(const std::string &);
	void set_warning_handler(WarningHandler handler);
	void warn(const std::string &message);
} // namespace seagle
