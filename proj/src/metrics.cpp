#include "seagle/metrics.hpp"

namespace seagle
{
	std::string to_string(MetricName name)
	{
		switch (name)
		{
		case MetricName::normalized_error: return "normalized_error";
		case MetricName::normalized_data_fit: return "normalized_data_fit";
		case MetricName::normalized_recon_error: return "normalized_recon_error";
		case MetricName::snr_db: return "snr_db";
		}
		return "unknown";
	}
} // namespace seagle
