#pragma once

#include <cstdint>

namespace msarch {

/// |h(i)| <= scale * i^exponent for every i >= 1.
struct PowerEnvelope {
    double scale = 1.0;
    double exponent = 0.0;
};

/// Upper bound on sum_{i > n} nu (1-nu)^{i-1} |h(i)| for h under the envelope.
/// Returns +inf when the weighted envelope is not yet decreasing at n.
double stationary_tail_bound(double nu, std::int64_t n, PowerEnvelope env);

/// Truncation point n (at least geometric_truncation(nu, eps)) whose tail bound
/// is below eps. Throws SeriesUnstable when more than max_terms would be needed.
std::int64_t stationary_truncation(double nu, double eps, PowerEnvelope env,
                                   std::int64_t max_terms = 400'000'000);

/// Envelope for a_i^q.
PowerEnvelope a_power_envelope(double q, double D);

}  // namespace msarch
