#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace initprop {

/// Count, mean and central sums M2..M4 of a sample. Two batches combine with
/// the pairwise update of Chan et al. / Pébay, so per-trial summaries can be
/// reduced in a fixed order independent of how the trials were scheduled.
struct CentralMoments {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;

  bool finite() const noexcept {
    return std::isfinite(mean) && std::isfinite(m2) && std::isfinite(m3) && std::isfinite(m4);
  }

  /// Two-pass summary of one contiguous batch.
  static CentralMoments of(std::span<const double> values) {
    CentralMoments out;
    out.count = static_cast<std::int64_t>(values.size());
    if (values.empty()) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(out.count);
    for (double v : values) {
      const double d = v - out.mean;
      const double d2 = d * d;
      out.m2 += d2;
      out.m3 += d2 * d;
      out.m4 += d2 * d2;
    }
    return out;
  }

  void merge(const CentralMoments& b) {
    if (b.count == 0) return;
    if (count == 0) {
      *this = b;
      return;
    }
    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(b.count);
    const double n = na + nb;
    const double delta = b.mean - mean;
    const double d_n = delta / n;
    const double d_n2 = d_n * d_n;
    const double cross = delta * d_n * na * nb;

    const double m4_new = m4 + b.m4 + cross * d_n2 * (na * na - na * nb + nb * nb) +
                          6.0 * d_n2 * (na * na * b.m2 + nb * nb * m2) +
                          4.0 * d_n * (na * b.m3 - nb * m3);
    const double m3_new =
        m3 + b.m3 + cross * d_n * (na - nb) + 3.0 * d_n * (na * b.m2 - nb * m2);
    const double m2_new = m2 + b.m2 + cross;

    mean += d_n * nb;
    m2 = m2_new;
    m3 = m3_new;
    m4 = m4_new;
    count += b.count;
  }

  /// Unbiased sample variance (population variance when count == 1).
  double variance() const {
    if (count < 2) return 0.0;
    return m2 / static_cast<double>(count - 1);
  }

  double standard_error() const {
    if (count < 2) return 0.0;
    return std::sqrt(variance() / static_cast<double>(count));
  }

  /// Moment-ratio skewness g1 = m3 / m2^{3/2} (with m_k = M_k / n).
  double skewness() const {
    if (count < 2 || m2 <= 0.0) return 0.0;
    const double n = static_cast<double>(count);
    return std::sqrt(n) * m3 / std::pow(m2, 1.5);
  }

  /// Excess kurtosis g2 = m4 / m2² − 3.
  double excess_kurtosis() const {
    if (count < 2 || m2 <= 0.0) return 0.0;
    const double n = static_cast<double>(count);
    return n * m4 / (m2 * m2) - 3.0;
  }
};

}  // namespace initprop
