#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace curvlab {

/// Raised when a formula hits a removable-looking but genuine singularity,
/// e.g. a centrifugal term b_i/q_i^2 with q_i = 0.
class SingularConfiguration : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// N canonical pairs. Storage is 0-based; documentation indices are 1-based.
struct PhaseState {
  std::vector<double> q;
  std::vector<double> p;

  PhaseState() = default;
  PhaseState(std::vector<double> q_in, std::vector<double> p_in);

  std::size_t dim() const { return q.size(); }

  /// Packed (q_1..q_N, p_1..p_N).
  std::vector<double> packed() const;
  static PhaseState unpack(std::span<const double> x);
};

struct ModelParams {
  double z = 0.0;
  std::vector<double> b;
  double kappa2 = 1.0;
  double omega = 0.0;
  double k = 0.0;

  /// Throws std::invalid_argument if b does not have length n or kappa2 == 0.
  void validate(std::size_t n) const;
};

}  // namespace curvlab
