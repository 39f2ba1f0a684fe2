#pragma once

#include <string>
#include <vector>

#include "dipres/optical_config.hpp"

namespace dipres {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationOptions {
  OpticalConfig cfg = OpticalConfig::desk();
  double separation_nm = 10.0;
  /// Image-plane checks run FFTs of image_fft_side^2 and dominate the runtime.
  bool include_imaging = true;
};

/// Runtime oracle and invariant checks: closed-form collection ratio, density
/// matrix invariants, agreement of the three QFI evaluations, analytic versus
/// finite-difference derivatives, closed-form radial/azimuthal fields, and
/// (optionally) image normalization, exact nulls and FI <= QFI.
std::vector<CheckResult> run_validation(const ValidationOptions& options);

}  // namespace dipres
