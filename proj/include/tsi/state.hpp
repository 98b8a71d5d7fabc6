#pragma once

#include <cmath>

#include "tsi/phase.hpp"
#include "tsi/spectral.hpp"

namespace tsi {

/// Discrete two-scale unknown U(t_n, tau_j) together with its slow time and
/// the diagonal angle tau* = t / eps mod 2pi at which the solution is read.
struct TwoScaleState {
  TauGrid grid;
  GridValues values;
  double t = 0.0;
  double eps = 1.0;
  long step = 0;
  CompensatedPhase phase;

  TwoScaleState(TauGrid g, GridValues v, double eps_)
      : grid(g), values(std::move(v)), eps(eps_) {
    if (values.cols() != grid.size()) {
      throw InvalidInput("TwoScaleState: value count does not match grid");
    }
    if (!(eps > 0.0 && eps <= 1.0)) {
      throw InvalidInput("TwoScaleState: eps must lie in (0, 1]");
    }
  }

  int dim() const { return static_cast<int>(values.rows()); }

  bool finite() const { return values.allFinite(); }

  /// Largest imaginary part relative to the largest entry.
  double imaginary_contamination() const {
    const double scale = values.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return values.imag().cwiseAbs().maxCoeff() / scale;
  }
};

}  // namespace tsi
