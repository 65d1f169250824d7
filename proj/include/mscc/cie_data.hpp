#pragma once

#include "mscc/spectral.hpp"

namespace mscc {

/// CIE 1931 2-degree color-matching functions, 380-780 nm at 10 nm,
/// resampled onto `grid`. Channels are ordered X, Y, Z.
SensitivitySet cie1931_cmf(const WavelengthGrid& grid);

/// CIE standard illuminant D65, 380-780 nm at 10 nm (100 at 560 nm),
/// resampled onto `grid`.
Spectrum cie_d65(const WavelengthGrid& grid);

/// Raw tabulated data for the CSV exporters.
const SensitivitySet& cie1931_cmf_table();
const Spectrum& cie_d65_table();

}  // namespace mscc
