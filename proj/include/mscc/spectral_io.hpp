#pragma once

#include <string>

#include "mscc/spectral.hpp"

namespace mscc {

/// CSV with header `wavelength_nm,value`, strictly increasing wavelengths.
SampledSpectrum load_spectrum_csv(const std::string& path);
void save_spectrum_csv(const std::string& path, const Spectrum& spec);

/// CSV with header `wavelength_nm,ch0,ch1,...` (channel names come from the
/// header row).
SensitivitySet load_sensitivities_csv(const std::string& path,
                                      const WavelengthGrid& grid);

/// Same file format, keeping the file's own (uniform) wavelength grid.
SensitivitySet load_sensitivities_csv_native(const std::string& path);

void save_sensitivities_csv(const std::string& path,
                            const SensitivitySet& sens);

}  // namespace mscc
