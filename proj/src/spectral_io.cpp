#include "mscc/spectral_io.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "mscc/common.hpp"

namespace mscc {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // Trim surrounding whitespace.
    std::size_t b = field.find_first_not_of(" \t\r");
    std::size_t e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}

double parse_double(const std::string& s, const std::string& path) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(path + ": cannot parse number '" + s + "'");
  }
}

}  // namespace

SampledSpectrum load_spectrum_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open spectrum file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw DataError(path + ": empty spectrum file");
  auto header = split_csv_line(line);
  if (header.size() != 2 || header[0] != "wavelength_nm")
    throw DataError(path + ": expected header wavelength_nm,value");
  SampledSpectrum spec;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 2) throw DataError(path + ": malformed row: " + line);
    double wl = parse_double(fields[0], path);
    double v = parse_double(fields[1], path);
    if (!spec.wavelengths.empty() && wl <= spec.wavelengths.back())
      throw DataError(path + ": wavelengths must be strictly increasing");
    if (v < 0.0) throw DataError(path + ": negative spectral value");
    spec.wavelengths.push_back(wl);
    spec.values.push_back(v);
  }
  if (spec.wavelengths.empty()) throw DataError(path + ": no samples");
  return spec;
}

void save_spectrum_csv(const std::string& path, const Spectrum& spec) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write spectrum file: " + path);
  out << "wavelength_nm,value\n";
  out.precision(10);
  for (int i = 0; i < spec.grid.count; ++i)
    out << spec.grid.wavelength(i) << ',' << spec.values[i] << '\n';
  if (!out) throw DataError("write failed: " + path);
}

SensitivitySet load_sensitivities_csv(const std::string& path,
                                      const WavelengthGrid& grid) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open sensitivity file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw DataError(path + ": empty sensitivity file");
  auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "wavelength_nm")
    throw DataError(path + ": expected header wavelength_nm,ch0,...");
  const std::size_t nch = header.size() - 1;
  std::vector<double> wl;
  std::vector<std::vector<double>> cols(nch);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw DataError(path + ": malformed row: " + line);
    double w = parse_double(fields[0], path);
    if (!wl.empty() && w <= wl.back())
      throw DataError(path + ": wavelengths must be strictly increasing");
    wl.push_back(w);
    for (std::size_t c = 0; c < nch; ++c) {
      double v = parse_double(fields[c + 1], path);
      if (v < 0.0) throw DataError(path + ": negative sensitivity value");
      cols[c].push_back(v);
    }
  }
  if (wl.empty()) throw DataError(path + ": no samples");

  // The raw file may be nonuniform; go through SampledSpectrum resampling.
  SensitivitySet out;
  out.grid = grid;
  out.channel_names.assign(header.begin() + 1, header.end());
  for (std::size_t c = 0; c < nch; ++c) {
    SampledSpectrum s;
    s.wavelengths = wl;
    s.values = cols[c];
    out.channels.push_back(resample_spectrum(s, grid).values);
  }
  out.validate();
  return out;
}

SensitivitySet load_sensitivities_csv_native(const std::string& path) {
  // Two-pass: probe the wavelength column, then load onto that grid.
  std::ifstream in(path);
  if (!in) throw DataError("cannot open sensitivity file: " + path);
  std::string line;
  std::getline(in, line);
  std::vector<double> wl;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.empty()) continue;
    wl.push_back(parse_double(fields[0], path));
  }
  if (wl.size() < 2) throw DataError(path + ": need at least two samples");
  double step = wl[1] - wl[0];
  for (std::size_t i = 1; i < wl.size(); ++i)
    if (std::abs((wl[i] - wl[i - 1]) - step) > 1e-6)
      throw DataError(path + ": native-grid load requires uniform spacing");
  WavelengthGrid grid(wl.front(), wl.back(), step);
  return load_sensitivities_csv(path, grid);
}

void save_sensitivities_csv(const std::string& path,
                            const SensitivitySet& sens) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write sensitivity file: " + path);
  out << "wavelength_nm";
  for (std::size_t c = 0; c < sens.channels.size(); ++c) {
    out << ',';
    out << (c < sens.channel_names.size() ? sens.channel_names[c]
                                          : "ch" + std::to_string(c));
  }
  out << '\n';
  out.precision(10);
  for (int i = 0; i < sens.grid.count; ++i) {
    out << sens.grid.wavelength(i);
    for (const auto& ch : sens.channels) out << ',' << ch[i];
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace mscc
