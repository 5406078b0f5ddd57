#pragma once

#include <complex>
#include <string>

namespace thermobem {

// CLI complex literals: "2", "2+1i", "-0.5-3e-2i", "1i".
std::complex<double> parse_complex(const std::string& text);
std::string format_complex(std::complex<double> z);

// 17 significant digits, round-trip safe.
std::string format_g17(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace thermobem
