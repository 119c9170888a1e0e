#pragma once

#include <string>
#include <vector>

namespace sinr {

// 16-bit PCM mono WAV to doubles via s / 32768, so samples land in
// [-1, 1). Throws on any other format.
std::vector<double> load_wav(const std::string& path, int* sample_rate);

// Doubles to 16-bit PCM mono: round(v * 32768) clamped to the int16 range.
// Round-trips every value a load can produce.
void save_wav(const std::vector<double>& samples, int sample_rate, const std::string& path);

}  // namespace sinr
