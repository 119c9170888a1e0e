#include "sinr/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sinr {

namespace {

std::uint32_t rd_u32(std::istream& f, const std::string& path) {
  std::uint32_t v = 0;
  if (!f.read(reinterpret_cast<char*>(&v), 4))
    throw std::runtime_error("load_wav: truncated file " + path);
  return v;
}

std::uint16_t rd_u16(std::istream& f, const std::string& path) {
  std::uint16_t v = 0;
  if (!f.read(reinterpret_cast<char*>(&v), 2))
    throw std::runtime_error("load_wav: truncated file " + path);
  return v;
}

void wr_u32(std::ostream& f, std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); }
void wr_u16(std::ostream& f, std::uint16_t v) { f.write(reinterpret_cast<const char*>(&v), 2); }

}  // namespace

std::vector<double> load_wav(const std::string& path, int* sample_rate) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_wav: cannot open " + path);

  char tag[4];
  if (!f.read(tag, 4) || std::memcmp(tag, "RIFF", 4) != 0)
    throw std::runtime_error("load_wav: not a RIFF file: " + path);
  rd_u32(f, path);  // RIFF payload size, unused
  if (!f.read(tag, 4) || std::memcmp(tag, "WAVE", 4) != 0)
    throw std::runtime_error("load_wav: not a WAVE file: " + path);

  bool have_fmt = false;
  int rate = 0;
  std::vector<double> samples;
  while (f.read(tag, 4)) {
    const std::uint32_t size = rd_u32(f, path);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      const std::uint16_t format = rd_u16(f, path);
      const std::uint16_t channels = rd_u16(f, path);
      rate = static_cast<int>(rd_u32(f, path));
      rd_u32(f, path);  // byte rate
      rd_u16(f, path);  // block align
      const std::uint16_t bits = rd_u16(f, path);
      if (format != 1 || bits != 16)
        throw std::runtime_error("load_wav: only 16-bit PCM supported: " + path);
      if (channels != 1) throw std::runtime_error("load_wav: only mono supported: " + path);
      if (size > 16) f.seekg(size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw std::runtime_error("load_wav: data before fmt in " + path);
      const std::size_t count = size / 2;
      std::vector<std::int16_t> raw(count);
      if (!f.read(reinterpret_cast<char*>(raw.data()),
                  static_cast<std::streamsize>(count * 2)))
        throw std::runtime_error("load_wav: truncated data chunk in " + path);
      samples.resize(count);
      for (std::size_t i = 0; i < count; ++i) samples[i] = raw[i] / 32768.0;
      if (sample_rate) *sample_rate = rate;
      return samples;
    } else {
      // Skip unknown chunks (word-aligned).
      f.seekg(size + (size & 1), std::ios::cur);
    }
  }
  throw std::runtime_error("load_wav: no data chunk in " + path);
}

void save_wav(const std::vector<double>& samples, int sample_rate, const std::string& path) {
  if (sample_rate <= 0) throw std::invalid_argument("save_wav: sample rate must be positive");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("save_wav: cannot open " + path);

  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  f.write("RIFF", 4);
  wr_u32(f, 36 + data_bytes);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  wr_u32(f, 16);
  wr_u16(f, 1);  // PCM
  wr_u16(f, 1);  // mono
  wr_u32(f, static_cast<std::uint32_t>(sample_rate));
  wr_u32(f, static_cast<std::uint32_t>(sample_rate) * 2);
  wr_u16(f, 2);   // block align
  wr_u16(f, 16);  // bits per sample
  f.write("data", 4);
  wr_u32(f, data_bytes);
  for (double v : samples) {
    const double scaled = std::floor(std::clamp(v, -1.0, 1.0) * 32768.0 + 0.5);
    const std::int16_t s =
        static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    f.write(reinterpret_cast<const char*>(&s), 2);
  }
  f.flush();
  if (!f) throw std::runtime_error("save_wav: write failed for " + path);
}

}  // namespace sinr
