#include "sinr/manifest.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace sinr {

namespace {

constexpr std::uint32_t kInit[8] = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                                    0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};

constexpr std::uint32_t kRound[64] = {
    0x428a2f98u, 0x71374491u, 0xb5c0fbcfu, 0xe9b5dba5u, 0x3956c25bu, 0x59f111f1u, 0x923f82a4u,
    0xab1c5ed5u, 0xd807aa98u, 0x12835b01u, 0x243185beu, 0x550c7dc3u, 0x72be5d74u, 0x80deb1feu,
    0x9bdc06a7u, 0xc19bf174u, 0xe49b69c1u, 0xefbe4786u, 0x0fc19dc6u, 0x240ca1ccu, 0x2de92c6fu,
    0x4a7484aau, 0x5cb0a9dcu, 0x76f988dau, 0x983e5152u, 0xa831c66du, 0xb00327c8u, 0xbf597fc7u,
    0xc6e00bf3u, 0xd5a79147u, 0x06ca6351u, 0x14292967u, 0x27b70a85u, 0x2e1b2138u, 0x4d2c6dfcu,
    0x53380d13u, 0x650a7354u, 0x766a0abbu, 0x81c2c92eu, 0x92722c85u, 0xa2bfe8a1u, 0xa81a664bu,
    0xc24b8b70u, 0xc76c51a3u, 0xd192e819u, 0xd6990624u, 0xf40e3585u, 0x106aa070u, 0x19a4c116u,
    0x1e376c08u, 0x2748774cu, 0x34b0bcb5u, 0x391c0cb3u, 0x4ed8aa4au, 0x5b9cca4fu, 0x682e6ff3u,
    0x748f82eeu, 0x78a5636fu, 0x84c87814u, 0x8cc70208u, 0x90befffau, 0xa4506cebu, 0xbef9a3f7u,
    0xc67178f2u};

inline std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

}  // namespace

void Sha256::reset() {
  std::memcpy(h_, kInit, sizeof h_);
  total_ = 0;
  buflen_ = 0;
}

void Sha256::block(const unsigned char* p) {
  std::uint32_t w[64];
  for (int i = 0; i < 16; ++i)
    w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
           (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
  for (int i = 16; i < 64; ++i) {
    const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
    const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
    w[i] = w[i - 16] + s0 + w[i - 7] + s1;
  }
  std::uint32_t a = h_[0], b = h_[1], c = h_[2], d = h_[3];
  std::uint32_t e = h_[4], f = h_[5], g = h_[6], h = h_[7];
  for (int i = 0; i < 64; ++i) {
    const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
    const std::uint32_t ch = (e & f) ^ (~e & g);
    const std::uint32_t t1 = h + s1 + ch + kRound[i] + w[i];
    const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
    const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
    const std::uint32_t t2 = s0 + maj;
    h = g;
    g = f;
    f = e;
    e = d + t1;
    d = c;
    c = b;
    b = a;
    a = t1 + t2;
  }
  h_[0] += a;
  h_[1] += b;
  h_[2] += c;
  h_[3] += d;
  h_[4] += e;
  h_[5] += f;
  h_[6] += g;
  h_[7] += h;
}

void Sha256::update(const void* data, std::size_t n) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  total_ += n;
  if (buflen_ > 0) {
    const std::size_t take = std::min(n, sizeof buf_ - buflen_);
    std::memcpy(buf_ + buflen_, p, take);
    buflen_ += take;
    p += take;
    n -= take;
    if (buflen_ == sizeof buf_) {
      block(buf_);
      buflen_ = 0;
    }
  }
  while (n >= sizeof buf_) {
    block(p);
    p += sizeof buf_;
    n -= sizeof buf_;
  }
  if (n > 0) {
    std::memcpy(buf_, p, n);
    buflen_ = n;
  }
}

std::string Sha256::hex() const {
  Sha256 copy = *this;
  const std::uint64_t bits = copy.total_ * 8;
  const unsigned char one = 0x80;
  copy.update(&one, 1);
  const unsigned char zero = 0x00;
  while (copy.buflen_ != 56) copy.update(&zero, 1);
  unsigned char len[8];
  for (int i = 0; i < 8; ++i) len[i] = static_cast<unsigned char>(bits >> (56 - 8 * i));
  copy.update(len, 8);

  static const char* digits = "0123456789abcdef";
  std::string out(64, '0');
  for (int i = 0; i < 8; ++i)
    for (int b = 0; b < 4; ++b) {
      const unsigned byte = (copy.h_[i] >> (24 - 8 * b)) & 0xffu;
      out[8 * i + 2 * b] = digits[byte >> 4];
      out[8 * i + 2 * b + 1] = digits[byte & 0xf];
    }
  return out;
}

std::string sha256_hex(const void* data, std::size_t n) {
  Sha256 s;
  s.update(data, n);
  return s.hex();
}

std::string sha256_hex(const std::string& s) { return sha256_hex(s.data(), s.size()); }

std::string hash_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("hash_file: cannot open " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const std::string prefix = "blob " + std::to_string(bytes.size()) + '\0';
  Sha256 s;
  s.update(prefix.data(), prefix.size());
  s.update(bytes.data(), bytes.size());
  return s.hex();
}

void RunManifest::add_input(const std::string& path) {
  doc_["inputs"][path] = hash_file(path);
}

void RunManifest::add_output(const std::string& path) {
  doc_["outputs"][path] = hash_file(path);
}

std::string RunManifest::canonical_hash() const {
  nlohmann::json canon = doc_;
  canon.erase("duration_seconds");
  canon.erase("manifest_hash");
  return sha256_hex(canon.dump());
}

void RunManifest::write(const std::string& path) const {
  nlohmann::json out = doc_;
  out["manifest_hash"] = canonical_hash();
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("RunManifest::write: cannot open " + path);
  f << out.dump(2) << '\n';
  if (!f) throw std::runtime_error("RunManifest::write: write failed for " + path);
}

}  // namespace sinr
