#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "json.hpp"

namespace sinr {

// Streaming SHA-256 (FIPS 180-4).
class Sha256 {
 public:
  Sha256() { reset(); }
  void reset();
  void update(const void* data, std::size_t n);
  // Hex digest; finalizes a copy, so update() may continue afterwards.
  std::string hex() const;

 private:
  void block(const unsigned char* p);

  std::uint32_t h_[8];
  std::uint64_t total_ = 0;
  unsigned char buf_[64];
  std::size_t buflen_ = 0;
};

std::string sha256_hex(const void* data, std::size_t n);
std::string sha256_hex(const std::string& s);

// Content address of a file: sha256 over "blob <size>\0" followed by the
// bytes, so the hash commits to both length and content.
std::string hash_file(const std::string& path);

// Run record written next to every command's outputs. Holds the resolved
// config, input/output content hashes, and final metrics. manifest_hash
// covers a canonical dump that drops wall-clock fields, so identical reruns
// produce identical hashes while the file still records timing.
class RunManifest {
 public:
  nlohmann::json& root() { return doc_; }
  const nlohmann::json& root() const { return doc_; }

  void add_input(const std::string& path);
  void add_output(const std::string& path);

  std::string canonical_hash() const;
  // Writes the JSON with a "manifest_hash" field filled in.
  void write(const std::string& path) const;

 private:
  nlohmann::json doc_ = nlohmann::json::object();
};

}  // namespace sinr
