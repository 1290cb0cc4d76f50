#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "semshift/embedding_store.hpp"
#include "semshift/error.hpp"

namespace semshift::testing {

// Per-test scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

// Gaussian entries, words "t0".."t{n-1}", frequencies n..1.
EmbeddingSpace random_space(std::size_t words, std::size_t dim, std::uint64_t seed, std::string label = "rand");

// Haar-ish random orthogonal matrix from the QR factorization of a Gaussian
// matrix, column signs fixed by diag(R) > 0.
Matrix random_orthogonal(std::size_t dim, std::uint64_t seed);

// Collects warnings emitted while alive.
class WarningCapture {
 public:
  WarningCapture();
  ~WarningCapture();
  const std::vector<std::string>& messages() const { return messages_; }
  bool contains(std::string_view needle) const;

 private:
  std::vector<std::string> messages_;
  WarningHandler previous_;
};

}  // namespace semshift::testing
