#pragma once

// Conversions between the library's Matrix and the oracle's nested vectors,
// plus small fixtures shared by several suites.

#include <filesystem>
#include <random>
#include <string>

#include "oracles.hpp"
#include "seqmtl/core/matrix.hpp"

namespace testing_support {

inline seqmtl::Matrix to_matrix(const oracle::Mat& m) {
  seqmtl::Matrix out(m.size(), m.empty() ? 0 : m[0].size());
  for (std::size_t r = 0; r < m.size(); ++r)
    for (std::size_t c = 0; c < m[r].size(); ++c) out(r, c) = m[r][c];
  return out;
}

inline seqmtl::Matrix to_row(const oracle::Vec& v) { return to_matrix(oracle::Mat{v}); }

inline oracle::Mat to_mat(const seqmtl::Matrix& m) {
  oracle::Mat out(m.rows(), oracle::Vec(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  return out;
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("seqmtl_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
