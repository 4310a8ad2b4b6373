#pragma once

#include <istream>
#include <optional>
#include <stdexcept>
#include <string>

#include "sarc/problem.hpp"

namespace sarc {

class LibsvmError : public std::runtime_error {
 public:
  LibsvmError(std::size_t line, std::size_t column, const std::string& what);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct LibsvmOptions {
  // Feature dimension; inferred as the largest index when unset.
  std::optional<Index> dim;
  // Map labels to {-1, +1}: 1 -> +1 and {-1, 0, 2} -> -1. Other labels are rejected.
  bool binary_labels = true;
};

// Lines of the form "label idx:val idx:val ..." with 1-based indices. Blank
// lines and '#' comments are skipped. Indices may come in any order but must
// not repeat within a line.
Dataset parse_libsvm(std::istream& in, const LibsvmOptions& options = {});
Dataset parse_libsvm_file(const std::string& path, const LibsvmOptions& options = {});

}  // namespace sarc
