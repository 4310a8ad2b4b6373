#include "sarc/libsvm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <string_view>
#include <vector>

#include <Eigen/SparseCore>

namespace sarc {

LibsvmError::LibsvmError(std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error("libsvm line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

double parse_double(std::string_view tok, std::size_t line, std::size_t col, const char* what) {
  // from_chars rejects a leading '+', which LIBSVM labels use.
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
    throw LibsvmError(line, col, std::string("malformed ") + what + " '" + std::string(tok) + "'");
  return v;
}

double map_label(double raw, std::size_t line, std::size_t col) {
  if (raw == 1.0) return 1.0;
  if (raw == -1.0 || raw == 0.0 || raw == 2.0) return -1.0;
  throw LibsvmError(line, col, "label " + std::to_string(raw) + " is not binary");
}

}  // namespace

Dataset parse_libsvm(std::istream& in, const LibsvmOptions& options) {
  std::vector<Eigen::Triplet<double, int>> entries;
  std::vector<double> labels;
  std::vector<std::pair<long long, double>> row;
  long long max_index = 0;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    std::string_view s(text);
    if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    std::size_t pos = 0;
    auto next_token = [&](std::size_t& col) -> std::string_view {
      while (pos < s.size() && is_space(s[pos])) ++pos;
      const std::size_t begin = pos;
      while (pos < s.size() && !is_space(s[pos])) ++pos;
      col = begin + 1;
      return s.substr(begin, pos - begin);
    };
    std::size_t col = 0;
    std::string_view tok = next_token(col);
    if (tok.empty()) continue;
    double label = parse_double(tok, line_no, col, "label");
    if (options.binary_labels) label = map_label(label, line_no, col);

    row.clear();
    while (!(tok = next_token(col)).empty()) {
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos || colon == 0 || colon + 1 == tok.size())
        throw LibsvmError(line_no, col, "expected idx:val, got '" + std::string(tok) + "'");
      long long idx = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + colon, idx);
      if (ec != std::errc() || ptr != tok.data() + colon)
        throw LibsvmError(line_no, col, "malformed index '" + std::string(tok.substr(0, colon)) + "'");
      if (idx < 1) throw LibsvmError(line_no, col, "indices are 1-based, got " + std::to_string(idx));
      if (idx > std::numeric_limits<int>::max()) throw LibsvmError(line_no, col, "index too large");
      const double val = parse_double(tok.substr(colon + 1), line_no, col + colon + 1, "value");
      row.emplace_back(idx, val);
    }
    std::sort(row.begin(), row.end());
    for (std::size_t i = 1; i < row.size(); ++i)
      if (row[i].first == row[i - 1].first)
        throw LibsvmError(line_no, 1, "duplicate index " + std::to_string(row[i].first));
    const int r = static_cast<int>(labels.size());
    for (const auto& [idx, val] : row) {
      max_index = std::max(max_index, idx);
      if (val != 0.0) entries.emplace_back(r, static_cast<int>(idx - 1), val);
    }
    labels.push_back(label);
  }
  if (labels.empty()) throw LibsvmError(line_no, 0, "no data rows");

  Index d = static_cast<Index>(max_index);
  if (options.dim) {
    if (*options.dim < max_index)
      throw LibsvmError(line_no, 0,
                        "dimension override " + std::to_string(*options.dim) + " is below max index " +
                            std::to_string(max_index));
    d = *options.dim;
  }
  if (d < 1) d = 1;
  SparseRows rows(static_cast<Index>(labels.size()), d);
  rows.setFromTriplets(entries.begin(), entries.end());
  rows.makeCompressed();
  return Dataset(std::move(rows), Eigen::Map<const Vector>(labels.data(), static_cast<Index>(labels.size())));
}

Dataset parse_libsvm_file(const std::string& path, const LibsvmOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_libsvm(in, options);
}

}  // namespace sarc
