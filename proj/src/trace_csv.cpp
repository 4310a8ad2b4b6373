#include "sarc/trace_csv.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace sarc {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_cell(const std::string& cell, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw std::runtime_error("trace line " + std::to_string(line) + ": bad cell '" + cell + "'");
  return v;
}

double parse_real(const std::string& cell, std::size_t line) {
  // strtod handles inf and nan spellings produced by %g.
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size())
    throw std::runtime_error("trace line " + std::to_string(line) + ": bad number '" + cell + "'");
  return v;
}

}  // namespace

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace) {
    out << r.iter << ',' << format_double(r.epochs) << ',' << format_double(r.f) << ','
        << format_double(r.grad_norm) << ',' << format_double(r.sigma) << ',' << format_double(r.eps_i) << ','
        << r.sample_size << ',' << (r.success ? 1 : 0) << ',' << r.phase << '\n';
  }
}

std::string trace_to_csv(const Trace& trace) {
  std::ostringstream out;
  write_trace_csv(out, trace);
  return out.str();
}

void write_trace_csv_file(const std::string& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_trace_csv(out, trace);
  if (!out) throw std::runtime_error("write failed for " + path);
}

Trace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw std::runtime_error("trace is missing its header");
  Trace trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 9) throw std::runtime_error("trace line " + std::to_string(line_no) + ": expected 9 columns");
    TraceRecord r;
    r.iter = parse_cell<Index>(cells[0], line_no);
    r.epochs = parse_real(cells[1], line_no);
    r.f = parse_real(cells[2], line_no);
    r.grad_norm = parse_real(cells[3], line_no);
    r.sigma = parse_real(cells[4], line_no);
    r.eps_i = parse_real(cells[5], line_no);
    r.sample_size = parse_cell<Index>(cells[6], line_no);
    r.success = parse_cell<int>(cells[7], line_no) != 0;
    r.phase = cells[8];
    trace.push_back(std::move(r));
  }
  return trace;
}

}  // namespace sarc
