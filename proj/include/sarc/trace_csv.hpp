#pragma once

#include <iosfwd>
#include <string>

#include "sarc/solver.hpp"

namespace sarc {

inline constexpr const char* kTraceHeader = "iter,epochs,f,grad_norm,sigma,eps_i,sample_size,success,phase";

// Doubles are written with 17 significant digits so that reading the file
// back reproduces every value bit for bit.
void write_trace_csv(std::ostream& out, const Trace& trace);
std::string trace_to_csv(const Trace& trace);
void write_trace_csv_file(const std::string& path, const Trace& trace);

// Parses the columns written above; in-memory-only fields stay default.
Trace read_trace_csv(std::istream& in);

}  // namespace sarc
