#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "ascert/types.hpp"

namespace ascert {

// Parsed problem file: the mpQP plus the affine start x0(theta) = F0 theta + G0
// and the initial working set (stored 0-based).
struct ProblemData {
  MpQP mp;
  Mat F0;
  Vec G0;
  WorkingSet w0;
  std::map<std::string, std::string> options;
};

ProblemData parse_problem(std::istream& is);
ProblemData load_problem(const std::string& path);
std::string serialize_problem(const ProblemData& pd);

// FNV-1a 64-bit hash of the canonical serialization, as 16 hex digits.
std::string problem_hash(const ProblemData& pd);

std::string serialize_partition(const Partition& part);
Partition parse_partition(std::istream& is);
Partition load_partition(const std::string& path);

void save_text(const std::string& path, const std::string& content);

}  // namespace ascert
