#ifndef DATAMARKET_CSV_HPP_
#define DATAMARKET_CSV_HPP_

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace datamkt::csv {

// Shortest round-trip-exact representation of a double: artifacts must
// reload bit-identically.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    // try shorter forms for readability
    for (int prec = 1; prec < 17; ++prec) {
      char b2[32];
      std::snprintf(b2, sizeof(b2), "%.*g", prec, v);
      std::sscanf(b2, "%lf", &back);
      if (back == v) return std::string(b2);
    }
  }
  return std::string(buf);
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
  int require_column(const std::string& name) const {
    int c = column(name);
    if (c < 0) throw std::runtime_error("csv: missing column '" + name + "'");
    return c;
  }
};

inline Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path);
  Table t;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("csv: empty file " + path);
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size())
      throw std::runtime_error("csv: ragged row in " + path);
    t.rows.push_back(std::move(cells));
  }
  return t;
}

inline double to_double(const std::string& s) {
  std::size_t pos = 0;
  double v = std::stod(s, &pos);
  if (pos != s.size())
    throw std::runtime_error("csv: bad numeric field '" + s + "'");
  return v;
}

inline long to_long(const std::string& s) {
  std::size_t pos = 0;
  long v = std::stol(s, &pos);
  if (pos != s.size())
    throw std::runtime_error("csv: bad integer field '" + s + "'");
  return v;
}

}  // namespace datamkt::csv

#endif  // DATAMARKET_CSV_HPP_
