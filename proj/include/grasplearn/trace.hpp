#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "grasplearn/contact.hpp"

namespace grasplearn {

/// Shortest representation that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return std::string(buf, ptr);
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            const std::vector<std::string>& header)
      : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) {
      out_ << (i ? "," : "") << header[i];
    }
    out_ << "\n";
    columns_ = header.size();
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) {
      throw std::logic_error("csv row width mismatch");
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      out_ << (i ? "," : "") << cells[i];
    }
    out_ << "\n";
  }

  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
  std::size_t columns_ = 0;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    throw std::runtime_error("csv column not found: " + name);
  }

  double number(std::size_t row, int col) const {
    return std::stod(rows[row][static_cast<std::size_t>(col)]);
  }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Contact-set files: one record per line, '#' starts a comment. A record is
// either 7 numbers (position, inward normal, friction) or 10 numbers
// (position, inward normal, tangent1, friction). When tangent1 is given,
// tangent2 completes the frame as normal x tangent1.
// ---------------------------------------------------------------------------

struct ContactFileError : std::runtime_error {
  ContactFileError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_number(line) {}
  int line_number;
};

inline std::vector<Contact> parse_contact_set(std::istream& in) {
  std::vector<Contact> contacts;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ss(line);
    std::vector<double> values;
    double v;
    while (ss >> v) values.push_back(v);
    if (!ss.eof()) {
      throw ContactFileError(line_number, "malformed number");
    }
    if (values.empty()) continue;
    if (values.size() != 7 && values.size() != 10) {
      throw ContactFileError(
          line_number,
          "expected 7 or 10 numbers per contact, got " +
              std::to_string(values.size()));
    }
    const Eigen::Vector3d position(values[0], values[1], values[2]);
    const Eigen::Vector3d normal(values[3], values[4], values[5]);
    try {
      if (values.size() == 7) {
        contacts.push_back(make_contact(position, normal, values[6]));
      } else {
        Contact c;
        c.position = position;
        const double norm = normal.norm();
        if (!(norm > 0.0)) throw std::invalid_argument("zero normal");
        c.normal = normal / norm;
        Eigen::Vector3d t1(values[6], values[7], values[8]);
        const double t1_norm = t1.norm();
        if (!(t1_norm > 0.0)) throw std::invalid_argument("zero tangent");
        c.tangent1 = t1 / t1_norm;
        c.tangent2 = c.normal.cross(c.tangent1);
        c.friction_coeff = values[9];
        validate_contact(c);
        contacts.push_back(c);
      }
    } catch (const std::invalid_argument& e) {
      throw ContactFileError(line_number, e.what());
    }
  }
  return contacts;
}

inline std::vector<Contact> load_contact_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return parse_contact_set(in);
}

}  // namespace grasplearn
