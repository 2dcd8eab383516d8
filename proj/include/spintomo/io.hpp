#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spintomo/measurement.hpp"

namespace spintomo {

// Text formats, UTF-8, 17 significant decimal digits for floating point.

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

namespace detail {

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path + " for reading");
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

inline SpinValue parse_spin_header(std::istream& in, const std::string& path) {
  std::string word;
  int two_s = -1;
  if (!(in >> word) || word != "spin" || !(in >> two_s) || two_s < 0)
    throw IoError(path + ": expected header 'spin <two_s>'");
  return SpinValue(two_s);
}

}  // namespace detail

// --- state files -----------------------------------------------------------
// Header `spin <two_s>`, then one line per m descending:
// `<2m>/2 <Re> <Im>`.

inline void write_state(const PureState& psi, const std::string& path) {
  auto out = detail::open_output(path);
  out << "spin " << psi.spin.two_s() << "\n";
  for (int i = 0; i < psi.spin.dimension(); ++i) {
    int numerator = psi.spin.two_s() - 2 * i;  // = 2m
    out << numerator << "/2 " << format_double(psi.amplitudes[i].real()) << " "
        << format_double(psi.amplitudes[i].imag()) << "\n";
  }
}

inline PureState read_state(const std::string& path) {
  auto in = detail::open_input(path);
  SpinValue spin = detail::parse_spin_header(in, path);
  CVector a(spin.dimension());
  for (int i = 0; i < spin.dimension(); ++i) {
    std::string m_token;
    double re, im;
    if (!(in >> m_token >> re >> im))
      throw IoError(path + ": truncated state file");
    int numerator = 0;
    if (std::sscanf(m_token.c_str(), "%d/2", &numerator) != 1 ||
        numerator != spin.two_s() - 2 * i)
      throw IoError(path + ": unexpected m label '" + m_token + "'");
    a[i] = Complex(re, im);
  }
  if (std::abs(a.squaredNorm() - 1.0) > 1e-12)
    throw IoError(path + ": state is not normalized");
  return PureState(spin, a);
}

// --- density files ---------------------------------------------------------
// Header `spin <two_s>`, then `row col Re Im` entries.

inline void write_density(const DensityMatrix& rho, const std::string& path) {
  auto out = detail::open_output(path);
  out << "spin " << rho.spin.two_s() << "\n";
  for (int r = 0; r < rho.spin.dimension(); ++r)
    for (int c = 0; c < rho.spin.dimension(); ++c)
      out << r << " " << c << " " << format_double(rho.matrix(r, c).real())
          << " " << format_double(rho.matrix(r, c).imag()) << "\n";
}

inline DensityMatrix read_density(const std::string& path) {
  auto in = detail::open_input(path);
  SpinValue spin = detail::parse_spin_header(in, path);
  int d = spin.dimension();
  CMatrix m = CMatrix::Zero(d, d);
  int r, c;
  double re, im;
  while (in >> r >> c >> re >> im) {
    if (r < 0 || r >= d || c < 0 || c >= d)
      throw IoError(path + ": density index out of range");
    m(r, c) = Complex(re, im);
  }
  DensityMatrix rho(spin, m);
  rho.validate();
  return rho;
}

// --- operator files --------------------------------------------------------
// Optional header `spin <two_s>`, then `row col Re Im` entries; without a
// header the dimension is inferred from the largest index.

inline void write_operator(const GenericOperator& op, const std::string& path) {
  auto out = detail::open_output(path);
  out << "spin " << op.spin.two_s() << "\n";
  for (int r = 0; r < op.spin.dimension(); ++r)
    for (int c = 0; c < op.spin.dimension(); ++c)
      out << r << " " << c << " " << format_double(op.matrix(r, c).real())
          << " " << format_double(op.matrix(r, c).imag()) << "\n";
}

inline GenericOperator read_operator(const std::string& path) {
  auto in = detail::open_input(path);
  struct Entry {
    int r, c;
    double re, im;
  };
  std::vector<Entry> entries;
  int two_s = -1;
  std::string first;
  if (in >> first) {
    if (first == "spin") {
      if (!(in >> two_s) || two_s < 0)
        throw IoError(path + ": bad spin header");
    } else {
      Entry e;
      e.r = std::stoi(first);
      if (!(in >> e.c >> e.re >> e.im))
        throw IoError(path + ": truncated operator file");
      entries.push_back(e);
    }
  } else {
    throw IoError(path + ": empty operator file");
  }
  Entry e;
  while (in >> e.r >> e.c >> e.re >> e.im) entries.push_back(e);
  int max_index = 0;
  for (const Entry& en : entries) {
    if (en.r < 0 || en.c < 0)
      throw IoError(path + ": negative operator index");
    max_index = std::max({max_index, en.r, en.c});
  }
  int d = two_s >= 0 ? two_s + 1 : max_index + 1;
  if (max_index >= d) throw IoError(path + ": operator index out of range");
  CMatrix m = CMatrix::Zero(d, d);
  for (const Entry& en : entries) m(en.r, en.c) = Complex(en.re, en.im);
  return GenericOperator(SpinValue(d - 1), m);
}

// --- quorum files ----------------------------------------------------------
// Header `axes <K>`, then one `theta phi` line per axis.

inline void write_quorum(const QuorumSpec& quorum, const std::string& path) {
  auto out = detail::open_output(path);
  out << "axes " << quorum.size() << "\n";
  for (const Axis& axis : quorum.axes)
    out << format_double(axis.theta) << " " << format_double(axis.phi) << "\n";
}

inline QuorumSpec read_quorum(const std::string& path) {
  auto in = detail::open_input(path);
  std::string word;
  int count = 0;
  if (!(in >> word) || word != "axes" || !(in >> count) || count < 1)
    throw IoError(path + ": expected header 'axes <K>'");
  std::vector<Axis> axes;
  for (int k = 0; k < count; ++k) {
    double theta, phi;
    if (!(in >> theta >> phi)) throw IoError(path + ": truncated quorum file");
    axes.emplace_back(theta, phi);
  }
  return explicit_quorum(std::move(axes));
}

// --- intensity tables ------------------------------------------------------
// Header `spin <two_s>`, `mode exact|sampled`, optional `shots <N> seed <S>`,
// a `# axes` comment block, then rows `k theta phi m value` where m is the
// outcome index counted from m = s downwards.

inline void write_table(const IntensityTable& table, const std::string& path) {
  auto out = detail::open_output(path);
  out << "spin " << table.spin.two_s() << "\n";
  out << "mode "
      << (table.provenance == Provenance::Exact ? "exact" : "sampled") << "\n";
  if (table.provenance == Provenance::Sampled)
    out << "shots " << table.shots << " seed " << table.seed << "\n";
  out << "# axes\n";
  for (std::size_t k = 0; k < table.axes.size(); ++k)
    out << "# " << k << " " << format_double(table.axes[k].theta) << " "
        << format_double(table.axes[k].phi) << "\n";
  int d = table.spin.dimension();
  for (int k = 0; k < table.axis_count(); ++k)
    for (int m = 0; m < d; ++m)
      out << k << " " << format_double(table.axes[k].theta) << " "
          << format_double(table.axes[k].phi) << " " << m << " "
          << format_double(table.probabilities(k, m)) << "\n";
}

inline IntensityTable read_table(const std::string& path) {
  auto in = detail::open_input(path);
  std::string line;
  SpinValue spin(0);
  bool have_spin = false;
  Provenance prov = Provenance::Exact;
  std::uint64_t shots = 0, seed = 0;
  struct Row {
    int k;
    double theta, phi;
    int m;
    double value;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string first;
    ls >> first;
    if (first == "spin") {
      int two_s;
      if (!(ls >> two_s) || two_s < 0) throw IoError(path + ": bad spin line");
      spin = SpinValue(two_s);
      have_spin = true;
    } else if (first == "mode") {
      std::string mode;
      ls >> mode;
      if (mode == "exact")
        prov = Provenance::Exact;
      else if (mode == "sampled")
        prov = Provenance::Sampled;
      else
        throw IoError(path + ": unknown mode '" + mode + "'");
    } else if (first == "shots") {
      std::string seed_word;
      if (!(ls >> shots >> seed_word >> seed) || seed_word != "seed")
        throw IoError(path + ": bad shots line");
    } else {
      Row row;
      std::istringstream rs(line);
      if (!(rs >> row.k >> row.theta >> row.phi >> row.m >> row.value))
        throw IoError(path + ": bad table row '" + line + "'");
      rows.push_back(row);
    }
  }
  if (!have_spin) throw IoError(path + ": missing spin header");
  int d = spin.dimension();
  int axis_count = 0;
  for (const Row& row : rows) axis_count = std::max(axis_count, row.k + 1);
  if (axis_count == 0) throw IoError(path + ": table has no rows");
  IntensityTable table(spin);
  table.provenance = prov;
  table.shots = shots;
  table.seed = seed;
  table.axes.assign(axis_count, Axis());
  table.probabilities = RMatrix::Constant(axis_count, d, -1.0);
  for (const Row& row : rows) {
    if (row.m < 0 || row.m >= d)
      throw IoError(path + ": outcome index out of range");
    table.axes[row.k] = Axis(row.theta, row.phi);
    table.probabilities(row.k, row.m) = row.value;
  }
  if ((table.probabilities.array() < 0).any())
    throw IoError(path + ": incomplete table (missing outcomes)");
  return table;
}

}  // namespace spintomo
