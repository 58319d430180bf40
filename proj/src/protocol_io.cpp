#include "mjcons/protocol_io.hpp"

#include "mjcons/matrix_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace mjcons::io {

namespace {

void put_matrix(std::ostream& out, const char* name, const Eigen::MatrixXd& m) {
  out << "matrix " << name << " " << m.rows() << " " << m.cols() << "\n" << format_matrix(m);
}

struct Document {
  std::map<std::string, double> scalars;
  std::map<std::string, std::string> strings;
  std::map<std::string, Eigen::MatrixXd> matrices;

  double scalar(const std::string& key) const {
    auto it = scalars.find(key);
    if (it == scalars.end()) throw IoError("protocol file is missing '" + key + "'");
    return it->second;
  }
  const Eigen::MatrixXd& matrix(const std::string& key) const {
    auto it = matrices.find(key);
    if (it == matrices.end()) throw IoError("protocol file is missing matrix '" + key + "'");
    return it->second;
  }
};

Document parse_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open protocol file: " + path);
  Document doc;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "matrix") {
      std::string name;
      Eigen::Index rows = 0, cols = 0;
      if (!(ls >> name >> rows >> cols) || rows < 1 || cols < 1)
        throw IoError(path + ":" + std::to_string(lineno) + ": bad matrix header");
      Eigen::MatrixXd m(rows, cols);
      for (Eigen::Index i = 0; i < rows; ++i) {
        if (!std::getline(in, line))
          throw IoError(path + ": truncated matrix '" + name + "'");
        ++lineno;
        std::istringstream rs(line);
        for (Eigen::Index j = 0; j < cols; ++j)
          if (!(rs >> m(i, j)))
            throw IoError(path + ":" + std::to_string(lineno) + ": bad matrix row");
      }
      doc.matrices[name] = std::move(m);
    } else {
      std::string eq, value;
      if (!(ls >> eq >> value) || eq != "=")
        throw IoError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
      try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used == value.size()) {
          doc.scalars[head] = v;
          continue;
        }
      } catch (const std::exception&) {
      }
      doc.strings[head] = value;
    }
  }
  return doc;
}

}  // namespace

void save_protocol(const std::string& path, const ProtocolVariant& proto) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  if (std::holds_alternative<synth::FullOrderProtocol>(proto)) {
    const auto& p = std::get<synth::FullOrderProtocol>(proto);
    out << "kind = full\n";
    out << "gamma = " << format_double(p.gamma) << "\n";
    out << "rho = " << format_double(p.rho) << "\n";
    out << "tau = " << format_double(p.tau) << "\n";
    out << "r1 = " << format_double(p.r1) << "\n";
    out << "r2 = " << format_double(p.r2) << "\n";
    put_matrix(out, "K", p.k_gain);
    put_matrix(out, "L", p.l_gain);
    put_matrix(out, "P1", p.p1);
    put_matrix(out, "P2", p.p2);
    put_matrix(out, "Y", p.y);
  } else {
    const auto& p = std::get<synth::ReducedOrderProtocol>(proto);
    out << "kind = reduced\n";
    out << "gamma = " << format_double(p.gamma) << "\n";
    out << "rho = " << format_double(p.rho) << "\n";
    out << "tau = " << format_double(p.tau) << "\n";
    out << "r1 = " << format_double(p.r1) << "\n";
    out << "r2 = " << format_double(p.r2) << "\n";
    put_matrix(out, "F", p.f_bar);
    put_matrix(out, "G", p.g_gain);
    put_matrix(out, "T", p.t_map);
    put_matrix(out, "Q1", p.q1_map);
    put_matrix(out, "Q2", p.q2_map);
    put_matrix(out, "K", p.k_gain);
    put_matrix(out, "P1", p.p1);
    put_matrix(out, "P2", p.p2);
  }
  if (!out) throw IoError("write failed: " + path);
}

ProtocolVariant load_protocol(const std::string& path) {
  const Document doc = parse_document(path);
  const auto kind = doc.strings.find("kind");
  if (kind == doc.strings.end()) throw IoError(path + ": missing 'kind = full|reduced'");
  if (kind->second == "full") {
    synth::FullOrderProtocol p;
    p.gamma = doc.scalar("gamma");
    p.rho = doc.scalar("rho");
    p.tau = doc.scalar("tau");
    p.r1 = doc.scalar("r1");
    p.r2 = doc.scalar("r2");
    p.k_gain = doc.matrix("K");
    p.l_gain = doc.matrix("L");
    p.p1 = doc.matrix("P1");
    p.p2 = doc.matrix("P2");
    p.y = doc.matrix("Y");
    return p;
  }
  if (kind->second == "reduced") {
    synth::ReducedOrderProtocol p;
    p.gamma = doc.scalar("gamma");
    p.rho = doc.scalar("rho");
    p.tau = doc.scalar("tau");
    p.r1 = doc.scalar("r1");
    p.r2 = doc.scalar("r2");
    p.f_bar = doc.matrix("F");
    p.g_gain = doc.matrix("G");
    p.t_map = doc.matrix("T");
    p.q1_map = doc.matrix("Q1");
    p.q2_map = doc.matrix("Q2");
    p.k_gain = doc.matrix("K");
    p.p1 = doc.matrix("P1");
    p.p2 = doc.matrix("P2");
    return p;
  }
  throw IoError(path + ": unknown protocol kind '" + kind->second + "'");
}

}  // namespace mjcons::io
