#include "almostcomm/matrix_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace almostcomm::io {

namespace {

json entries_to_json(const CMatrix& m) {
  json entries = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      entries.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    }
  }
  return entries;
}

double finite_number(const json& v) {
  if (!v.is_number()) throw InvalidInput("expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw InvalidInput("non-finite matrix entry");
  return x;
}

CMatrix entries_from_json(const json& entries, Eigen::Index rows, Eigen::Index cols) {
  if (!entries.is_array() || static_cast<Eigen::Index>(entries.size()) != rows * cols) {
    throw InvalidInput("entries must be an array of length rows * cols");
  }
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = complex_from_json(entries[static_cast<std::size_t>(i * cols + j)]);
    }
  }
  return m;
}

int positive_int(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    throw InvalidInput(std::string("missing integer field '") + key + "'");
  }
  const auto v = j.at(key).get<long long>();
  if (v < 1 || v > 4096) throw InvalidInput(std::string("field '") + key + "' out of range");
  return static_cast<int>(v);
}

}  // namespace

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw InvalidInput("complex value must be [re, im]");
  return {finite_number(j[0]), finite_number(j[1])};
}

json matrix_to_json(const CMatrix& m) {
  linalg::require_valid(m);
  return json{{"dim", m.rows()}, {"entries", entries_to_json(m)}};
}

CMatrix matrix_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("matrix must be a JSON object");
  const int d = positive_int(j, "dim");
  if (!j.contains("entries")) throw InvalidInput("matrix is missing 'entries'");
  return entries_from_json(j.at("entries"), d, d);
}

json isometry_to_json(const Isometry& v) {
  return json{{"ambient_dim", v.ambient_dim()},
              {"sub_dim", v.sub_dim()},
              {"columns", entries_to_json(v.columns())}};
}

Isometry isometry_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("isometry must be a JSON object");
  const int d = positive_int(j, "ambient_dim");
  const int k = positive_int(j, "sub_dim");
  if (!j.contains("columns")) throw InvalidInput("isometry is missing 'columns'");
  return Isometry(entries_from_json(j.at("columns"), d, k));
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInput("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + tmp.string());
    out << contents;
    if (!out) throw InvalidInput("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace almostcomm::io
