#include "almostcomm/algebra.hpp"
#include "almostcomm/matrix_io.hpp"

namespace almostcomm::io {

namespace {

int int_field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    throw InvalidInput(std::string("missing integer field '") + key + "'");
  }
  return j.at(key).get<int>();
}

bool flag_field(const json& flags, const char* key) {
  if (!flags.contains(key)) return false;
  if (!flags.at(key).is_boolean()) throw InvalidInput(std::string("flag '") + key + "' must be boolean");
  return flags.at(key).get<bool>();
}

}  // namespace

json family_to_json(const GeneratorFamily& f) {
  json items = json::array();
  for (std::size_t i = 0; i < f.size(); ++i) {
    items.push_back({{"a", f.labels()[i].a},
                     {"x", f.labels()[i].x},
                     {"matrix", matrix_to_json(f.matrices()[i])}});
  }
  return {{"d", f.dim()},
          {"flags",
           {{"selfadjoint", f.flags().selfadjoint},
            {"contractive", f.flags().contractive},
            {"povm", f.flags().povm}}},
          {"items", items}};
}

GeneratorFamily family_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("family must be a JSON object");
  const int d = int_field(j, "d");
  if (d < 1) throw InvalidInput("family dimension must be positive");
  FamilyFlags flags;
  if (j.contains("flags")) {
    const json& fl = j.at("flags");
    if (!fl.is_object()) throw InvalidInput("'flags' must be an object");
    flags.selfadjoint = flag_field(fl, "selfadjoint");
    flags.contractive = flag_field(fl, "contractive");
    flags.povm = flag_field(fl, "povm");
  }
  if (!j.contains("items") || !j.at("items").is_array()) {
    throw InvalidInput("family is missing the 'items' array");
  }
  std::vector<Label> labels;
  std::vector<CMatrix> mats;
  for (const auto& item : j.at("items")) {
    if (!item.is_object() || !item.contains("matrix")) throw InvalidInput("malformed family item");
    labels.push_back({int_field(item, "a"), int_field(item, "x")});
    mats.push_back(matrix_from_json(item.at("matrix")));
    if (mats.back().rows() != d) throw InvalidInput("family item dimension differs from 'd'");
  }
  return GeneratorFamily(std::move(labels), std::move(mats), flags);
}

json decomposition_to_json(const algebra::BlockDecomposition& dec) {
  json blocks = json::array();
  for (const auto& b : dec.blocks) {
    blocks.push_back({{"d_A", b.d_A},
                      {"d_B", b.d_B},
                      {"projector", matrix_to_json(b.projector)},
                      {"frame", isometry_to_json(b.frame)},
                      {"block_unitary", matrix_to_json(b.block_unitary)}});
  }
  return {{"dim", dec.dim},
          {"num_blocks", dec.num_blocks()},
          {"residual", dec.residual},
          {"blocks", blocks}};
}

algebra::BlockDecomposition decomposition_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("decomposition must be a JSON object");
  algebra::BlockDecomposition dec;
  dec.dim = int_field(j, "dim");
  if (j.contains("residual")) {
    if (!j.at("residual").is_number()) throw InvalidInput("'residual' must be a number");
    dec.residual = j.at("residual").get<double>();
  }
  if (!j.contains("blocks") || !j.at("blocks").is_array()) {
    throw InvalidInput("decomposition is missing the 'blocks' array");
  }
  int total = 0;
  for (const auto& b : j.at("blocks")) {
    if (!b.is_object()) throw InvalidInput("malformed block");
    algebra::Block blk{matrix_from_json(b.at("projector")), isometry_from_json(b.at("frame")),
                       matrix_from_json(b.at("block_unitary")), int_field(b, "d_A"),
                       int_field(b, "d_B")};
    const int rank = blk.frame.sub_dim();
    if (blk.d_A < 1 || blk.d_B < 1 || blk.d_A * blk.d_B != rank ||
        blk.block_unitary.rows() != rank || blk.projector.rows() != dec.dim ||
        blk.frame.ambient_dim() != dec.dim) {
      throw InvalidInput("inconsistent block dimensions");
    }
    total += rank;
    dec.blocks.push_back(std::move(blk));
  }
  if (total != dec.dim) throw InvalidInput("block ranks do not add up to 'dim'");
  return dec;
}

}  // namespace almostcomm::io
