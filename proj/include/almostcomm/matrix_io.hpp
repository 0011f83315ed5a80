#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "almostcomm/linalg.hpp"

namespace almostcomm::io {

using json = nlohmann::json;

/// {"dim": d, "entries": [[re, im], ...]} in row-major order. Doubles are
/// written in shortest round-trip form, so load(dump(m)) is bit-exact.
[[nodiscard]] json matrix_to_json(const CMatrix& m);
/// Throws InvalidInput on a malformed object or non-finite entries.
[[nodiscard]] CMatrix matrix_from_json(const json& j);

/// {"ambient_dim": d, "sub_dim": k, "columns": [[re, im], ...]} row-major d x k.
[[nodiscard]] json isometry_to_json(const Isometry& v);
[[nodiscard]] Isometry isometry_from_json(const json& j);

[[nodiscard]] json complex_to_json(Complex z);
[[nodiscard]] Complex complex_from_json(const json& j);

/// Parse a file; InvalidInput on I/O or syntax errors.
[[nodiscard]] json read_json_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace almostcomm::io
