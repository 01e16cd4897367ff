#pragma once

#include <filesystem>
#include <iosfwd>

#include "dms/lattice.hpp"

namespace dms {

// Text format: one line per site, "index real imag", values printed with
// 17 significant digits so that reading back is bit-exact.
void write_field_text(std::ostream& out, const LatticeField& f);
LatticeField read_field_text(std::istream& in);

// Binary format: int64 M, uint64 length (= 2M+1), then length pairs of
// little-endian IEEE doubles (real, imag).
void write_field_binary(std::ostream& out, const LatticeField& f);
LatticeField read_field_binary(std::istream& in);

/// Dispatches on the extension: ".bin" is binary, anything else is text.
void save_field(const std::filesystem::path& path, const LatticeField& f);
LatticeField load_field(const std::filesystem::path& path);

}  // namespace dms
