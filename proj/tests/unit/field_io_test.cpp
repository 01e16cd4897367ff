#include <filesystem>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "dms/field_io.hpp"
#include "dms/random_field.hpp"

namespace dms {
namespace {

LatticeField awkward_field() {
  Rng rng(3);
  auto f = random_field(rng, 7);
  f.at(-7) = Complex{std::numeric_limits<double>::denorm_min(), -0.0};
  f.at(7) = Complex{1e308, 0.1};
  return f;
}

TEST(FieldIo, TextRoundTripIsBitExact) {
  const auto f = awkward_field();
  std::stringstream s;
  write_field_text(s, f);
  EXPECT_EQ(read_field_text(s), f);
}

TEST(FieldIo, BinaryRoundTripIsBitExact) {
  const auto f = awkward_field();
  std::stringstream s(std::ios::in | std::ios::out | std::ios::binary);
  write_field_binary(s, f);
  EXPECT_EQ(read_field_binary(s), f);
}

TEST(FieldIo, FilesDispatchOnExtension) {
  const auto dir = std::filesystem::temp_directory_path() / "dms_field_io_test";
  std::filesystem::create_directories(dir);
  const auto f = awkward_field();
  save_field(dir / "f.txt", f);
  save_field(dir / "f.bin", f);
  EXPECT_EQ(load_field(dir / "f.txt"), f);
  EXPECT_EQ(load_field(dir / "f.bin"), f);
  std::filesystem::remove_all(dir);
}

TEST(FieldIo, RejectsMalformedText) {
  std::stringstream even("-1 0 0\n0 0 0\n");
  EXPECT_ANY_THROW(read_field_text(even));
  std::stringstream junk("0 1 x\n");
  EXPECT_ANY_THROW(read_field_text(junk));
}

}  // namespace
}  // namespace dms
