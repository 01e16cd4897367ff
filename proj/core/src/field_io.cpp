#include "dms/field_io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace dms {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary field format assumes a little-endian host");

template <class T>
void put(std::ostream& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.write(buf, sizeof(T));
}

template <class T>
T get(std::istream& in) {
  char buf[sizeof(T)];
  if (!in.read(buf, sizeof(T))) {
    throw std::runtime_error("truncated binary field");
  }
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

// std::from_chars keeps subnormals intact, unlike istream extraction.
bool parse_line(std::string_view line, long& site, double& re, double& im) {
  const char* p = line.data();
  const char* end = p + line.size();
  auto skip = [&] {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
  };
  skip();
  auto r1 = std::from_chars(p, end, site);
  if (r1.ec != std::errc{}) return false;
  p = r1.ptr;
  skip();
  auto r2 = std::from_chars(p, end, re);
  if (r2.ec != std::errc{}) return false;
  p = r2.ptr;
  skip();
  auto r3 = std::from_chars(p, end, im);
  if (r3.ec != std::errc{}) return false;
  p = r3.ptr;
  skip();
  return p == end;
}

}  // namespace

void write_field_text(std::ostream& out, const LatticeField& f) {
  for (long x = -f.radius(); x <= f.radius(); ++x) {
    out << fmt::format("{} {:.17g} {:.17g}\n", x, f[x].real(), f[x].imag());
  }
}

LatticeField read_field_text(std::istream& in) {
  std::vector<long> sites;
  std::vector<Complex> values;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    long site = 0;
    double re = 0.0, im = 0.0;
    if (!parse_line(line, site, re, im)) {
      throw std::runtime_error(
          fmt::format("field text line {}: expected 'index real imag'", lineno));
    }
    sites.push_back(site);
    values.emplace_back(re, im);
  }
  if (values.empty() || values.size() % 2 == 0) {
    throw std::runtime_error("field text: need an odd, nonzero number of sites");
  }
  const int radius = static_cast<int>(values.size() / 2);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i] != static_cast<long>(i) - radius) {
      throw std::runtime_error(
          fmt::format("field text: site {} out of order", sites[i]));
    }
  }
  return LatticeField(radius, std::move(values));
}

void write_field_binary(std::ostream& out, const LatticeField& f) {
  put<std::int64_t>(out, f.radius());
  put<std::uint64_t>(out, f.size());
  for (Complex z : f.values()) {
    put<double>(out, z.real());
    put<double>(out, z.imag());
  }
}

LatticeField read_field_binary(std::istream& in) {
  const auto radius = get<std::int64_t>(in);
  const auto length = get<std::uint64_t>(in);
  if (radius < 0 || length != static_cast<std::uint64_t>(2 * radius + 1)) {
    throw std::runtime_error("binary field: inconsistent header");
  }
  std::vector<Complex> values(length);
  for (auto& z : values) {
    const double re = get<double>(in);
    const double im = get<double>(in);
    z = {re, im};
  }
  return LatticeField(static_cast<int>(radius), std::move(values));
}

void save_field(const std::filesystem::path& path, const LatticeField& f) {
  const bool binary = path.extension() == ".bin";
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  if (binary) {
    write_field_binary(out, f);
  } else {
    write_field_text(out, f);
  }
}

LatticeField load_field(const std::filesystem::path& path) {
  const bool binary = path.extension() == ".bin";
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return binary ? read_field_binary(in) : read_field_text(in);
}

}  // namespace dms
