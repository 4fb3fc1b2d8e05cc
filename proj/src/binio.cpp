#include "hgcml/binio.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "hgcml/error.hpp"

namespace hgcml {

namespace {

template <typename U>
void write_le(std::ostream& out, U v) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U read_le(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw Error(ErrorKind::MalformedRecord, "unexpected end of binary stream");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
  return v;
}

constexpr char kFeatureMagic[4] = {'H', 'G', 'F', '1'};

}  // namespace

void write_u16_le(std::ostream& out, std::uint16_t v) { write_le(out, v); }
void write_u32_le(std::ostream& out, std::uint32_t v) { write_le(out, v); }
void write_f32_le(std::ostream& out, float v) { write_le(out, std::bit_cast<std::uint32_t>(v)); }
void write_f64_le(std::ostream& out, double v) { write_le(out, std::bit_cast<std::uint64_t>(v)); }
std::uint16_t read_u16_le(std::istream& in) { return read_le<std::uint16_t>(in); }
std::uint32_t read_u32_le(std::istream& in) { return read_le<std::uint32_t>(in); }
float read_f32_le(std::istream& in) { return std::bit_cast<float>(read_le<std::uint32_t>(in)); }
double read_f64_le(std::istream& in) { return std::bit_cast<double>(read_le<std::uint64_t>(in)); }

void write_hgf1(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(kFeatureMagic, 4);
  write_u32_le(out, static_cast<std::uint32_t>(m.rows()));
  write_u32_le(out, static_cast<std::uint32_t>(m.cols()));
  for (double v : m.data()) write_f32_le(out, static_cast<float>(v));
  if (!out) throw Error(ErrorKind::Io, "short write to " + path.string());
}

bool has_hgf1_magic(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  return in && std::memcmp(magic, kFeatureMagic, 4) == 0;
}

Matrix read_hgf1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kFeatureMagic, 4) != 0)
    throw Error(ErrorKind::MalformedRecord, path.string() + ": missing HGF1 magic");
  const std::uint32_t rows = read_u32_le(in);
  const std::uint32_t cols = read_u32_le(in);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = read_f32_le(in);
  return m;
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

}  // namespace hgcml
