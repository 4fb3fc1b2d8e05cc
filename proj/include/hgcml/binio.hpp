#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "hgcml/matrix.hpp"

namespace hgcml {

// Little-endian primitives, independent of host byte order.
void write_u16_le(std::ostream& out, std::uint16_t v);
void write_u32_le(std::ostream& out, std::uint32_t v);
void write_f32_le(std::ostream& out, float v);
void write_f64_le(std::ostream& out, double v);
std::uint16_t read_u16_le(std::istream& in);
std::uint32_t read_u32_le(std::istream& in);
float read_f32_le(std::istream& in);
double read_f64_le(std::istream& in);

/// "HGF1" | rows u32 | cols u32 | rows*cols f32, row-major.
void write_hgf1(const std::filesystem::path& path, const Matrix& m);
Matrix read_hgf1(const std::filesystem::path& path);
bool has_hgf1_magic(const std::filesystem::path& path);

/// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

}  // namespace hgcml
