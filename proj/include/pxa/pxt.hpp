#pragma once

// PXT tensor container.
//
//   offset 0   magic "PXT1"
//   offset 4   dtype  u8   (1 = float32, 2 = uint8)
//   offset 5   ndim   u8
//   offset 6   2 reserved zero bytes
//   offset 8   ndim x u64 little-endian dims
//   then       payload, row-major (last dim fastest), little-endian
//
// The payload length must equal product(dims) * element size exactly.

#include <cstdint>
#include <string>
#include <vector>

namespace pxa {

enum class DType : std::uint8_t { f32 = 1, u8 = 2 };

std::size_t element_size(DType dtype);

struct Tensor {
  DType dtype = DType::f32;
  std::vector<std::uint64_t> dims;
  std::vector<std::uint8_t> payload;

  std::size_t element_count() const;

  static Tensor zeros(DType dtype, std::vector<std::uint64_t> dims);
  static Tensor from_f32(std::vector<std::uint64_t> dims, const std::vector<float>& values);
  static Tensor from_u8(std::vector<std::uint64_t> dims, std::vector<std::uint8_t> values);

  float f32(std::size_t i) const;
  void set_f32(std::size_t i, float value);
  std::uint8_t u8(std::size_t i) const { return payload[i]; }
  std::vector<float> to_f32() const;

  bool operator==(const Tensor&) const = default;
};

std::vector<std::uint8_t> encode_pxt(const Tensor& t);
// Throws invalid_input on bad magic, unknown dtype, non-zero reserved bytes,
// truncation or trailing bytes.
Tensor decode_pxt(const std::vector<std::uint8_t>& bytes);

Tensor read_pxt(const std::string& path);
void write_pxt(const std::string& path, const Tensor& t);

// Writes via a temporary sibling file and rename, so a failed write never
// leaves a partial output behind.
void write_file_atomic(const std::string& path, const std::vector<std::uint8_t>& bytes);
void write_text_atomic(const std::string& path, const std::string& text);
std::vector<std::uint8_t> read_file(const std::string& path);

}  // namespace pxa
