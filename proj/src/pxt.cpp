#include "pxa/pxt.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>

#include "pxa/error.hpp"

namespace pxa {
namespace {

constexpr char kMagic[4] = {'P', 'X', 'T', '1'};
constexpr std::size_t kFixedHeader = 8;

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return v;
}

std::size_t checked_count(const std::vector<std::uint64_t>& dims, std::size_t elem) {
  std::uint64_t count = 1;
  for (std::uint64_t d : dims) {
    if (d != 0 && count > std::numeric_limits<std::uint64_t>::max() / d) {
      throw_invalid("PXT dimensions overflow");
    }
    count *= d;
  }
  if (count > std::numeric_limits<std::size_t>::max() / elem) throw_invalid("PXT dimensions overflow");
  return static_cast<std::size_t>(count);
}

}  // namespace

std::size_t element_size(DType dtype) {
  switch (dtype) {
    case DType::f32: return 4;
    case DType::u8: return 1;
  }
  throw_invalid("unknown PXT dtype");
}

std::size_t Tensor::element_count() const { return checked_count(dims, element_size(dtype)); }

Tensor Tensor::zeros(DType dtype, std::vector<std::uint64_t> dims) {
  Tensor t{dtype, std::move(dims), {}};
  t.payload.assign(t.element_count() * element_size(dtype), 0);
  return t;
}

Tensor Tensor::from_f32(std::vector<std::uint64_t> dims, const std::vector<float>& values) {
  Tensor t = zeros(DType::f32, std::move(dims));
  if (values.size() != t.element_count()) throw_invalid("tensor value count does not match dims");
  for (std::size_t i = 0; i < values.size(); ++i) t.set_f32(i, values[i]);
  return t;
}

Tensor Tensor::from_u8(std::vector<std::uint64_t> dims, std::vector<std::uint8_t> values) {
  Tensor t{DType::u8, std::move(dims), std::move(values)};
  if (t.payload.size() != t.element_count()) throw_invalid("tensor value count does not match dims");
  return t;
}

float Tensor::f32(std::size_t i) const {
  const std::uint8_t* p = payload.data() + 4 * i;
  const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                             (static_cast<std::uint32_t>(p[1]) << 8) |
                             (static_cast<std::uint32_t>(p[2]) << 16) |
                             (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

void Tensor::set_f32(std::size_t i, float value) {
  const auto bits = std::bit_cast<std::uint32_t>(value);
  std::uint8_t* p = payload.data() + 4 * i;
  for (int b = 0; b < 4; ++b) p[b] = static_cast<std::uint8_t>(bits >> (8 * b));
}

std::vector<float> Tensor::to_f32() const {
  if (dtype != DType::f32) throw_invalid("expected a float32 tensor");
  std::vector<float> out(element_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f32(i);
  return out;
}

std::vector<std::uint8_t> encode_pxt(const Tensor& t) {
  if (t.dims.size() > 255) throw_invalid("PXT supports at most 255 dimensions");
  if (t.payload.size() != t.element_count() * element_size(t.dtype)) {
    throw_invalid("tensor payload does not match its dims");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kFixedHeader + 8 * t.dims.size() + t.payload.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(static_cast<std::uint8_t>(t.dtype));
  out.push_back(static_cast<std::uint8_t>(t.dims.size()));
  out.push_back(0);
  out.push_back(0);
  for (std::uint64_t d : t.dims) put_u64(out, d);
  out.insert(out.end(), t.payload.begin(), t.payload.end());
  return out;
}

Tensor decode_pxt(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kFixedHeader) throw_invalid("PXT file truncated in header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw_invalid("not a PXT file (bad magic)");
  const std::uint8_t code = bytes[4];
  if (code != static_cast<std::uint8_t>(DType::f32) && code != static_cast<std::uint8_t>(DType::u8)) {
    throw_invalid("PXT file has unknown dtype code " + std::to_string(code));
  }
  if (bytes[6] != 0 || bytes[7] != 0) throw_invalid("PXT reserved bytes must be zero");
  Tensor t;
  t.dtype = static_cast<DType>(code);
  const std::size_t ndim = bytes[5];
  if (bytes.size() < kFixedHeader + 8 * ndim) throw_invalid("PXT file truncated in dims");
  for (std::size_t d = 0; d < ndim; ++d) t.dims.push_back(get_u64(bytes.data() + kFixedHeader + 8 * d));
  const std::size_t offset = kFixedHeader + 8 * ndim;
  const std::size_t expected = checked_count(t.dims, element_size(t.dtype)) * element_size(t.dtype);
  if (bytes.size() - offset < expected) throw_invalid("PXT file truncated in payload");
  if (bytes.size() - offset > expected) throw_invalid("PXT file has trailing bytes");
  t.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset), bytes.end());
  return t;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_invalid("cannot open '" + path + "' for reading");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_atomic(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  const std::string tmp = path + ".tmp-pxa";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw_invalid("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw_invalid("failed writing '" + path + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw_invalid("cannot move output into place at '" + path + "': " + ec.message());
  }
}

void write_text_atomic(const std::string& path, const std::string& text) {
  write_file_atomic(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

Tensor read_pxt(const std::string& path) {
  try {
    return decode_pxt(read_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

void write_pxt(const std::string& path, const Tensor& t) { write_file_atomic(path, encode_pxt(t)); }

}  // namespace pxa
