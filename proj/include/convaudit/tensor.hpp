#pragma once

// Inference output tensors and the TensorDump binary format:
//
//   "TDMP" | u16 version = 1 | u8 dtype | u8 rank | rank x u64 dims | elements
//
// All integers and elements little-endian, elements row-major, no padding
// and no trailer.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "convaudit/error.hpp"

namespace convaudit {

enum class DType : std::uint8_t { F32 = 1, F64 = 2, I64 = 3 };

constexpr std::string_view to_string(DType d) {
  switch (d) {
    case DType::F32: return "f32";
    case DType::F64: return "f64";
    case DType::I64: return "i64";
  }
  return "?";
}

constexpr std::size_t element_size(DType d) { return d == DType::F32 ? 4 : 8; }

using Shape = std::vector<std::uint64_t>;

class Tensor {
 public:
  using Storage = std::variant<std::vector<float>, std::vector<double>, std::vector<std::int64_t>>;

  Tensor(Shape shape, std::vector<float> data) : Tensor(std::move(shape), Storage(std::move(data))) {}
  Tensor(Shape shape, std::vector<double> data) : Tensor(std::move(shape), Storage(std::move(data))) {}
  Tensor(Shape shape, std::vector<std::int64_t> data)
      : Tensor(std::move(shape), Storage(std::move(data))) {}

  DType dtype() const noexcept {
    switch (data_.index()) {
      case 0: return DType::F32;
      case 1: return DType::F64;
      default: return DType::I64;
    }
  }
  const Shape& shape() const noexcept { return shape_; }
  const Storage& storage() const noexcept { return data_; }

  std::size_t size() const noexcept {
    return std::visit([](const auto& v) { return v.size(); }, data_);
  }

  // Element widened to f64; comparisons never depend on the stored dtype.
  double at(std::size_t i) const {
    return std::visit([i](const auto& v) { return static_cast<double>(v[i]); }, data_);
  }

  // Bitwise equality of dtype, shape and every element (NaN payloads included).
  friend bool bit_identical(const Tensor& a, const Tensor& b) {
    if (a.dtype() != b.dtype() || a.shape_ != b.shape_ || a.size() != b.size()) return false;
    return std::visit(
        [&](const auto& va) {
          using V = std::decay_t<decltype(va)>;
          const auto& vb = std::get<V>(b.data_);
          return va.empty() ||
                 std::memcmp(va.data(), vb.data(), va.size() * sizeof(typename V::value_type)) == 0;
        },
        a.data_);
  }

  static std::uint64_t element_count(std::span<const std::uint64_t> shape) {
    std::uint64_t n = 1;
    for (auto d : shape) {
      if (d != 0 && n > std::numeric_limits<std::uint64_t>::max() / d) {
        throw AuditError(ErrorKind::MalformedInput, "shape", "element count overflows");
      }
      n *= d;
    }
    return n;
  }

 private:
  Tensor(Shape shape, Storage data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (element_count(shape_) != size()) {
      throw AuditError(ErrorKind::MalformedInput, "tensor",
                       "element count " + std::to_string(size()) + " does not match shape");
    }
  }

  Shape shape_;
  Storage data_;
};

namespace detail {

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::string_view in, std::size_t offset) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, in.data() + offset, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace detail

inline constexpr std::string_view kTensorDumpMagic = "TDMP";
inline constexpr std::uint16_t kTensorDumpVersion = 1;

inline std::string encode_tensor_dump(const Tensor& t) {
  std::string out;
  out.reserve(8 + 8 * t.shape().size() + element_size(t.dtype()) * t.size());
  out.append(kTensorDumpMagic);
  detail::put_le<std::uint16_t>(out, kTensorDumpVersion);
  out.push_back(static_cast<char>(t.dtype()));
  if (t.shape().size() > 255) throw AuditError(ErrorKind::MalformedInput, "shape", "rank exceeds 255");
  out.push_back(static_cast<char>(t.shape().size()));
  for (auto d : t.shape()) detail::put_le<std::uint64_t>(out, d);
  std::visit([&](const auto& v) { for (auto x : v) detail::put_le(out, x); }, t.storage());
  return out;
}

inline Tensor decode_tensor_dump(std::string_view bytes) {
  auto fail = [](const std::string& what) -> AuditError {
    return AuditError(ErrorKind::MalformedInput, "TensorDump", what);
  };
  if (bytes.size() < 8) throw fail("header truncated");
  if (bytes.substr(0, 4) != kTensorDumpMagic) throw fail("bad magic");
  auto version = detail::get_le<std::uint16_t>(bytes, 4);
  if (version != kTensorDumpVersion) throw fail("unsupported version " + std::to_string(version));
  auto code = static_cast<std::uint8_t>(bytes[6]);
  if (code < 1 || code > 3) throw fail("unknown dtype code " + std::to_string(code));
  auto dtype = static_cast<DType>(code);
  std::size_t rank = static_cast<std::uint8_t>(bytes[7]);
  std::size_t offset = 8;
  if (bytes.size() < offset + 8 * rank) throw fail("dims truncated");
  Shape shape(rank);
  for (std::size_t i = 0; i < rank; ++i, offset += 8) shape[i] = detail::get_le<std::uint64_t>(bytes, offset);

  std::uint64_t count = Tensor::element_count(shape);
  std::uint64_t payload = bytes.size() - offset;
  if (count > payload / element_size(dtype) || count * element_size(dtype) != payload) {
    throw fail("payload holds " + std::to_string(payload) + " bytes, shape needs " +
               std::to_string(count) + " elements");
  }

  auto read_all = [&]<typename T>(std::vector<T> v) {
    v.resize(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = detail::get_le<T>(bytes, offset + i * sizeof(T));
    return Tensor(std::move(shape), std::move(v));
  };
  switch (dtype) {
    case DType::F32: return read_all(std::vector<float>{});
    case DType::F64: return read_all(std::vector<double>{});
    case DType::I64: return read_all(std::vector<std::int64_t>{});
  }
  throw fail("unreachable");
}

inline Tensor load_tensor_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AuditError(ErrorKind::DumpUnreadable, path.string(), "cannot open");
  std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  try {
    return decode_tensor_dump(bytes);
  } catch (const AuditError& e) {
    throw AuditError(ErrorKind::DumpUnreadable, path.string(), e.what());
  }
}

inline void save_tensor_dump(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream out(path, std::ios::binary);
  auto bytes = encode_tensor_dump(t);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw AuditError(ErrorKind::MalformedInput, path.string(), "cannot write");
}

}  // namespace convaudit
