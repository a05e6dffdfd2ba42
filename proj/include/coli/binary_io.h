#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coli {

// Little-endian encoder for model artifacts.
class BinaryWriter {
 public:
  void magic(std::string_view m) { buf_.append(m); }
  void u8(uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(uint32_t v);
  void u64(uint64_t v);
  void f32(float v);
  void f64(double v);
  void str(std::string_view s);
  void f32s(std::span<const float> v);
  void f64s(std::span<const double> v);

  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

// Bounds-checked decoder; every read past the end throws FormatError.
class BinaryReader {
 public:
  explicit BinaryReader(std::string_view data) : data_(data) {}

  void expect_magic(std::string_view m);
  uint8_t u8();
  uint32_t u32();
  uint64_t u64();
  float f32();
  double f64();
  std::string str();
  void f32s(std::span<float> out);
  void f64s(std::span<double> out);

  bool at_end() const { return pos_ == data_.size(); }
  void expect_end() const;

 private:
  std::string_view take(size_t n);

  std::string_view data_;
  size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace coli
