#include "coli/binary_io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include "coli/error.h"

namespace coli {

static_assert(std::endian::native == std::endian::little, "artifact I/O assumes a little-endian host");

namespace {

template <typename T>
void append_raw(std::string& buf, T v) {
  char tmp[sizeof(T)];
  std::memcpy(tmp, &v, sizeof(T));
  buf.append(tmp, sizeof(T));
}

}  // namespace

void BinaryWriter::u32(uint32_t v) { append_raw(buf_, v); }
void BinaryWriter::u64(uint64_t v) { append_raw(buf_, v); }
void BinaryWriter::f32(float v) { append_raw(buf_, v); }
void BinaryWriter::f64(double v) { append_raw(buf_, v); }

void BinaryWriter::str(std::string_view s) {
  u32(static_cast<uint32_t>(s.size()));
  buf_.append(s);
}

void BinaryWriter::f32s(std::span<const float> v) {
  buf_.append(reinterpret_cast<const char*>(v.data()), v.size_bytes());
}

void BinaryWriter::f64s(std::span<const double> v) {
  buf_.append(reinterpret_cast<const char*>(v.data()), v.size_bytes());
}

std::string_view BinaryReader::take(size_t n) {
  if (n > data_.size() - pos_) {
    throw FormatError("unexpected end of data at offset " + std::to_string(pos_));
  }
  std::string_view out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

void BinaryReader::expect_magic(std::string_view m) {
  if (data_.size() - pos_ < m.size() || data_.substr(pos_, m.size()) != m) {
    throw FormatError("bad magic, expected '" + std::string(m) + "'");
  }
  pos_ += m.size();
}

uint8_t BinaryReader::u8() { return static_cast<uint8_t>(take(1)[0]); }

#define COLI_READ_RAW(T)              \
  T v;                                \
  std::memcpy(&v, take(sizeof(T)).data(), sizeof(T)); \
  return v

uint32_t BinaryReader::u32() { COLI_READ_RAW(uint32_t); }
uint64_t BinaryReader::u64() { COLI_READ_RAW(uint64_t); }
float BinaryReader::f32() { COLI_READ_RAW(float); }
double BinaryReader::f64() { COLI_READ_RAW(double); }

#undef COLI_READ_RAW

std::string BinaryReader::str() {
  const uint32_t n = u32();
  return std::string(take(n));
}

void BinaryReader::f32s(std::span<float> out) {
  std::memcpy(out.data(), take(out.size_bytes()).data(), out.size_bytes());
}

void BinaryReader::f64s(std::span<double> out) {
  std::memcpy(out.data(), take(out.size_bytes()).data(), out.size_bytes());
}

void BinaryReader::expect_end() const {
  if (!at_end()) {
    throw FormatError("trailing bytes after offset " + std::to_string(pos_));
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw IoError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

}  // namespace coli
