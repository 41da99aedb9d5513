#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "topoprune/error.hpp"
#include "topoprune/layer.hpp"
#include "topoprune/pruning.hpp"

namespace topoprune {

enum class NpyStatus {
  io_failure,
  bad_magic,
  bad_version,
  bad_header,
  unsupported_descr,
  unsupported_layout,
  bad_ndim,
  bad_size,
};

inline const char* to_string(NpyStatus s) {
  switch (s) {
    case NpyStatus::io_failure: return "io_failure";
    case NpyStatus::bad_magic: return "bad_magic";
    case NpyStatus::bad_version: return "bad_version";
    case NpyStatus::bad_header: return "bad_header";
    case NpyStatus::unsupported_descr: return "unsupported_descr";
    case NpyStatus::unsupported_layout: return "unsupported_layout";
    case NpyStatus::bad_ndim: return "bad_ndim";
    case NpyStatus::bad_size: return "bad_size";
  }
  return "?";
}

class NpyError : public ValidationError {
public:
  NpyError(NpyStatus status, const std::string& msg)
      : ValidationError(std::string("npy ") + to_string(status) + ": " + msg),
        status_(status) {}
  NpyStatus status() const { return status_; }

private:
  NpyStatus status_;
};

namespace npy_detail {

inline constexpr char kMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

struct Header {
  std::string descr;
  bool fortran_order = false;
  std::vector<std::size_t> shape;
};

// Minimal parser for the v1.0 header dict literal.
inline Header parse_header(const std::string& text) {
  Header h;
  auto find_value = [&](const std::string& key) -> std::size_t {
    const std::string quoted = "'" + key + "'";
    const std::size_t at = text.find(quoted);
    if (at == std::string::npos)
      throw NpyError(NpyStatus::bad_header, "missing key " + key);
    std::size_t colon = text.find(':', at + quoted.size());
    if (colon == std::string::npos)
      throw NpyError(NpyStatus::bad_header, "malformed entry for " + key);
    return colon + 1;
  };

  {
    std::size_t pos = find_value("descr");
    std::size_t open = text.find('\'', pos);
    std::size_t close = open == std::string::npos ? std::string::npos
                                                  : text.find('\'', open + 1);
    if (close == std::string::npos)
      throw NpyError(NpyStatus::bad_header, "unterminated descr string");
    h.descr = text.substr(open + 1, close - open - 1);
  }
  {
    std::size_t pos = find_value("fortran_order");
    while (pos < text.size() && text[pos] == ' ') ++pos;
    if (text.compare(pos, 4, "True") == 0)
      h.fortran_order = true;
    else if (text.compare(pos, 5, "False") == 0)
      h.fortran_order = false;
    else
      throw NpyError(NpyStatus::bad_header, "fortran_order is not a bool");
  }
  {
    std::size_t pos = find_value("shape");
    std::size_t open = text.find('(', pos);
    std::size_t close = open == std::string::npos ? std::string::npos
                                                  : text.find(')', open + 1);
    if (close == std::string::npos)
      throw NpyError(NpyStatus::bad_header, "malformed shape tuple");
    std::size_t i = open + 1;
    while (i < close) {
      while (i < close && (text[i] == ' ' || text[i] == ',')) ++i;
      if (i >= close) break;
      std::size_t value = 0;
      bool any = false;
      while (i < close && text[i] >= '0' && text[i] <= '9') {
        value = value * 10 + static_cast<std::size_t>(text[i] - '0');
        ++i;
        any = true;
      }
      if (!any)
        throw NpyError(NpyStatus::bad_header, "non-integer in shape tuple");
      h.shape.push_back(value);
    }
  }
  return h;
}

struct RawArray {
  Header header;
  std::vector<std::uint8_t> data;
};

inline RawArray read_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw NpyError(NpyStatus::io_failure, "cannot open " + path.string());
  char magic[6];
  if (!in.read(magic, 6) || std::memcmp(magic, kMagic, 6) != 0)
    throw NpyError(NpyStatus::bad_magic, path.string() + " is not an NPY file");
  unsigned char version[2];
  if (!in.read(reinterpret_cast<char*>(version), 2))
    throw NpyError(NpyStatus::io_failure, "truncated version field");
  if (version[0] != 1 || version[1] != 0)
    throw NpyError(NpyStatus::bad_version,
                   "unsupported NPY version " + std::to_string(version[0]) + "." +
                       std::to_string(version[1]) + " (only 1.0)");
  unsigned char len_bytes[2];
  if (!in.read(reinterpret_cast<char*>(len_bytes), 2))
    throw NpyError(NpyStatus::io_failure, "truncated header length");
  const std::size_t header_len =
      static_cast<std::size_t>(len_bytes[0]) |
      (static_cast<std::size_t>(len_bytes[1]) << 8);
  std::string header_text(header_len, '\0');
  if (!in.read(header_text.data(), static_cast<std::streamsize>(header_len)))
    throw NpyError(NpyStatus::io_failure, "truncated header");

  RawArray raw;
  raw.header = parse_header(header_text);
  raw.data.assign(std::istreambuf_iterator<char>(in),
                  std::istreambuf_iterator<char>());
  return raw;
}

inline void write_raw(const std::filesystem::path& path, const std::string& descr,
                      std::size_t rows, std::size_t cols, const void* data,
                      std::size_t bytes) {
  std::string dict = "{'descr': '" + descr + "', 'fortran_order': False, 'shape': (" +
                     std::to_string(rows) + ", " + std::to_string(cols) + "), }";
  // Pad so that magic + version + length field + header is 64-byte aligned.
  const std::size_t prefix = 6 + 2 + 2;
  std::size_t total = prefix + dict.size() + 1;
  const std::size_t padded = (total + 63) / 64 * 64;
  dict.append(padded - total, ' ');
  dict.push_back('\n');

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw NpyError(NpyStatus::io_failure, "cannot write " + path.string());
  out.write(kMagic, 6);
  const unsigned char version[2] = {1, 0};
  out.write(reinterpret_cast<const char*>(version), 2);
  const std::size_t header_len = dict.size();
  const unsigned char len_bytes[2] = {
      static_cast<unsigned char>(header_len & 0xFF),
      static_cast<unsigned char>((header_len >> 8) & 0xFF)};
  out.write(reinterpret_cast<const char*>(len_bytes), 2);
  out.write(dict.data(), static_cast<std::streamsize>(dict.size()));
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  if (!out)
    throw NpyError(NpyStatus::io_failure, "short write to " + path.string());
}

} // namespace npy_detail

/// Reads a 2-D little-endian float array (descr <f8 or <f4, C order) as
/// row-major doubles.
inline LayerWeights read_npy(const std::filesystem::path& path) {
  auto raw = npy_detail::read_raw(path);
  const auto& h = raw.header;
  if (h.fortran_order)
    throw NpyError(NpyStatus::unsupported_layout,
                   "fortran_order arrays are unsupported");
  if (h.shape.size() != 2)
    throw NpyError(NpyStatus::bad_ndim, "expected a 2-D array, got " +
                                            std::to_string(h.shape.size()) + "-D");
  const std::size_t count = h.shape[0] * h.shape[1];
  LayerWeights w(h.shape[0], h.shape[1]);
  if (h.descr == "<f8") {
    if (raw.data.size() != count * 8)
      throw NpyError(NpyStatus::bad_size, "payload size does not match shape");
    std::memcpy(w.values.data(), raw.data.data(), raw.data.size());
  } else if (h.descr == "<f4") {
    if (raw.data.size() != count * 4)
      throw NpyError(NpyStatus::bad_size, "payload size does not match shape");
    for (std::size_t i = 0; i < count; ++i) {
      float f;
      std::memcpy(&f, raw.data.data() + i * 4, 4);
      w.values[i] = static_cast<double>(f);
    }
  } else {
    throw NpyError(NpyStatus::unsupported_descr,
                   "descr '" + h.descr + "' (weights need <f8 or <f4)");
  }
  return w;
}

/// Writes row-major doubles as descr <f8.
inline void write_npy(const std::filesystem::path& path, const LayerWeights& w) {
  npy_detail::write_raw(path, "<f8", w.rows, w.cols, w.values.data(),
                        w.values.size() * 8);
}

/// Reads a 2-D unsigned-byte mask (descr |u1).
inline PruneMask read_mask_npy(const std::filesystem::path& path) {
  auto raw = npy_detail::read_raw(path);
  const auto& h = raw.header;
  if (h.fortran_order)
    throw NpyError(NpyStatus::unsupported_layout,
                   "fortran_order arrays are unsupported");
  if (h.shape.size() != 2)
    throw NpyError(NpyStatus::bad_ndim, "expected a 2-D array, got " +
                                            std::to_string(h.shape.size()) + "-D");
  if (h.descr != "|u1")
    throw NpyError(NpyStatus::unsupported_descr,
                   "descr '" + h.descr + "' (masks need |u1)");
  const std::size_t count = h.shape[0] * h.shape[1];
  if (raw.data.size() != count)
    throw NpyError(NpyStatus::bad_size, "payload size does not match shape");
  PruneMask mask;
  mask.rows = h.shape[0];
  mask.cols = h.shape[1];
  mask.bits.assign(raw.data.begin(), raw.data.end());
  mask.nnz = 0;
  for (auto b : mask.bits)
    if (b) ++mask.nnz;
  return mask;
}

/// Writes a mask as descr |u1.
inline void write_mask(const std::filesystem::path& path, const PruneMask& mask) {
  npy_detail::write_raw(path, "|u1", mask.rows, mask.cols, mask.bits.data(),
                        mask.bits.size());
}

} // namespace topoprune
