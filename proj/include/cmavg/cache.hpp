#ifndef CMAVG_CACHE_HPP
#define CMAVG_CACHE_HPP

// Record cache: a plain-text header (greppable, fixed 192 bytes) followed
// by fixed-width 32-byte rows sorted by p. The header carries a hash of the
// curve data; a cache whose hash does not match the requested curve is
// refused rather than silently reused.

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmavg/curve.hpp"

namespace cmavg {

inline constexpr u32 kCacheVersion = 1;
inline constexpr std::size_t kCacheHeaderSize = 192;
inline constexpr std::size_t kCacheRowSize = 32;

inline u64 curve_hash(const CurveSpec& c) {
  return fnv1a(c.label + "|" + std::to_string(c.a4) + "|" + std::to_string(c.a6) + "|" +
               std::to_string(c.conductor) + "|" + std::to_string(c.d_K));
}

struct CacheHeader {
  u32 version = kCacheVersion;
  std::string curve_label;
  u64 curve_hash = 0;
  u64 coverage = 0;  // records include every good prime <= coverage
  u64 count = 0;
};

struct CacheData {
  CacheHeader header;
  std::vector<PrimeRecord> records;
};

namespace detail {

inline void put_u64(unsigned char* b, u64 v) {
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
}
inline u64 get_u64(const unsigned char* b) {
  u64 v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<u64>(b[i]) << (8 * i);
  return v;
}

inline std::string render_header(const CacheHeader& h) {
  char buf[kCacheHeaderSize + 1];
  int n = std::snprintf(buf, sizeof buf,
                        "cmavg record cache v%u\n"
                        "curve=%s hash=%016llx\n"
                        "coverage=%020llu count=%020llu rowbytes=%zu\n",
                        h.version, h.curve_label.c_str(),
                        static_cast<unsigned long long>(h.curve_hash),
                        static_cast<unsigned long long>(h.coverage),
                        static_cast<unsigned long long>(h.count), kCacheRowSize);
  if (n < 0 || static_cast<std::size_t>(n) >= kCacheHeaderSize)
    throw std::runtime_error("cache header overflow (label too long?)");
  std::string s(buf, static_cast<std::size_t>(n));
  s.resize(kCacheHeaderSize - 1, ' ');
  s.push_back('\n');
  return s;
}

inline CacheHeader parse_header(const std::string& s) {
  CacheHeader h;
  char label[96] = {0};
  unsigned long long hash = 0, cov = 0, cnt = 0;
  unsigned version = 0;
  std::size_t rowbytes = 0;
  int got = std::sscanf(s.c_str(),
                        "cmavg record cache v%u\n"
                        "curve=%95s hash=%llx\n"
                        "coverage=%llu count=%llu rowbytes=%zu",
                        &version, label, &hash, &cov, &cnt, &rowbytes);
  if (got != 6) throw std::runtime_error("malformed cache header");
  if (version != kCacheVersion)
    throw std::runtime_error("unsupported cache format version " + std::to_string(version));
  if (rowbytes != kCacheRowSize) throw std::runtime_error("unexpected cache row width");
  h.version = version;
  h.curve_label = label;
  h.curve_hash = hash;
  h.coverage = cov;
  h.count = cnt;
  return h;
}

inline void encode_row(unsigned char* b, const PrimeRecord& r) {
  std::memset(b, 0, kCacheRowSize);
  put_u64(b + 0, r.p);
  put_u64(b + 8, static_cast<u64>(r.a_p));
  put_u64(b + 16, r.e_p);
  u32 d = static_cast<u32>(r.d_p);
  for (int i = 0; i < 4; ++i) b[24 + i] = static_cast<unsigned char>(d >> (8 * i));
  b[28] = static_cast<unsigned char>(r.method);
  b[29] = r.crosschecked ? 1 : 0;
}

inline PrimeRecord decode_row(const unsigned char* b) {
  PrimeRecord r;
  r.p = get_u64(b + 0);
  r.a_p = static_cast<i64>(get_u64(b + 8));
  r.e_p = get_u64(b + 16);
  u32 d = 0;
  for (int i = 0; i < 4; ++i) d |= static_cast<u32>(b[24 + i]) << (8 * i);
  r.d_p = d;
  r.method = static_cast<Method>(b[28]);
  r.crosschecked = b[29] != 0;
  r.n = r.d_p * r.e_p;
  return r;
}

}  // namespace detail

inline void write_cache(const std::filesystem::path& path, const CurveSpec& curve,
                        const std::vector<PrimeRecord>& records, u64 coverage) {
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].p <= records[i - 1].p)
      throw std::invalid_argument("write_cache: records must be strictly ascending in p");
  CacheHeader h;
  h.curve_label = curve.label;
  h.curve_hash = curve_hash(curve);
  h.coverage = coverage;
  h.count = records.size();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_cache: cannot open " + path.string());
  std::string hdr = detail::render_header(h);
  out.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
  std::vector<unsigned char> row(kCacheRowSize);
  for (const auto& r : records) {
    detail::encode_row(row.data(), r);
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw std::runtime_error("write_cache: write failed for " + path.string());
}

inline CacheData read_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_cache: cannot open " + path.string());
  std::string hdr(kCacheHeaderSize, '\0');
  in.read(hdr.data(), static_cast<std::streamsize>(kCacheHeaderSize));
  if (in.gcount() != static_cast<std::streamsize>(kCacheHeaderSize))
    throw std::runtime_error("read_cache: truncated header in " + path.string());
  CacheData data;
  data.header = detail::parse_header(hdr);
  data.records.reserve(data.header.count);
  std::vector<unsigned char> row(kCacheRowSize);
  for (u64 i = 0; i < data.header.count; ++i) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (in.gcount() != static_cast<std::streamsize>(kCacheRowSize))
      throw std::runtime_error("read_cache: truncated row " + std::to_string(i) + " in " + path.string());
    data.records.push_back(detail::decode_row(row.data()));
  }
  for (std::size_t i = 1; i < data.records.size(); ++i)
    if (data.records[i].p <= data.records[i - 1].p)
      throw std::runtime_error("read_cache: rows not sorted by p in " + path.string());
  return data;
}

// Read + integrity gate: the header hash must match the requested curve.
inline CacheData read_cache_for(const std::filesystem::path& path, const CurveSpec& curve) {
  CacheData data = read_cache(path);
  if (data.header.curve_hash != curve_hash(curve) || data.header.curve_label != curve.label)
    throw std::runtime_error("cache " + path.string() + " belongs to curve '" + data.header.curve_label +
                             "' (hash mismatch); refusing to mix caches across curves or edited headers");
  return data;
}

inline std::filesystem::path cache_path(const std::filesystem::path& dir, const CurveSpec& curve) {
  return dir / (curve.label + ".cmrec");
}

}  // namespace cmavg

#endif  // CMAVG_CACHE_HPP
