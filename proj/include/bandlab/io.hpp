#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "bandlab/entropy.hpp"
#include "bandlab/error.hpp"
#include "bandlab/model.hpp"

// Binary ensemble dump.
//
//   magic    8 bytes  "BANDLAB\0"
//   version  u32
//   n, ell   u32, u32
//   law      u32 kind, f64 smoothing exponent, u32 smoothing ell
//   seed     u64 master seed, u64 trial
//   blocks   A_1..A_n, B_1..B_n, C_1..C_n; each row-major, entries as (re, im) f64
//
// All integers and floats little-endian regardless of host.

namespace bandlab {

inline constexpr std::array<char, 8> kDumpMagic = {'B', 'A', 'N', 'D', 'L', 'A', 'B', '\0'};
inline constexpr std::uint32_t kDumpVersion = 1;

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> buf{};
  for (int i = 0; i < 8; ++i) buf[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xffU);
  os.write(buf.data(), 8);
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
  std::array<char, 4> buf{};
  for (int i = 0; i < 4; ++i) buf[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xffU);
  os.write(buf.data(), 4);
}

inline void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

inline std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> buf{};
  if (!is.read(reinterpret_cast<char*>(buf.data()), 8)) throw IoError("ensemble dump: truncated");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | buf[static_cast<std::size_t>(i)];
  return v;
}

inline std::uint32_t get_u32(std::istream& is) {
  std::array<unsigned char, 4> buf{};
  if (!is.read(reinterpret_cast<char*>(buf.data()), 4)) throw IoError("ensemble dump: truncated");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | buf[static_cast<std::size_t>(i)];
  return v;
}

inline double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

}  // namespace detail

inline void dump_ensemble(std::ostream& os, const BlockTridiagonal& t) {
  t.validate();
  os.write(kDumpMagic.data(), kDumpMagic.size());
  detail::put_u32(os, kDumpVersion);
  detail::put_u32(os, static_cast<std::uint32_t>(t.n));
  detail::put_u32(os, static_cast<std::uint32_t>(t.ell));
  detail::put_u32(os, static_cast<std::uint32_t>(t.law.kind));
  detail::put_f64(os, t.law.smoothing_exponent);
  detail::put_u32(os, static_cast<std::uint32_t>(t.law.smoothing_ell));
  detail::put_u64(os, t.master_seed);
  detail::put_u64(os, t.trial);
  for (const auto* list : {&t.a, &t.b, &t.c})
    for (const CMatrix& m : *list)
      for (long r = 0; r < m.rows(); ++r)
        for (long c = 0; c < m.cols(); ++c) {
          detail::put_f64(os, m(r, c).real());
          detail::put_f64(os, m(r, c).imag());
        }
  if (!os) throw IoError("ensemble dump: write failed");
}

inline BlockTridiagonal load_ensemble(std::istream& is) {
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kDumpMagic)
    throw IoError("ensemble dump: bad magic");
  if (const auto version = detail::get_u32(is); version != kDumpVersion)
    throw IoError("ensemble dump: unsupported version " + std::to_string(version));
  BlockTridiagonal t;
  t.n = static_cast<int>(detail::get_u32(is));
  t.ell = static_cast<int>(detail::get_u32(is));
  if (t.n < 1 || t.ell < 1) throw IoError("ensemble dump: bad dimensions");
  const auto kind = detail::get_u32(is);
  if (kind > static_cast<std::uint32_t>(AtomKind::smoothed_rademacher))
    throw IoError("ensemble dump: unknown law tag");
  t.law.kind = static_cast<AtomKind>(kind);
  t.law.smoothing_exponent = detail::get_f64(is);
  t.law.smoothing_ell = static_cast<int>(detail::get_u32(is));
  t.master_seed = detail::get_u64(is);
  t.trial = detail::get_u64(is);
  for (auto* list : {&t.a, &t.b, &t.c}) {
    list->reserve(static_cast<std::size_t>(t.n));
    for (int k = 0; k < t.n; ++k) {
      CMatrix m(t.ell, t.ell);
      for (long r = 0; r < t.ell; ++r)
        for (long c = 0; c < t.ell; ++c) {
          const double re = detail::get_f64(is);
          const double im = detail::get_f64(is);
          m(r, c) = Complex(re, im);
        }
      list->push_back(std::move(m));
    }
  }
  return t;
}

inline void dump_ensemble(const std::filesystem::path& path, const BlockTridiagonal& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  dump_ensemble(os, t);
}

inline BlockTridiagonal load_ensemble(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return load_ensemble(is);
}

}  // namespace bandlab
