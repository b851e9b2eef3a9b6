#pragma once

#include <optional>
#include <string>

#include "fraccal/dn_map.hpp"

namespace fraccal {

inline constexpr int kDnCacheVersion = 1;
inline constexpr int kGridFileVersion = 1;

// Text header, then raw little-endian doubles. The checksum covers header and payload.
void cache_dn(const std::string& path, const DnMatrix& M);
// verifies version, checksum, geometry hash and basis content hash against `basis`
DnMatrix load_dn(const std::string& path, BasisPtr basis);

void save_conductivity(const std::string& path, const Conductivity& c);
Conductivity load_conductivity(const std::string& path, GeometryPtr geo);
void save_field(const std::string& path, const GridField& f, const std::string& kind);
GridField load_field(const std::string& path, GeometryPtr geo, const std::string& kind);

// cache directory: FRACCAL_CACHE_DIR if set, otherwise `fallback`
std::string cache_directory(const std::string& fallback);

// Process-wide DN cache used by assemble_dn; disabled when unset.
void set_dn_cache(std::optional<std::string> dir);
std::optional<std::string> dn_cache();

}  // namespace fraccal
