#include "fraccal/serialize.hpp"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "fraccal/errors.hpp"
#include "hash.hpp"

namespace fraccal {

namespace {

struct Parsed {
  int version = 0;
  std::map<std::string, std::string> fields;
  std::string header;  // everything before the checksum line
  std::string payload;
  std::string checksum;
};

void write_file(const std::string& path, const std::string& magic, int version,
                const std::vector<std::pair<std::string, std::string>>& fields, const double* data, std::size_t n) {
  std::ostringstream hs;
  hs << magic << ' ' << version << '\n';
  for (const auto& [k, v] : fields) hs << k << ' ' << v << '\n';
  std::string header = hs.str();
  std::string payload(reinterpret_cast<const char*>(data), n * sizeof(double));
  auto sum = detail::fnv1a(payload, detail::fnv1a(header));
  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw CacheError("cannot write " + path);
    os << header << "checksum " << detail::hex64(sum) << "\n--\n";
    os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!os) throw CacheError("short write to " + path);
  }
  std::filesystem::rename(tmp, path);
}

Parsed read_file(const std::string& path, const std::string& magic, int expected_version) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CacheError("cannot open " + path);
  std::string all((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  auto sep = all.find("\n--\n");
  if (sep == std::string::npos) throw CacheError(path + ": corrupt file (no header terminator)");
  std::string head = all.substr(0, sep + 1);
  Parsed p;
  p.payload = all.substr(sep + 4);
  std::istringstream hs(head);
  std::string line;
  if (!std::getline(hs, line)) throw CacheError(path + ": empty header");
  {
    std::istringstream ls(line);
    std::string m;
    ls >> m >> p.version;
    if (m != magic || !ls) throw CacheError(path + ": not a " + magic + " file");
  }
  if (p.version != expected_version)
    throw VersionMismatch(path + ": format version " + std::to_string(p.version) + ", this build reads " +
                          std::to_string(expected_version) +
                          "; migration: delete the file and re-run, the cache is rebuilt automatically");
  p.header = line + '\n';
  while (std::getline(hs, line)) {
    auto sp = line.find(' ');
    std::string k = line.substr(0, sp), v = sp == std::string::npos ? "" : line.substr(sp + 1);
    if (k == "checksum") {
      p.checksum = v;
      continue;
    }
    p.header += line + '\n';
    p.fields[k] = v;
  }
  if (p.checksum.empty()) throw CacheError(path + ": missing checksum");
  if (detail::hex64(detail::fnv1a(p.payload, detail::fnv1a(p.header))) != p.checksum)
    throw HashMismatch(path + ": checksum mismatch (header or payload modified)");
  return p;
}

const std::string& field(const Parsed& p, const std::string& k, const std::string& path) {
  auto it = p.fields.find(k);
  if (it == p.fields.end()) throw CacheError(path + ": missing header field '" + k + "'");
  return it->second;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ','))
    if (!tok.empty()) out.push_back(std::stoi(tok));
  return out;
}

std::vector<double> payload_doubles(const Parsed& p, std::size_t n, const std::string& path) {
  if (p.payload.size() != n * sizeof(double)) throw CacheError(path + ": payload size mismatch");
  std::vector<double> v(n);
  std::memcpy(v.data(), p.payload.data(), p.payload.size());
  return v;
}

std::mutex cache_mutex;
std::optional<std::string> cache_dir_setting;

}  // namespace

void cache_dn(const std::string& path, const DnMatrix& M) {
  const auto& b = *M.basis;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = M.M;
  write_file(path, "FRACCAL-DN", kDnCacheVersion,
             {{"equation", M.equation},
              {"basis", b.descriptor()},
              {"basis_hash", detail::hex64(b.content_hash())},
              {"geometry_hash", detail::hex64(b.geo->hash())},
              {"rows", join(M.rows)},
              {"cols", join(M.cols)},
              {"shape", std::to_string(rm.rows()) + " " + std::to_string(rm.cols())}},
             rm.data(), static_cast<std::size_t>(rm.size()));
}

DnMatrix load_dn(const std::string& path, BasisPtr basis) {
  auto p = read_file(path, "FRACCAL-DN", kDnCacheVersion);
  if (field(p, "geometry_hash", path) != detail::hex64(basis->geo->hash()))
    throw HashMismatch(path + ": geometry hash differs from the requested geometry");
  if (field(p, "basis_hash", path) != detail::hex64(basis->content_hash()))
    throw HashMismatch(path + ": basis hash differs from the requested basis");
  DnMatrix M;
  M.basis = basis;
  M.equation = field(p, "equation", path);
  M.rows = split_ints(field(p, "rows", path));
  M.cols = split_ints(field(p, "cols", path));
  std::istringstream shp(field(p, "shape", path));
  long r = -1, c = -1;
  shp >> r >> c;
  if (r != static_cast<long>(M.rows.size()) || c != static_cast<long>(M.cols.size()))
    throw CacheError(path + ": shape does not match index lists");
  auto v = payload_doubles(p, static_cast<std::size_t>(r * c), path);
  M.M = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(v.data(), r, c);
  return M;
}

void save_field(const std::string& path, const GridField& f, const std::string& kind) {
  const auto& g = *f.geo;
  write_file(path, "FRACCAL-GRID", kGridFileVersion,
             {{"kind", kind},
              {"n", std::to_string(g.n)},
              {"s", detail::fmt_double(g.s)},
              {"L", detail::fmt_double(g.L)},
              {"N", std::to_string(g.N)},
              {"geometry_hash", detail::hex64(g.hash())}},
             f.values.data(), f.values.size());
}

GridField load_field(const std::string& path, GeometryPtr geo, const std::string& kind) {
  auto p = read_file(path, "FRACCAL-GRID", kGridFileVersion);
  if (field(p, "kind", path) != kind) throw CacheError(path + ": expected a " + kind + " file");
  if (field(p, "geometry_hash", path) != detail::hex64(geo->hash()))
    throw HashMismatch(path + ": geometry hash differs from the requested geometry");
  return GridField(geo, payload_doubles(p, geo->size(), path));
}

void save_conductivity(const std::string& path, const Conductivity& c) {
  const auto& g = *c.geo;
  write_file(path, "FRACCAL-GRID", kGridFileVersion,
             {{"kind", "conductivity"},
              {"n", std::to_string(g.n)},
              {"s", detail::fmt_double(g.s)},
              {"L", detail::fmt_double(g.L)},
              {"N", std::to_string(g.N)},
              {"gamma0", detail::fmt_double(c.gamma0)},
              {"seed", std::to_string(c.seed)},
              {"label", c.label},
              {"geometry_hash", detail::hex64(g.hash())}},
             c.gamma.data(), c.gamma.size());
}

Conductivity load_conductivity(const std::string& path, GeometryPtr geo) {
  auto p = read_file(path, "FRACCAL-GRID", kGridFileVersion);
  if (field(p, "kind", path) != "conductivity") throw CacheError(path + ": not a conductivity file");
  if (field(p, "geometry_hash", path) != detail::hex64(geo->hash()))
    throw HashMismatch(path + ": geometry hash differs from the requested geometry");
  auto c = make_conductivity(geo, payload_doubles(p, geo->size(), path), std::stod(field(p, "gamma0", path)),
                             field(p, "label", path));
  c.seed = std::stoull(field(p, "seed", path));
  return c;
}

std::string cache_directory(const std::string& fallback) {
  const char* env = std::getenv("FRACCAL_CACHE_DIR");
  return env && *env ? std::string(env) : fallback;
}

void set_dn_cache(std::optional<std::string> dir) {
  std::lock_guard lk(cache_mutex);
  cache_dir_setting = std::move(dir);
}

std::optional<std::string> dn_cache() {
  std::lock_guard lk(cache_mutex);
  return cache_dir_setting;
}

}  // namespace fraccal
