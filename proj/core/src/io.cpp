#include "w2lab/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "snapshot binary format assumes a little-endian host");

namespace w2lab {

std::string snapshot_to_csv(const EnsembleSnapshot& snap) {
  std::ostringstream os;
  os << "k,chain_id";
  for (Eigen::Index c = 0; c < snap.points.cols(); ++c) os << ",x_" << c;
  os << "\n";
  for (Eigen::Index i = 0; i < snap.points.rows(); ++i) {
    os << snap.k << "," << i;
    for (Eigen::Index c = 0; c < snap.points.cols(); ++c)
      os << "," << format_double(snap.points(i, c));
    os << "\n";
  }
  return os.str();
}

std::vector<std::byte> snapshot_to_binary(const EnsembleSnapshot& snap) {
  const std::uint32_t version = 1;
  const auto d = static_cast<std::uint32_t>(snap.points.cols());
  const auto n = static_cast<std::uint64_t>(snap.points.rows());
  const auto k = static_cast<std::uint64_t>(snap.k);
  std::vector<std::byte> out(4 + 4 + 4 + 8 + 8 + n * d * 8);
  std::byte* p = out.data();
  std::memcpy(p, "W2L1", 4); p += 4;
  std::memcpy(p, &version, 4); p += 4;
  std::memcpy(p, &d, 4); p += 4;
  std::memcpy(p, &n, 8); p += 8;
  std::memcpy(p, &k, 8); p += 8;
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint32_t c = 0; c < d; ++c) {
      const double v = snap.points(static_cast<Eigen::Index>(i), c);
      std::memcpy(p, &v, 8);
      p += 8;
    }
  }
  return out;
}

EnsembleSnapshot snapshot_from_binary(const std::vector<std::byte>& bytes) {
  if (bytes.size() < 28 || std::memcmp(bytes.data(), "W2L1", 4) != 0)
    throw std::runtime_error("snapshot_from_binary: bad magic");
  const std::byte* p = bytes.data() + 4;
  std::uint32_t version = 0, d = 0;
  std::uint64_t n = 0, k = 0;
  std::memcpy(&version, p, 4); p += 4;
  std::memcpy(&d, p, 4); p += 4;
  std::memcpy(&n, p, 8); p += 8;
  std::memcpy(&k, p, 8); p += 8;
  if (version != 1) throw std::runtime_error("snapshot_from_binary: unknown version");
  if (bytes.size() != 28 + n * d * 8)
    throw std::runtime_error("snapshot_from_binary: truncated payload");
  EnsembleSnapshot snap;
  snap.k = static_cast<std::int64_t>(k);
  snap.points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint32_t c = 0; c < d; ++c) {
      double v;
      std::memcpy(&v, p, 8);
      p += 8;
      snap.points(static_cast<Eigen::Index>(i), c) = v;
    }
  }
  return snap;
}

namespace {
void atomic_write_impl(const std::filesystem::path& path, const void* data,
                       std::size_t size) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!f) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}
}  // namespace

void atomic_write(const std::filesystem::path& path, const std::string& text) {
  atomic_write_impl(path, text.data(), text.size());
}

void atomic_write(const std::filesystem::path& path,
                  const std::vector<std::byte>& bytes) {
  atomic_write_impl(path, bytes.data(), bytes.size());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

}  // namespace w2lab
