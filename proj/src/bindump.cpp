#include "expphi/bindump.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace expphi {

static_assert(std::endian::native == std::endian::little, "dump format assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'E', 'X', 'P', 'P', 'H', 'I', 'C', '\0'};

template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T take(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("truncated coefficient dump");
  return v;
}

}  // namespace

void write_field_dump(const std::string& path, const std::vector<SpectralField>& fields) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  const std::uint32_t m = fields.empty() ? 0u : static_cast<std::uint32_t>(fields.front().grid().size());
  const std::uint64_t per = fields.empty() ? 0u : fields.front().grid().coeff_count();
  out.write(kMagic, sizeof kMagic);
  put(out, kDumpVersion);
  put(out, m);
  put(out, static_cast<std::uint64_t>(fields.size()));
  put(out, per);
  for (const auto& f : fields) {
    if (f.grid().size() != static_cast<int>(m)) throw std::invalid_argument("fields on different grids");
    out.write(reinterpret_cast<const char*>(f.coeffs().data()),
              static_cast<std::streamsize>(per * sizeof(Complex)));
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<SpectralField> read_field_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw std::runtime_error("not a coefficient dump");
  const auto version = take<std::uint32_t>(in);
  if (version != kDumpVersion) throw std::runtime_error("unsupported dump version " + std::to_string(version));
  const auto m = take<std::uint32_t>(in);
  const auto count = take<std::uint64_t>(in);
  const auto per = take<std::uint64_t>(in);
  std::vector<SpectralField> out;
  if (count == 0) return out;
  const TorusGrid grid(static_cast<int>(m));
  if (per != grid.coeff_count()) throw std::runtime_error("coefficient count does not match grid");
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::vector<Complex> c(per);
    in.read(reinterpret_cast<char*>(c.data()), static_cast<std::streamsize>(per * sizeof(Complex)));
    if (!in) throw std::runtime_error("truncated coefficient dump");
    out.emplace_back(grid, std::move(c));
  }
  return out;
}

}  // namespace expphi
