#include "dgpinn/checkpoint.hpp"

#include "dgpinn/errors.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace dgpinn {

namespace {

constexpr std::size_t kMagicSize = sizeof(kCheckpointMagic) - 1;
constexpr std::uint32_t kMaxName = 1u << 16;
constexpr std::uint32_t kMaxLayers = 1u << 10;

template <class U>
void put(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(bytes.data(), bytes.size());
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void read_exact(std::istream& in, char* dst, std::size_t n, const char* what) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw ConfigError(std::string("checkpoint truncated while reading ") + what);
  }
}

template <class U>
U get(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(U)> bytes;
  read_exact(in, reinterpret_cast<char*>(bytes.data()), bytes.size(), what);
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

std::string get_string(std::istream& in, const char* what) {
  const auto n = get<std::uint32_t>(in, what);
  if (n > kMaxName) throw ConfigError(std::string("checkpoint ") + what + " is implausibly long");
  std::string s(n, '\0');
  read_exact(in, s.data(), n, what);
  return s;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint) {
  out.write(kCheckpointMagic, kMagicSize);
  put_string(out, checkpoint.problem);
  const auto& widths = checkpoint.state.network.widths();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(widths.size()));
  for (int w : widths) put<std::uint32_t>(out, static_cast<std::uint32_t>(w));
  const auto& names = checkpoint.state.unknowns.names;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(names.size()));
  for (const auto& n : names) put_string(out, n);
  const Vector flat = checkpoint.state.flatten();
  put<std::uint64_t>(out, static_cast<std::uint64_t>(flat.size()));
  for (Index i = 0; i < flat.size(); ++i) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(flat(i)));
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write checkpoint " + path.string());
  write_checkpoint(out, checkpoint);
  if (!out) throw ConfigError("failed writing checkpoint " + path.string());
}

Checkpoint read_checkpoint(std::istream& in) {
  std::array<char, kMagicSize> magic{};
  read_exact(in, magic.data(), magic.size(), "magic");
  if (std::memcmp(magic.data(), kCheckpointMagic, kMagicSize) != 0) {
    throw ConfigError("not a checkpoint (bad magic)");
  }
  Checkpoint c;
  c.problem = get_string(in, "problem name");
  const auto layers = get<std::uint32_t>(in, "layer count");
  if (layers < 2 || layers > kMaxLayers) throw ConfigError("checkpoint layer count out of range");
  std::vector<int> widths;
  for (std::uint32_t i = 0; i < layers; ++i) {
    const auto w = get<std::uint32_t>(in, "layer widths");
    if (w == 0 || w > (1u << 20)) throw ConfigError("checkpoint layer width out of range");
    widths.push_back(static_cast<int>(w));
  }
  const auto unknowns = get<std::uint32_t>(in, "unknown count");
  if (unknowns > kMaxLayers) throw ConfigError("checkpoint unknown count out of range");
  std::vector<std::string> names;
  for (std::uint32_t i = 0; i < unknowns; ++i) names.push_back(get_string(in, "unknown name"));

  c.state.network = NetworkParams(widths);
  c.state.unknowns.names = std::move(names);
  c.state.unknowns.values = Vector::Zero(static_cast<Index>(unknowns));
  const auto count = get<std::uint64_t>(in, "value count");
  if (count != static_cast<std::uint64_t>(c.state.size())) {
    throw ConfigError("checkpoint holds " + std::to_string(count) + " values, shapes need " +
                      std::to_string(c.state.size()));
  }
  Vector flat(static_cast<Index>(count));
  for (Index i = 0; i < flat.size(); ++i) {
    flat(i) = std::bit_cast<double>(get<std::uint64_t>(in, "parameter values"));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ConfigError("trailing bytes after checkpoint");
  c.state.assign({flat.data(), static_cast<std::size_t>(flat.size())});
  return c;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace dgpinn
