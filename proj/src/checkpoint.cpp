#include "cetnet/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>

namespace cetnet {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'C', 'E', 'T', 'N', 'E', 'T', 'C', 'K'};

template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

class Reader {
 public:
  Reader(std::ifstream& in, const std::string& path) : in_(in), path_(path) {}

  template <class T>
  T get() {
    T v{};
    bytes(reinterpret_cast<char*>(&v), sizeof v);
    return v;
  }
  void bytes(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw ParseError("checkpoint " + path_ + " is truncated");
  }
  std::string string(std::size_t n) {
    if (n > (std::size_t{1} << 32)) throw ParseError("checkpoint " + path_ + ": implausible length");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }

 private:
  std::ifstream& in_;
  std::string path_;
};

}  // namespace

Checkpoint snapshot(const nlohmann::json& config, const ParamStore& params) {
  Checkpoint c;
  c.config = config;
  for (const auto& [name, t] : params.items()) {
    const auto v = t.data();
    c.params.push_back({name, t.shape(), {v.begin(), v.end()}});
  }
  return c;
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write checkpoint " + path);
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  const std::string cfg = ckpt.config.dump();
  put<std::uint64_t>(out, cfg.size());
  out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
  put<std::uint64_t>(out, ckpt.params.size());
  for (const auto& p : ckpt.params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.shape.size()));
    for (auto d : p.shape) put<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(p.values.data()),
              static_cast<std::streamsize>(p.values.size() * sizeof(double)));
  }
  if (!out) throw ConfigError("failed writing checkpoint " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint " + path);
  Reader r(in, path);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw ParseError(path + " is not a checkpoint file");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw ParseError("checkpoint " + path + " has version " + std::to_string(version) + ", expected " +
                     std::to_string(kCheckpointVersion));
  }
  Checkpoint c;
  c.config = nlohmann::json::parse(r.string(r.get<std::uint64_t>()));
  const auto count = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    ParamBlob p;
    p.name = r.string(r.get<std::uint32_t>());
    const auto rank = r.get<std::uint32_t>();
    for (std::uint32_t k = 0; k < rank; ++k) p.shape.push_back(r.get<std::uint64_t>());
    p.values.resize(shape_numel(p.shape));
    r.bytes(reinterpret_cast<char*>(p.values.data()), p.values.size() * sizeof(double));
    c.params.push_back(std::move(p));
  }
  return c;
}

void restore(const Checkpoint& ckpt, const ParamStore& params) {
  std::map<std::string, const ParamBlob*> blobs;
  for (const auto& b : ckpt.params) blobs[b.name] = &b;
  if (blobs.size() != params.size()) {
    throw ConfigError("checkpoint holds " + std::to_string(blobs.size()) + " parameters, model has " +
                      std::to_string(params.size()));
  }
  for (const auto& [name, t] : params.items()) {
    auto it = blobs.find(name);
    if (it == blobs.end()) throw ConfigError("checkpoint lacks parameter '" + name + "'");
    if (it->second->shape != t.shape()) {
      throw ConfigError("parameter '" + name + "': checkpoint shape " + shape_str(it->second->shape) +
                        " vs model " + shape_str(t.shape()));
    }
    Tensor leaf = t;
    auto dst = leaf.mutable_data();
    std::copy(it->second->values.begin(), it->second->values.end(), dst.begin());
  }
}

}  // namespace cetnet
