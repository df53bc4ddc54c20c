#include "rcnkit/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "rcnkit/errors.hpp"

namespace rcnkit {
namespace {

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

class Reader {
 public:
  Reader(const std::string& buf, const std::string& path) : buf_(buf), path_(path) {}

  std::uint16_t u16() { return static_cast<std::uint16_t>(byte() | byte() << 8); }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte()) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string bytes(std::size_t n) {
    if (pos_ + n > buf_.size()) truncated();
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == buf_.size(); }

 private:
  std::uint8_t byte() {
    if (pos_ >= buf_.size()) truncated();
    return static_cast<std::uint8_t>(buf_[pos_++]);
  }
  [[noreturn]] void truncated() const {
    throw IoError("checkpoint: truncated file '" + path_ + "'");
  }
  const std::string& buf_;
  const std::string& path_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const ParameterStore& store, const std::string& path) {
  std::string out;
  out += "RCNK";
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(store.size()));
  store.for_each([&](const std::string& name, const Tensor& t) {
    if (name.size() > 0xffff)
      throw IoError("checkpoint: parameter name too long: " + name.substr(0, 64) + "...");
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    out += name;
    const Shape& s = t.shape();
    put_u32(out, static_cast<std::uint32_t>(s.n));
    put_u32(out, static_cast<std::uint32_t>(s.c));
    put_u32(out, static_cast<std::uint32_t>(s.h));
    put_u32(out, static_cast<std::uint32_t>(s.w));
    for (float v : t.values()) put_f32(out, v);
  });

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("checkpoint: cannot open '" + path + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("checkpoint: write failed for '" + path + "'");
}

ParameterStore load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("checkpoint: cannot open '" + path + "'");
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  Reader r(buf, path);
  if (r.bytes(4) != "RCNK") throw IoError("checkpoint: bad magic in '" + path + "'");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw IoError("checkpoint: unsupported format version " + std::to_string(version) +
                  " in '" + path + "'");
  const std::uint32_t count = r.u32();

  ParameterStore store;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = r.bytes(r.u16());
    Shape shape;
    shape.n = static_cast<int>(r.u32());
    shape.c = static_cast<int>(r.u32());
    shape.h = static_cast<int>(r.u32());
    shape.w = static_cast<int>(r.u32());
    if (shape.numel() <= 0)
      throw IoError("checkpoint: invalid shape for '" + name + "' in '" + path + "'");
    std::vector<float> data(static_cast<std::size_t>(shape.numel()));
    for (float& v : data) v = r.f32();
    store.add(name, Tensor::from_data(shape, std::move(data)));
  }
  if (!r.at_end()) throw IoError("checkpoint: trailing bytes in '" + path + "'");
  return store;
}

}  // namespace rcnkit
