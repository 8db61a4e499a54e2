#include "logicmix/image.hpp"

#include <cstring>
#include <fstream>
#include <vector>

namespace logicmix {

namespace {

void put_u32_le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void write_lmt1(const ImageTensor& tensor, const std::filesystem::path& path) {
  std::string buf;
  buf.reserve(16 + tensor.size() * 4);
  buf += "LMT1";
  put_u32_le(buf, static_cast<std::uint32_t>(tensor.height()));
  put_u32_le(buf, static_cast<std::uint32_t>(tensor.width()));
  put_u32_le(buf, static_cast<std::uint32_t>(tensor.channels()));
  for (Eigen::Index i = 0; i < tensor.data().size(); ++i) {
    std::uint32_t bits;
    const float v = tensor.data()[i];
    std::memcpy(&bits, &v, 4);
    put_u32_le(buf, bits);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot open for writing: " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw ParseError("short write: " + path.string());
}

ImageTensor read_lmt1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open: " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (buf.size() < 16 || std::memcmp(buf.data(), "LMT1", 4) != 0)
    throw ParseError("not an LMT1 tensor: " + path.string());
  const std::uint32_t h = get_u32_le(buf.data() + 4);
  const std::uint32_t w = get_u32_le(buf.data() + 8);
  const std::uint32_t ch = get_u32_le(buf.data() + 12);
  const std::size_t n = static_cast<std::size_t>(h) * w * ch;
  if (buf.size() != 16 + n * 4)
    throw ParseError("LMT1 payload size mismatch: " + path.string());
  Eigen::ArrayXf data(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t bits = get_u32_le(buf.data() + 16 + i * 4);
    float v;
    std::memcpy(&v, &bits, 4);
    data[static_cast<Eigen::Index>(i)] = v;
  }
  return ImageTensor(h, w, ch, std::move(data));
}

}  // namespace logicmix
