#include "afrg/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include "afrg/errors.hpp"

namespace afrg {

namespace {

void put_u32(std::vector<char>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::vector<char>& b, std::uint16_t v) {
  b.push_back(static_cast<char>(v & 0xff));
  b.push_back(static_cast<char>((v >> 8) & 0xff));
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
  return v;
}

std::uint16_t get_u16(const char* p) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(p[0]) |
                                    (static_cast<unsigned char>(p[1]) << 8));
}

}  // namespace

std::int16_t quantize_sample(double v) {
  const double scaled = std::round(std::clamp(v, -1.0, 1.0) * 32767.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

void write_wav(const std::string& path, const Eigen::ArrayXd& samples, double sample_rate) {
  const std::uint32_t n = static_cast<std::uint32_t>(samples.size());
  const std::uint32_t data_bytes = n * 2;
  const std::uint32_t fs = static_cast<std::uint32_t>(std::lround(sample_rate));

  std::vector<char> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, fs);
  put_u32(out, fs * 2);  // byte rate
  put_u16(out, 2);       // block align
  put_u16(out, 16);      // bits per sample
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_bytes);
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    const std::int16_t s = quantize_sample(samples[i]);
    out.push_back(static_cast<char>(s & 0xff));
    out.push_back(static_cast<char>((s >> 8) & 0xff));
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw FormatError("short write: " + path);
}

WavData read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open: " + path);
  std::vector<char> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (buf.size() < 44 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw FormatError("not a RIFF/WAVE file: " + path);

  WavData wav;
  bool have_fmt = false, have_data = false;
  std::size_t pos = 12;
  std::size_t data_off = 0, data_len = 0;
  while (pos + 8 <= buf.size()) {
    const std::uint32_t chunk_len = get_u32(buf.data() + pos + 4);
    const char* id = buf.data() + pos;
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (pos + 8 + 16 > buf.size()) throw FormatError("truncated fmt chunk: " + path);
      const std::uint16_t format = get_u16(buf.data() + pos + 8);
      const std::uint16_t channels = get_u16(buf.data() + pos + 10);
      const std::uint16_t bits = get_u16(buf.data() + pos + 22);
      if (format != 1 || channels != 1 || bits != 16)
        throw FormatError("expected 16-bit PCM mono: " + path);
      wav.sample_rate = get_u32(buf.data() + pos + 12);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_off = pos + 8;
      data_len = chunk_len;
      have_data = true;
    }
    pos += 8 + chunk_len + (chunk_len & 1);
  }
  if (!have_fmt || !have_data) throw FormatError("missing fmt or data chunk: " + path);
  if (data_off + data_len > buf.size()) throw FormatError("truncated data chunk: " + path);

  const std::size_t n = data_len / 2;
  wav.samples.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const std::int16_t s = static_cast<std::int16_t>(get_u16(buf.data() + data_off + 2 * i));
    wav.samples[static_cast<Eigen::Index>(i)] = static_cast<double>(s) / 32767.0;
  }
  return wav;
}

}  // namespace afrg
