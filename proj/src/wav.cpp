// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "mose/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "mose/errors.h"

namespace mose {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 |
         static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

}  // namespace

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();
  const std::string where = path.string() + ": ";
  if (size < 12 || std::memcmp(data, "RIFF", 4) != 0 ||
      std::memcmp(data + 8, "WAVE", 4) != 0) {
    throw DataError(where + "not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  WavData wav;
  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const std::uint32_t chunk_size = read_u32(data + pos + 4);
    const unsigned char* body = data + pos + 8;
    if (chunk_size > size - pos - 8) {
      throw DataError(where + "truncated chunk");
    }
    if (std::memcmp(data + pos, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw DataError(where + "short fmt chunk");
      const std::uint16_t format = read_u16(body);
      const std::uint16_t channels = read_u16(body + 2);
      const std::uint16_t bits = read_u16(body + 14);
      if (format != 1 || channels != 1 || bits != 16) {
        throw DataError(where + "unsupported encoding (need PCM16 mono)");
      }
      wav.sample_rate = static_cast<int>(read_u32(body + 4));
      have_fmt = true;
    } else if (std::memcmp(data + pos, "data", 4) == 0) {
      if (!have_fmt) throw DataError(where + "data chunk before fmt chunk");
      if (chunk_size == 0) throw DataError(where + "no samples");
      if (chunk_size % 2 != 0) throw DataError(where + "odd data size");
      wav.samples.resize(chunk_size / 2);
      for (std::size_t i = 0; i < wav.samples.size(); ++i) {
        const auto code = static_cast<std::int16_t>(read_u16(body + 2 * i));
        wav.samples[i] = code / 32768.0;
      }
      if (wav.sample_rate <= 0) throw DataError(where + "bad sample rate");
      return wav;
    }
    pos += 8 + chunk_size + (chunk_size & 1);
  }
  throw DataError(where + (have_fmt ? "missing data chunk" : "missing fmt chunk"));
}

void write_wav(const std::filesystem::path& path,
               std::span<const double> samples, int sample_rate) {
  if (samples.empty()) throw DataError("refusing to write empty WAV");
  if (sample_rate <= 0) throw DataError("bad sample rate");
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (double s : samples) {
    if (!std::isfinite(s)) throw DataError("non-finite sample");
    const double code = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(code)));
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw DataError("short write " + path.string());
}

}  // namespace mose
