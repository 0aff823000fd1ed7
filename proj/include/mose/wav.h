// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace mose {

struct WavData {
  std::vector<double> samples;
  int sample_rate = 0;
};

// RIFF/WAVE, PCM 16-bit mono only. Samples are scaled by 1/32768 on read;
// writes round to the nearest code and saturate at the int16 range.
WavData read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path,
               std::span<const double> samples, int sample_rate);

}  // namespace mose
