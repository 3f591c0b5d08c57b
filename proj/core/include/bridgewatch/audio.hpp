#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace bridgewatch {

/// Mono PCM audio normalized to [-1, 1].
struct AudioClip {
    int sample_rate_hz = 0;
    std::vector<float> samples;

    double duration_ms() const {
        return sample_rate_hz > 0 ? 1000.0 * static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
    }
};

/// Throws InvalidAudio unless rate >= 8 kHz, non-empty, and every sample is
/// within [-1, 1].
void validate_clip(const AudioClip& clip);

/// RIFF/WAVE, 16-bit PCM. Multi-channel input is averaged to mono.
AudioClip decode_wav(const std::string& bytes);
AudioClip read_wav(const std::filesystem::path& file);

/// 16-bit PCM mono. Samples are clamped to [-1, 1] and rounded.
std::string encode_wav(const AudioClip& clip);
void write_wav(const std::filesystem::path& file, const AudioClip& clip);

}  // namespace bridgewatch
