#include "bridgewatch/audio.hpp"

#include "bridgewatch/error.hpp"
#include "bridgewatch/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace bridgewatch {

namespace {

std::uint32_t le32(const std::string& b, std::size_t at) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 8 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 2])) << 16 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 3])) << 24;
}

std::uint16_t le16(const std::string& b, std::size_t at) {
    return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                      static_cast<unsigned char>(b[at + 1]) << 8);
}

void put32(std::string& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

void put16(std::string& b, std::uint16_t v) {
    b.push_back(static_cast<char>(v & 0xff));
    b.push_back(static_cast<char>((v >> 8) & 0xff));
}

[[noreturn]] void bad(const std::string& why) {
    throw Error(Errc::InvalidAudio, "InvalidAudio: " + why);
}

}  // namespace

void validate_clip(const AudioClip& clip) {
    if (clip.sample_rate_hz < 8000) {
        bad("sample rate must be >= 8000 Hz");
    }
    if (clip.samples.empty()) {
        bad("clip is empty");
    }
    for (float s : clip.samples) {
        if (!(s >= -1.0f && s <= 1.0f)) {
            bad("sample outside [-1, 1]");
        }
    }
}

AudioClip decode_wav(const std::string& b) {
    if (b.size() < 12 || b.compare(0, 4, "RIFF") != 0 || b.compare(8, 4, "WAVE") != 0) {
        bad("not a RIFF/WAVE file");
    }
    std::size_t pos = 12;
    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t rate = 0;
    std::uint16_t bits = 0;
    bool have_fmt = false;
    while (pos + 8 <= b.size()) {
        std::string id = b.substr(pos, 4);
        std::uint32_t size = le32(b, pos + 4);
        std::size_t body = pos + 8;
        if (body + size > b.size()) {
            size = static_cast<std::uint32_t>(b.size() - body);
        }
        if (id == "fmt ") {
            if (size < 16) {
                bad("fmt chunk too short");
            }
            format = le16(b, body);
            channels = le16(b, body + 2);
            rate = le32(b, body + 4);
            bits = le16(b, body + 14);
            have_fmt = true;
        } else if (id == "data") {
            if (!have_fmt) {
                bad("data chunk before fmt chunk");
            }
            if (format != 1 || bits != 16) {
                bad("only 16-bit PCM is supported");
            }
            if (channels == 0) {
                bad("zero channels");
            }
            AudioClip clip;
            clip.sample_rate_hz = static_cast<int>(rate);
            std::size_t frames = size / (2u * channels);
            clip.samples.resize(frames);
            for (std::size_t f = 0; f < frames; ++f) {
                double acc = 0.0;
                for (std::size_t c = 0; c < channels; ++c) {
                    auto raw = static_cast<std::int16_t>(le16(b, body + 2 * (f * channels + c)));
                    acc += raw / 32768.0;
                }
                clip.samples[f] = static_cast<float>(acc / channels);
            }
            validate_clip(clip);
            return clip;
        }
        pos = body + size + (size & 1u);
    }
    bad("no data chunk");
}

AudioClip read_wav(const std::filesystem::path& file) {
    return decode_wav(read_file(file));
}

std::string encode_wav(const AudioClip& clip) {
    const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
    std::string b;
    b.reserve(44 + data_bytes);
    b += "RIFF";
    put32(b, 36 + data_bytes);
    b += "WAVEfmt ";
    put32(b, 16);
    put16(b, 1);
    put16(b, 1);
    put32(b, static_cast<std::uint32_t>(clip.sample_rate_hz));
    put32(b, static_cast<std::uint32_t>(clip.sample_rate_hz) * 2);
    put16(b, 2);
    put16(b, 16);
    b += "data";
    put32(b, data_bytes);
    for (float s : clip.samples) {
        double v = std::clamp(static_cast<double>(s), -1.0, 1.0);
        auto q = static_cast<std::int32_t>(std::lround(v * 32767.0));
        put16(b, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
    return b;
}

void write_wav(const std::filesystem::path& file, const AudioClip& clip) {
    write_file(file, encode_wav(clip));
}

}  // namespace bridgewatch
