#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace touchless
{
    inline constexpr std::size_t kLandmarkCount = 21;

    // Standard 21-point hand model.
    namespace lm
    {
        inline constexpr std::size_t wrist = 0;
        inline constexpr std::size_t thumb_ip = 3;
        inline constexpr std::size_t thumb_tip = 4;
        inline constexpr std::size_t index_pip = 6;
        inline constexpr std::size_t index_tip = 8;
        inline constexpr std::size_t middle_pip = 10;
        inline constexpr std::size_t middle_tip = 12;
        inline constexpr std::size_t ring_pip = 14;
        inline constexpr std::size_t ring_tip = 16;
        inline constexpr std::size_t little_pip = 18;
        inline constexpr std::size_t little_tip = 20;
    }

    enum class Finger : std::uint8_t
    {
        thumb = 0,
        index = 1,
        middle = 2,
        ring = 3,
        little = 4,
    };

    inline constexpr std::size_t kFingerCount = 5;

    inline constexpr std::size_t tip_of(Finger f) noexcept
    {
        return 4 + 4 * static_cast<std::size_t>(f);
    }

    // Thumb uses its IP joint in the pip slot.
    inline constexpr std::size_t pip_of(Finger f) noexcept
    {
        return f == Finger::thumb ? lm::thumb_ip : 2 + 4 * static_cast<std::size_t>(f);
    }

    struct Landmark
    {
        double x = 0.0;
        double y = 0.0;
        double z = 0.0;

        friend bool operator==(const Landmark &, const Landmark &) = default;
    };

    struct PixelPoint
    {
        double x = 0.0;
        double y = 0.0;

        friend bool operator==(const PixelPoint &, const PixelPoint &) = default;
    };

    struct LandmarkFrame
    {
        std::uint64_t frame_id = 0;
        std::uint64_t t_capture_us = 0;
        std::uint32_t width = 1280;
        std::uint32_t height = 720;
        bool hand_present = false;
        std::vector<Landmark> landmarks;

        double diagonal() const noexcept
        {
            return std::hypot(static_cast<double>(width), static_cast<double>(height));
        }

        friend bool operator==(const LandmarkFrame &, const LandmarkFrame &) = default;
    };

    /// Raised when a frame or message breaks the landmark schema (count, range, finiteness, dimensions).
    class SchemaViolation : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    inline PixelPoint to_pixels(const Landmark &l, std::uint32_t width, std::uint32_t height) noexcept
    {
        return {l.x * static_cast<double>(width), l.y * static_cast<double>(height)};
    }

    inline PixelPoint to_pixels(const LandmarkFrame &f, std::size_t index) noexcept
    {
        return to_pixels(f.landmarks[index], f.width, f.height);
    }

    inline double pixel_distance(PixelPoint a, PixelPoint b) noexcept
    {
        return std::hypot(a.x - b.x, a.y - b.y);
    }

    /// Throws SchemaViolation if the frame is not admissible to the engine.
    inline void validate(const LandmarkFrame &f)
    {
        if (f.width < 1 || f.height < 1)
        {
            throw SchemaViolation("image dimensions must be >= 1");
        }
        if (!f.hand_present)
        {
            if (!f.landmarks.empty())
            {
                throw SchemaViolation("landmarks present on a hand-absent frame");
            }
            return;
        }
        if (f.landmarks.size() != kLandmarkCount)
        {
            throw SchemaViolation("expected 21 landmarks, got " + std::to_string(f.landmarks.size()));
        }
        for (std::size_t i = 0; i < f.landmarks.size(); ++i)
        {
            const auto &l = f.landmarks[i];
            if (!std::isfinite(l.x) || !std::isfinite(l.y) || !std::isfinite(l.z))
            {
                throw SchemaViolation("non-finite coordinate at landmark " + std::to_string(i));
            }
            if (l.x < 0.0 || l.x > 1.0 || l.y < 0.0 || l.y > 1.0)
            {
                throw SchemaViolation("coordinate out of [0,1] at landmark " + std::to_string(i));
            }
        }
    }
}
