#pragma once

// Hand-built landmark fixtures shared by the unit and acceptance tests. Geometry is laid
// out directly in normalized coordinates, independent of the synth generator.

#include "touchless/landmark.hpp"

#include <array>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

namespace touchless::test
{
    struct HandSpec
    {
        // extended flags: thumb, index, middle, ring, little
        std::array<bool, 5> extended{false, false, false, false, false};
        // z of each fingertip relative to a wrist at z = 0 (negative = nearer the camera)
        std::array<double, 5> tip_z{0.0, 0.0, 0.0, 0.0, 0.0};
        double wrist_x = 0.5;
        double wrist_y = 0.8;
        // Thumb tip in normalized coordinates; defaults far from the index tip.
        double thumb_x = 0.30;
        double thumb_y = 0.70;
        bool place_thumb = false;
    };

    inline constexpr std::array<double, 5> kFingerOffsets{-0.12, -0.06, 0.0, 0.05, 0.10};

    /// Pip 0.15 above the wrist; an extended tip 0.30 above (ratio 2.0), a curled tip on the pip (ratio 1.0).
    inline LandmarkFrame make_hand(const HandSpec &spec, std::uint32_t w = 1280, std::uint32_t h = 720,
                                   std::uint64_t frame_id = 1, std::uint64_t t_us = 0)
    {
        LandmarkFrame f;
        f.frame_id = frame_id;
        f.t_capture_us = t_us;
        f.width = w;
        f.height = h;
        f.hand_present = true;
        f.landmarks.assign(kLandmarkCount, Landmark{spec.wrist_x, spec.wrist_y, 0.0});
        for (std::size_t i = 0; i < 5; ++i)
        {
            const double x = spec.wrist_x + kFingerOffsets[i];
            const std::size_t base = 1 + 4 * i;
            f.landmarks[base] = {x, spec.wrist_y - 0.08, spec.tip_z[i] * 0.25};
            const double pip_y = spec.wrist_y - 0.15;
            const std::size_t pip = i == 0 ? 3 : base + 1;
            f.landmarks[pip] = {x, pip_y, spec.tip_z[i] * 0.5};
            if (i != 0)
                f.landmarks[base + 2] = {x, spec.extended[i] ? spec.wrist_y - 0.22 : pip_y, spec.tip_z[i] * 0.75};
            else
                f.landmarks[2] = {x, spec.wrist_y - 0.12, spec.tip_z[i] * 0.4};
            const double tip_y = spec.extended[i] ? spec.wrist_y - 0.30 : pip_y;
            f.landmarks[base + 3] = {x, tip_y, spec.tip_z[i]};
        }
        if (spec.place_thumb)
            f.landmarks[4] = {spec.thumb_x, spec.thumb_y, spec.tip_z[0]};
        return f;
    }

    /// Index pointing and depth-dominant: the SHIFT posture.
    inline HandSpec shift_hand()
    {
        HandSpec s;
        s.extended = {false, true, false, false, false};
        s.tip_z = {0.0, -0.08, -0.01, 0.0, 0.0};
        return s;
    }

    inline HandSpec rotate_hand()
    {
        HandSpec s;
        s.extended = {false, false, true, false, false};
        s.tip_z = {0.0, -0.01, -0.08, 0.0, 0.0};
        return s;
    }

    /// Thumb tip placed `pinch_norm_x` to the left of the index tip; ring, little and middle curled.
    inline HandSpec pinch_hand(double pinch_norm_x)
    {
        HandSpec s;
        s.extended = {false, true, false, false, false};
        s.tip_z = {0.0, -0.01, -0.01, 0.0, 0.0};
        s.place_thumb = true;
        s.thumb_x = s.wrist_x + kFingerOffsets[1] - pinch_norm_x;
        s.thumb_y = s.wrist_y - 0.30;
        return s;
    }

    inline LandmarkFrame translate(LandmarkFrame f, double dx, double dy)
    {
        for (auto &l : f.landmarks)
        {
            l.x += dx;
            l.y += dy;
        }
        return f;
    }

    inline std::filesystem::path temp_path(const std::string &name)
    {
        auto dir = std::filesystem::temp_directory_path() / "touchless-tests";
        std::filesystem::create_directories(dir);
        auto p = dir / (std::to_string(::getpid()) + "-" + name);
        std::filesystem::remove(p);
        return p;
    }

    inline std::filesystem::path data_path(const std::string &name)
    {
        return std::filesystem::path(TOUCHLESS_SOURCE_DIR) / name;
    }
}
