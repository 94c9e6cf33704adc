#pragma once

#include "touchless/landmark.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace touchless
{
    enum class Mode : std::uint8_t
    {
        none = 0,
        shift = 1,
        rotate = 2,
        zoom = 3,
    };

    inline constexpr std::string_view to_string(Mode m) noexcept
    {
        switch (m)
        {
        case Mode::shift:
            return "SHIFT";
        case Mode::rotate:
            return "ROTATE";
        case Mode::zoom:
            return "ZOOM";
        case Mode::none:
            break;
        }
        return "NONE";
    }

    inline std::optional<Mode> parse_mode(std::string_view s) noexcept
    {
        if (s == "NONE")
            return Mode::none;
        if (s == "SHIFT")
            return Mode::shift;
        if (s == "ROTATE")
            return Mode::rotate;
        if (s == "ZOOM")
            return Mode::zoom;
        return std::nullopt;
    }

    class ConfigInvalid : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    /// Tunables of the gesture state machine. Thresholds on depth and displacement
    /// are dimensionless; pinch_engage and dead_zone are fractions of the image diagonal.
    struct ModeConfig
    {
        double depth_threshold = 0.04;
        double depth_delta_margin = 0.015;
        double extension_ratio = 1.3;
        double pinch_engage = 0.06;
        double dead_zone = 0.0015;
        double shift_gain = 1.0;
        double rotate_gain = 1.0;
        double zoom_gain = 1.0;
        double sensitivity = 1.0;
        int hysteresis_frames = 2;
        // Flip when the tracker reports larger z for points closer to the camera.
        bool invert_depth = false;

        friend bool operator==(const ModeConfig &, const ModeConfig &) = default;
    };

    /// ModeConfig with the global sensitivity folded in.
    struct EffectiveConfig
    {
        double depth_threshold;
        double depth_delta_margin;
        double extension_ratio;
        double pinch_engage;
        double dead_zone;
        double shift_gain;
        double rotate_gain;
        double zoom_gain;
        int hysteresis_frames;
        double depth_sign;
    };

    /// Resolves sensitivity s: depth thresholds and the dead zone are divided by s,
    /// gains multiplied by s. pinch_engage is an upper bound on the pinch distance, so it
    /// is multiplied by s to keep "higher s = easier to trigger" for every predicate.
    /// The extension ratio is a posture definition and is left unscaled.
    inline EffectiveConfig effective(const ModeConfig &cfg)
    {
        auto positive = [](double v, const char *name) {
            if (!(v > 0.0) || !std::isfinite(v))
            {
                throw ConfigInvalid(std::string(name) + " must be a finite value > 0");
            }
        };
        positive(cfg.sensitivity, "sensitivity");
        positive(cfg.depth_threshold, "depth_threshold");
        positive(cfg.depth_delta_margin, "depth_delta_margin");
        positive(cfg.extension_ratio, "extension_ratio");
        positive(cfg.pinch_engage, "pinch_engage");
        positive(cfg.dead_zone, "dead_zone");
        for (auto [v, name] : {std::pair{cfg.shift_gain, "shift_gain"}, std::pair{cfg.rotate_gain, "rotate_gain"},
                               std::pair{cfg.zoom_gain, "zoom_gain"}})
        {
            if (!std::isfinite(v))
            {
                throw ConfigInvalid(std::string(name) + " must be finite");
            }
        }
        if (cfg.hysteresis_frames < 0)
        {
            throw ConfigInvalid("hysteresis_frames must be >= 0");
        }
        const double s = cfg.sensitivity;
        return EffectiveConfig{
            .depth_threshold = cfg.depth_threshold / s,
            .depth_delta_margin = cfg.depth_delta_margin / s,
            .extension_ratio = cfg.extension_ratio,
            .pinch_engage = cfg.pinch_engage * s,
            .dead_zone = cfg.dead_zone / s,
            .shift_gain = cfg.shift_gain * s,
            .rotate_gain = cfg.rotate_gain * s,
            .zoom_gain = cfg.zoom_gain * s,
            .hysteresis_frames = cfg.hysteresis_frames,
            .depth_sign = cfg.invert_depth ? -1.0 : 1.0,
        };
    }

    struct FingerPose
    {
        std::array<bool, kFingerCount> extended{};
        // z_wrist - z_tip; positive when the tip is nearer the camera than the wrist.
        std::array<double, kFingerCount> rel_depth{};

        bool is_extended(Finger f) const noexcept { return extended[static_cast<std::size_t>(f)]; }
        double depth(Finger f) const noexcept { return rel_depth[static_cast<std::size_t>(f)]; }
    };

    /// Extension test compares tip-to-wrist against pip-to-wrist distance in normalized
    /// image coordinates. Requires a hand-present frame.
    inline FingerPose finger_pose(const LandmarkFrame &frame, double extension_ratio, double depth_sign = 1.0)
    {
        FingerPose pose;
        const auto &l = frame.landmarks;
        const Landmark &wrist = l[lm::wrist];
        auto dist = [&](const Landmark &a) { return std::hypot(a.x - wrist.x, a.y - wrist.y); };
        for (std::size_t i = 0; i < kFingerCount; ++i)
        {
            const auto f = static_cast<Finger>(i);
            const Landmark &tip = l[tip_of(f)];
            const Landmark &pip = l[pip_of(f)];
            pose.extended[i] = dist(tip) >= extension_ratio * dist(pip);
            pose.rel_depth[i] = depth_sign * (wrist.z - tip.z);
        }
        return pose;
    }

    inline FingerPose finger_pose(const LandmarkFrame &frame, const EffectiveConfig &cfg)
    {
        return finger_pose(frame, cfg.extension_ratio, cfg.depth_sign);
    }

    /// Euclidean thumb-index tip distance in pixels.
    inline double pinch_distance(const LandmarkFrame &frame)
    {
        return pixel_distance(to_pixels(frame, lm::index_tip), to_pixels(frame, lm::thumb_tip));
    }

    inline bool zoom_predicate(const FingerPose &pose, double pinch_px, double diag, const EffectiveConfig &cfg) noexcept
    {
        return pinch_px / diag <= cfg.pinch_engage && !pose.is_extended(Finger::ring) &&
               !pose.is_extended(Finger::little) && !pose.is_extended(Finger::middle);
    }

    // Depth dominance of `lead` over `other`.
    inline bool dominance_predicate(const FingerPose &pose, Finger lead, Finger other, const EffectiveConfig &cfg) noexcept
    {
        return pose.is_extended(lead) && pose.depth(lead) > cfg.depth_threshold &&
               pose.depth(lead) > pose.depth(other) + cfg.depth_delta_margin;
    }

    inline bool shift_predicate(const FingerPose &pose, const EffectiveConfig &cfg) noexcept
    {
        return dominance_predicate(pose, Finger::index, Finger::middle, cfg);
    }

    inline bool rotate_predicate(const FingerPose &pose, const EffectiveConfig &cfg) noexcept
    {
        return dominance_predicate(pose, Finger::middle, Finger::index, cfg);
    }

    /// Mode implied by a single frame, before hysteresis. Priority ZOOM > SHIFT > ROTATE.
    inline Mode raw_mode(const FingerPose &pose, double pinch_px, double diag, const EffectiveConfig &cfg) noexcept
    {
        if (zoom_predicate(pose, pinch_px, diag, cfg))
            return Mode::zoom;
        if (shift_predicate(pose, cfg))
            return Mode::shift;
        if (rotate_predicate(pose, cfg))
            return Mode::rotate;
        return Mode::none;
    }

    struct GestureState
    {
        Mode mode = Mode::none;
        std::optional<PixelPoint> prev_tip;
        std::optional<double> prev_pinch;
        Mode candidate_mode = Mode::none;
        int candidate_count = 0;

        friend bool operator==(const GestureState &, const GestureState &) = default;
    };

    struct ModeSelection
    {
        Mode mode = Mode::none;
        Mode candidate_mode = Mode::none;
        int candidate_count = 0;
        bool zoom_aborted = false;
    };

    /// Applies hysteresis to the raw mode: a switch commits once the same raw mode has been
    /// seen on hysteresis_frames consecutive frames. Extending the middle finger while
    /// zooming leaves ZOOM on the same frame.
    inline ModeSelection select_mode(const FingerPose &pose, double pinch_px, double diag, const EffectiveConfig &cfg,
                                     const GestureState &state) noexcept
    {
        const Mode raw = raw_mode(pose, pinch_px, diag, cfg);
        ModeSelection sel;
        Mode current = state.mode;
        if (current == Mode::zoom && pose.is_extended(Finger::middle))
        {
            current = Mode::none;
            sel.zoom_aborted = true;
        }
        if (raw == current)
        {
            sel.mode = current;
            return sel;
        }
        const int count = raw == state.candidate_mode ? state.candidate_count + 1 : 1;
        if (count >= std::max(1, cfg.hysteresis_frames))
        {
            sel.mode = raw;
            return sel;
        }
        sel.mode = current;
        sel.candidate_mode = raw;
        sel.candidate_count = count;
        return sel;
    }

    inline ModeSelection select_mode(const FingerPose &pose, double pinch_px, double diag, const ModeConfig &cfg,
                                     const GestureState &state)
    {
        return select_mode(pose, pinch_px, diag, effective(cfg), state);
    }

    struct Command
    {
        Mode kind = Mode::none;
        double dx = 0.0;
        double dy = 0.0;
        double dzoom = 0.0;

        bool empty() const noexcept { return kind == Mode::none; }

        friend bool operator==(const Command &, const Command &) = default;
    };

    /// Per-frame quantities the logger records alongside the command.
    struct Observation
    {
        std::optional<PixelPoint> tip;
        std::optional<double> rel_depth;
        std::optional<double> pinch_px;
    };

    struct StepResult
    {
        Command command;
        GestureState state;
        Observation observation;
    };

    inline std::size_t tracking_tip(Mode m) noexcept
    {
        return m == Mode::rotate ? lm::middle_tip : lm::index_tip;
    }

    inline Finger tracking_finger(Mode m) noexcept
    {
        return m == Mode::rotate ? Finger::middle : Finger::index;
    }

    /// One state-machine transition. The first frame of a mode primes the t-1 memory and
    /// emits nothing; afterwards the tracked tip (index for SHIFT, middle for ROTATE) or the
    /// pinch distance is differenced, normalized by the image diagonal, gated by the dead
    /// zone, and scaled by the mode's gain. Positive dzoom means the pinch opened (zoom out).
    inline StepResult step(const LandmarkFrame &frame, const GestureState &state, const EffectiveConfig &cfg)
    {
        StepResult out;
        if (!frame.hand_present)
        {
            return out;
        }

        const FingerPose pose = finger_pose(frame, cfg);
        const double pinch = pinch_distance(frame);
        const double diag = frame.diagonal();
        const ModeSelection sel = select_mode(pose, pinch, diag, cfg, state);

        const Mode mode = sel.mode;
        const PixelPoint tip = to_pixels(frame, tracking_tip(mode));
        out.observation = {tip, pose.depth(tracking_finger(mode)), pinch};
        out.state.mode = mode;
        out.state.candidate_mode = sel.candidate_mode;
        out.state.candidate_count = sel.candidate_count;
        if (mode == Mode::none)
        {
            return out;
        }
        out.state.prev_tip = tip;
        out.state.prev_pinch = pinch;
        if (mode != state.mode)
        {
            return out;
        }

        Command cmd;
        if (mode == Mode::zoom)
        {
            const double dz = (pinch - *state.prev_pinch) / diag;
            if (std::abs(dz) >= cfg.dead_zone)
            {
                cmd = {Mode::zoom, 0.0, 0.0, dz * cfg.zoom_gain};
            }
        }
        else
        {
            const double dx = (tip.x - state.prev_tip->x) / diag;
            const double dy = (tip.y - state.prev_tip->y) / diag;
            if (std::hypot(dx, dy) >= cfg.dead_zone)
            {
                const double gain = mode == Mode::shift ? cfg.shift_gain : cfg.rotate_gain;
                cmd = {mode, dx * gain, dy * gain, 0.0};
            }
        }
        out.command = cmd;
        return out;
    }

    inline StepResult step(const LandmarkFrame &frame, const GestureState &state, const ModeConfig &cfg)
    {
        return step(frame, state, effective(cfg));
    }

    /// Owns the state machine for one session. Single consumer; not for concurrent use.
    class GestureEngine
    {
    public:
        explicit GestureEngine(const ModeConfig &cfg = {}) : config_(cfg), effective_(effective(cfg)) {}

        StepResult process(const LandmarkFrame &frame)
        {
            StepResult r = step(frame, state_, effective_);
            state_ = r.state;
            return r;
        }

        void reset() { state_ = {}; }

        const GestureState &state() const noexcept { return state_; }
        const ModeConfig &config() const noexcept { return config_; }
        const EffectiveConfig &effective_config() const noexcept { return effective_; }

    private:
        ModeConfig config_;
        EffectiveConfig effective_;
        GestureState state_;
    };
}
