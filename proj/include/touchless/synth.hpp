#pragma once

#include "touchless/gesture.hpp"
#include "touchless/trace.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace touchless
{
    class SpecInvalid : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    enum class SegmentKind : std::uint8_t
    {
        idle,
        shift_line,
        rotate_arc,
        pinch_ramp,
    };

    /// One scripted stretch of hand motion. Positions and distances are in pixels of the
    /// script's resolution. `x`,`y` default to the image centre and give the index tip's start
    /// for shift-line, the circle centre of the middle tip for rotate-arc, and the fixed index
    /// tip for pinch-ramp.
    struct Segment
    {
        SegmentKind kind = SegmentKind::idle;
        int frames = 0;
        double x = -1.0;
        double y = -1.0;
        double speed = 0.0;     // shift-line: px per frame
        double angle_deg = 0.0; // shift-line: heading
        double radius = 60.0;   // rotate-arc
        double omega_deg = 4.0; // rotate-arc: degrees per frame
        double phase_deg = 0.0; // rotate-arc: start angle
        double from = 0.0;      // pinch-ramp: px
        double to = 0.0;        // pinch-ramp: px
        double noise = 0.0;     // uniform additive px amplitude on every landmark
        int hold_every = 0;     // every k-th frame repeats the previous pose
        int still = 0;          // trailing frames that hold the final pose
        bool hand = true;       // idle only
    };

    struct SynthScript
    {
        std::uint32_t width = 1280;
        std::uint32_t height = 720;
        double fps = 30.0;
        std::uint64_t seed = 1;
        std::uint64_t start_frame = 1;
        std::uint64_t start_time_us = 0;
        std::vector<Segment> segments;
    };

    inline std::string_view to_string(SegmentKind k) noexcept
    {
        switch (k)
        {
        case SegmentKind::shift_line:
            return "shift-line";
        case SegmentKind::rotate_arc:
            return "rotate-arc";
        case SegmentKind::pinch_ramp:
            return "pinch-ramp";
        case SegmentKind::idle:
            break;
        }
        return "idle";
    }

    /// Parses the line-oriented script format:
    ///
    ///     # ts-synth/1
    ///     resolution 1280 720
    ///     fps 30
    ///     seed 7
    ///     segment shift-line frames=90 speed=6 angle=0 hold_every=6
    ///     segment idle frames=30 hand=false
    inline SynthScript parse_synth_script(std::istream &in)
    {
        SynthScript sc;
        std::string line;
        int line_no = 0;
        auto fail = [&](const std::string &what) { throw SpecInvalid("line " + std::to_string(line_no) + ": " + what); };
        auto number = [&](const std::string &s) {
            try
            {
                std::size_t used = 0;
                double v = std::stod(s, &used);
                if (used != s.size() || !std::isfinite(v))
                    fail("bad number '" + s + "'");
                return v;
            }
            catch (const std::logic_error &)
            {
                fail("bad number '" + s + "'");
            }
            return 0.0;
        };
        auto integer = [&](const std::string &s) {
            double v = number(s);
            if (v != std::floor(v) || v < 0)
                fail("expected a non-negative integer, got '" + s + "'");
            return static_cast<std::int64_t>(v);
        };
        while (std::getline(in, line))
        {
            ++line_no;
            if (auto hash = line.find('#'); hash != std::string::npos)
                line.erase(hash);
            std::istringstream ls(line);
            std::string head;
            if (!(ls >> head))
                continue;
            if (head == "resolution")
            {
                std::string w, h;
                if (!(ls >> w >> h))
                    fail("resolution needs width and height");
                sc.width = static_cast<std::uint32_t>(integer(w));
                sc.height = static_cast<std::uint32_t>(integer(h));
                if (sc.width < 1 || sc.height < 1)
                    fail("resolution must be >= 1");
            }
            else if (head == "fps")
            {
                std::string v;
                ls >> v;
                sc.fps = number(v);
                if (!(sc.fps > 0))
                    fail("fps must be > 0");
            }
            else if (head == "seed")
            {
                std::string v;
                ls >> v;
                sc.seed = static_cast<std::uint64_t>(integer(v));
            }
            else if (head == "start_frame")
            {
                std::string v;
                ls >> v;
                sc.start_frame = static_cast<std::uint64_t>(integer(v));
            }
            else if (head == "start_time_us")
            {
                std::string v;
                ls >> v;
                sc.start_time_us = static_cast<std::uint64_t>(integer(v));
            }
            else if (head == "segment")
            {
                std::string kind;
                if (!(ls >> kind))
                    fail("segment needs a kind");
                Segment seg;
                if (kind == "idle")
                    seg.kind = SegmentKind::idle;
                else if (kind == "shift-line")
                    seg.kind = SegmentKind::shift_line;
                else if (kind == "rotate-arc")
                    seg.kind = SegmentKind::rotate_arc;
                else if (kind == "pinch-ramp")
                    seg.kind = SegmentKind::pinch_ramp;
                else
                    fail("unknown segment kind '" + kind + "'");
                std::string kv;
                bool have_from = false, have_to = false;
                while (ls >> kv)
                {
                    auto eq = kv.find('=');
                    if (eq == std::string::npos)
                        fail("expected key=value, got '" + kv + "'");
                    const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
                    if (key == "frames")
                        seg.frames = static_cast<int>(integer(val));
                    else if (key == "x")
                        seg.x = number(val);
                    else if (key == "y")
                        seg.y = number(val);
                    else if (key == "speed")
                        seg.speed = number(val);
                    else if (key == "angle")
                        seg.angle_deg = number(val);
                    else if (key == "radius")
                        seg.radius = number(val);
                    else if (key == "omega")
                        seg.omega_deg = number(val);
                    else if (key == "phase")
                        seg.phase_deg = number(val);
                    else if (key == "from")
                        seg.from = number(val), have_from = true;
                    else if (key == "to")
                        seg.to = number(val), have_to = true;
                    else if (key == "noise")
                        seg.noise = number(val);
                    else if (key == "hold_every")
                        seg.hold_every = static_cast<int>(integer(val));
                    else if (key == "still")
                        seg.still = static_cast<int>(integer(val));
                    else if (key == "hand")
                    {
                        if (val != "true" && val != "false")
                            fail("hand must be true or false");
                        seg.hand = val == "true";
                    }
                    else
                        fail("unknown segment key '" + key + "'");
                }
                if (seg.frames < 1)
                    fail("segment needs frames >= 1");
                if (seg.noise < 0)
                    fail("noise must be >= 0");
                if (seg.still >= seg.frames)
                    fail("still must be smaller than frames");
                if (seg.kind == SegmentKind::pinch_ramp && (!have_from || !have_to || seg.from < 0 || seg.to < 0))
                    fail("pinch-ramp needs from= and to= distances >= 0");
                if (seg.kind == SegmentKind::rotate_arc && !(seg.radius > 0))
                    fail("rotate-arc radius must be > 0");
                sc.segments.push_back(seg);
            }
            else
            {
                fail("unknown directive '" + head + "'");
            }
        }
        return sc;
    }

    inline SynthScript parse_synth_script(const std::string &text)
    {
        std::istringstream is(text);
        return parse_synth_script(is);
    }

    namespace detail
    {
        struct P2
        {
            double x;
            double y;
        };

        inline P2 operator+(P2 a, P2 b) { return {a.x + b.x, a.y + b.y}; }
        inline P2 operator-(P2 a, P2 b) { return {a.x - b.x, a.y - b.y}; }
        inline P2 operator*(P2 a, double k) { return {a.x * k, a.y * k}; }

        enum class Posture
        {
            point_index,  // SHIFT
            point_middle, // ROTATE
            pinch,        // ZOOM (or NONE when the pinch is open)
            open_palm,    // NONE
        };

        struct HandModel
        {
            std::array<P2, kLandmarkCount> px{};
            std::array<double, kLandmarkCount> z{};
        };

        // Hand in pixel offsets from the wrist (y grows downward), sized for a 720-px-tall image.
        inline HandModel build_hand(Posture posture, double pinch_px, double scale)
        {
            HandModel h;
            const std::array<P2, 5> mcp = {P2{-40, -35}, P2{-35, -100}, P2{-5, -105}, P2{22, -100}, P2{45, -88}};
            const std::array<P2, 5> dir = {P2{-0.7, -0.7}, P2{-0.2, -0.98}, P2{0.0, -1.0}, P2{0.2, -0.98}, P2{0.4, -0.92}};
            auto extended_for = [&](Finger f) {
                switch (posture)
                {
                case Posture::point_index:
                    return f == Finger::index;
                case Posture::point_middle:
                    return f == Finger::middle;
                case Posture::pinch:
                    return f == Finger::index;
                case Posture::open_palm:
                    return true;
                }
                return false;
            };
            const Finger dominant = posture == Posture::point_index    ? Finger::index
                                    : posture == Posture::point_middle ? Finger::middle
                                                                       : Finger::thumb;
            h.px[lm::wrist] = {0, 0};
            h.z[lm::wrist] = 0.0;
            for (std::size_t i = 1; i < kFingerCount; ++i)
            {
                const auto f = static_cast<Finger>(i);
                const std::size_t base = 1 + 4 * i;
                const P2 m = mcp[i], d = dir[i];
                h.px[base] = m;
                h.px[base + 1] = m + d * 25;
                if (extended_for(f))
                {
                    h.px[base + 2] = m + d * 55;
                    h.px[base + 3] = m + d * 85;
                }
                else
                {
                    h.px[base + 2] = m + d * 18 + P2{0, 8};
                    h.px[base + 3] = m + d * 5 + P2{0, 12};
                }
                const double tip_z = f == dominant ? -0.08 : -0.01;
                for (std::size_t k = 0; k < 4; ++k)
                    h.z[base + k] = tip_z * static_cast<double>(k + 1) / 4.0;
            }
            // Thumb: tucked across the palm unless pinching, where its tip sits pinch_px left of the index tip.
            P2 thumb_tip = posture == Posture::open_palm ? P2{-95, -80} : P2{60, -30};
            if (posture == Posture::pinch)
                thumb_tip = h.px[lm::index_tip] + P2{-pinch_px, 0};
            const P2 cmc = mcp[0] * 0.5;
            h.px[1] = cmc;
            h.px[2] = cmc + (thumb_tip - cmc) * 0.4;
            h.px[3] = cmc + (thumb_tip - cmc) * 0.7;
            h.px[4] = thumb_tip;
            for (std::size_t k = 1; k <= 4; ++k)
                h.z[k] = -0.01 * static_cast<double>(k) / 4.0;
            for (auto &p : h.px)
                p = p * scale;
            // pinch distance is a pixel quantity and must not be rescaled.
            if (posture == Posture::pinch)
            {
                const P2 tip = h.px[lm::index_tip];
                h.px[4] = tip + P2{-pinch_px, 0};
                h.px[3] = h.px[1] + (h.px[4] - h.px[1]) * 0.7;
                h.px[2] = h.px[1] + (h.px[4] - h.px[1]) * 0.4;
            }
            return h;
        }

        // Uniform in [-1, 1) from the raw 64-bit stream; the standard distributions are not
        // specified bit-for-bit across library implementations.
        inline double unit_noise(std::mt19937_64 &rng)
        {
            return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
        }
    }

    /// Renders a script into frames and checks that every frame fires exactly the predicate
    /// its segment intends under `cfg` (SHIFT for shift-line, ROTATE for rotate-arc, ZOOM
    /// for pinch-ramp while the pinch is within the engage distance, NONE otherwise).
    inline std::vector<LandmarkFrame> synthesize(const SynthScript &sc, const ModeConfig &cfg = {})
    {
        using namespace detail;
        const EffectiveConfig eff = effective(cfg);
        std::mt19937_64 rng(sc.seed);
        std::vector<LandmarkFrame> frames;
        const double W = sc.width, H = sc.height;
        const double scale = H / 720.0;
        const double frame_us = 1e6 / sc.fps;
        std::uint64_t index = 0;
        for (std::size_t si = 0; si < sc.segments.size(); ++si)
        {
            const Segment &seg = sc.segments[si];
            const P2 anchor{seg.x >= 0 ? seg.x : W / 2, seg.y >= 0 ? seg.y : H / 2};
            const int moving_frames = seg.frames - seg.still;
            int holds = 0;
            if (seg.hold_every > 0)
                holds = (moving_frames - 1) / seg.hold_every;
            const int steps = std::max(1, moving_frames - 1 - holds);
            int progress = 0;
            for (int i = 0; i < seg.frames; ++i)
            {
                const bool hold = i > 0 && (i >= moving_frames || (seg.hold_every > 0 && i % seg.hold_every == 0));
                if (i > 0 && !hold)
                    ++progress;
                LandmarkFrame f;
                f.frame_id = sc.start_frame + index;
                f.t_capture_us = sc.start_time_us + static_cast<std::uint64_t>(std::llround(static_cast<double>(index) * frame_us));
                f.width = sc.width;
                f.height = sc.height;
                ++index;
                if (seg.kind == SegmentKind::idle && !seg.hand)
                {
                    frames.push_back(std::move(f));
                    continue;
                }
                Posture posture = Posture::open_palm;
                P2 tip_target = anchor;
                double pinch = 0.0;
                std::size_t tracked = lm::index_tip;
                Mode intended = Mode::none;
                switch (seg.kind)
                {
                case SegmentKind::shift_line:
                {
                    posture = Posture::point_index;
                    const double a = seg.angle_deg * std::numbers::pi / 180.0;
                    tip_target = anchor + P2{std::cos(a), std::sin(a)} * (seg.speed * progress);
                    intended = Mode::shift;
                    break;
                }
                case SegmentKind::rotate_arc:
                {
                    posture = Posture::point_middle;
                    tracked = lm::middle_tip;
                    const double a = (seg.phase_deg + seg.omega_deg * progress) * std::numbers::pi / 180.0;
                    tip_target = anchor + P2{std::cos(a), std::sin(a)} * seg.radius;
                    intended = Mode::rotate;
                    break;
                }
                case SegmentKind::pinch_ramp:
                {
                    posture = Posture::pinch;
                    pinch = seg.from + (seg.to - seg.from) * std::min(1.0, static_cast<double>(progress) / steps);
                    break;
                }
                case SegmentKind::idle:
                    break;
                }
                HandModel hand = build_hand(posture, pinch, scale);
                const P2 offset = tip_target - hand.px[tracked];
                f.hand_present = true;
                f.landmarks.resize(kLandmarkCount);
                for (std::size_t k = 0; k < kLandmarkCount; ++k)
                {
                    P2 p = hand.px[k] + offset;
                    if (seg.noise > 0)
                    {
                        p.x += seg.noise * unit_noise(rng);
                        p.y += seg.noise * unit_noise(rng);
                    }
                    const double nx = p.x / W, ny = p.y / H;
                    if (!(nx >= 0.0 && nx <= 1.0 && ny >= 0.0 && ny <= 1.0))
                    {
                        throw SpecInvalid("segment " + std::to_string(si + 1) + " (" + std::string(to_string(seg.kind)) +
                                          ") leaves the image at frame " + std::to_string(i));
                    }
                    f.landmarks[k] = {nx, ny, hand.z[k]};
                }
                const FingerPose pose = finger_pose(f, eff);
                const double pinch_px = pinch_distance(f);
                if (seg.kind == SegmentKind::pinch_ramp && pinch_px / f.diagonal() <= eff.pinch_engage)
                    intended = Mode::zoom;
                const Mode got = raw_mode(pose, pinch_px, f.diagonal(), eff);
                if (got != intended)
                {
                    throw SpecInvalid("segment " + std::to_string(si + 1) + " (" + std::string(to_string(seg.kind)) +
                                      ") frame " + std::to_string(i) + " fires " + std::string(to_string(got)) +
                                      " instead of " + std::string(to_string(intended)));
                }
                frames.push_back(std::move(f));
            }
        }
        return frames;
    }
}
