#pragma once

// Procedural action library: deterministic named motions (and a hash-driven
// generic fallback) used in place of mocap files.

#include <cmath>
#include <string>

#include "uvcloth/body.hpp"
#include "uvcloth/motion.hpp"

namespace uvc {

namespace detail {

inline uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

// smooth ramp over the first fifth of the sequence so settled cloth is not
// kicked by a velocity step at frame 0
inline double envelope(double t01) {
  double t = std::clamp(t01 * 5.0, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

}  // namespace detail

// Synthesizes `frames` frames of a named action for the given skeleton.
// Known names: arm_swing, walk, punch, jump, sway, twist, squat, side_step,
// reach, kick; any other name falls back to a hash-parameterized wiggle.
inline MotionSequence synthesize_motion(const Skeleton& skeleton, const std::string& action,
                                        int frames, double fps = 30.0) {
  if (frames < kMinMotionFrames) frames = kMinMotionFrames;
  MotionSequence m;
  m.frame_rate = fps;
  for (const Bone& b : skeleton.bones) m.bone_names.push_back(b.name);

  auto bone = [&](const char* name) { return skeleton.find(name); };
  const int ual = bone("upper_arm_l"), uar = bone("upper_arm_r");
  const int lal = bone("lower_arm_l"), lar = bone("lower_arm_r");
  const int ull = bone("upper_leg_l"), ulr = bone("upper_leg_r");
  const int lll = bone("lower_leg_l"), llr = bone("lower_leg_r");
  const int torso = bone("torso"), neck = bone("neck");

  const uint64_t hash = detail::fnv1a(action);

  for (int k = 0; k < frames; ++k) {
    double t = static_cast<double>(k) / fps;             // seconds
    double e = detail::envelope(static_cast<double>(k) / frames);
    PoseFrame f = identity_pose(skeleton);

    auto set = [&](int b, const Vec3& axis, double angle) {
      if (b >= 0) f.rotations[b] = Quat::axis_angle(axis, angle * e);
    };

    if (action == "arm_swing") {
      double a = 0.9 * std::sin(2.0 * M_PI * 0.8 * t);
      set(ual, {0, 0, 1}, a);
      set(uar, {0, 0, 1}, -a);
      set(lal, {0, 0, 1}, 0.4 * std::sin(2.0 * M_PI * 0.8 * t + 0.9));
      set(lar, {0, 0, 1}, -0.4 * std::sin(2.0 * M_PI * 0.8 * t + 0.9));
    } else if (action == "walk") {
      double a = 0.55 * std::sin(2.0 * M_PI * 1.2 * t);
      set(ull, {1, 0, 0}, a);
      set(ulr, {1, 0, 0}, -a);
      set(lll, {1, 0, 0}, 0.5 * std::max(0.0, -std::sin(2.0 * M_PI * 1.2 * t)));
      set(llr, {1, 0, 0}, 0.5 * std::max(0.0, std::sin(2.0 * M_PI * 1.2 * t)));
      set(ual, {1, 0, 0}, -0.35 * a / 0.55);
      set(uar, {1, 0, 0}, 0.35 * a / 0.55);
      f.root_translation = {0, 0.02 * std::abs(std::sin(2.0 * M_PI * 1.2 * t)), 0.35 * t * e};
    } else if (action == "punch") {
      double cycle = std::fmod(t * 1.6, 1.0);
      double jab = std::sin(M_PI * std::min(1.0, cycle * 2.0));
      set(uar, {0, 1, 0}, 1.15 * jab);
      set(lar, {0, 1, 0}, 0.55 * jab);
      set(torso, {0, 1, 0}, -0.35 * jab);
      set(ual, {0, 0, 1}, 0.5);
    } else if (action == "jump") {
      double cycle = std::fmod(t * 1.1, 1.0);
      double up = std::max(0.0, std::sin(2.0 * M_PI * cycle));
      set(ual, {0, 0, 1}, 1.1 * up);
      set(uar, {0, 0, 1}, -1.1 * up);
      set(lll, {1, 0, 0}, 0.8 * std::max(0.0, -std::sin(2.0 * M_PI * cycle)));
      set(llr, {1, 0, 0}, 0.8 * std::max(0.0, -std::sin(2.0 * M_PI * cycle)));
      f.root_translation = {0, 0.22 * up * e, 0};
    } else if (action == "sway") {
      set(torso, {0, 0, 1}, 0.25 * std::sin(2.0 * M_PI * 0.5 * t));
      set(neck, {0, 0, 1}, 0.15 * std::sin(2.0 * M_PI * 0.5 * t + 0.5));
      set(ual, {0, 0, 1}, 0.2 * std::sin(2.0 * M_PI * 0.5 * t));
      set(uar, {0, 0, 1}, 0.2 * std::sin(2.0 * M_PI * 0.5 * t));
    } else if (action == "twist") {
      double a = 0.6 * std::sin(2.0 * M_PI * 0.7 * t);
      set(torso, {0, 1, 0}, a);
      set(neck, {0, 1, 0}, 0.4 * a);
      set(ual, {0, 1, 0}, 0.3 * a);
      set(uar, {0, 1, 0}, 0.3 * a);
    } else if (action == "squat") {
      double d = 0.5 * (1.0 - std::cos(2.0 * M_PI * 0.6 * t));
      set(ull, {1, 0, 0}, -0.9 * d);
      set(ulr, {1, 0, 0}, -0.9 * d);
      set(lll, {1, 0, 0}, 1.5 * d);
      set(llr, {1, 0, 0}, 1.5 * d);
      set(ual, {0, 1, 0}, -0.9 * d);
      set(uar, {0, 1, 0}, 0.9 * d);
      f.root_translation = {0, -0.24 * d * e, 0};
    } else if (action == "side_step") {
      double a = std::sin(2.0 * M_PI * 0.8 * t);
      set(ull, {0, 0, 1}, 0.35 * std::max(0.0, a));
      set(ulr, {0, 0, 1}, 0.35 * std::min(0.0, a));
      f.root_translation = {0.18 * a * e, 0, 0};
    } else if (action == "reach") {
      double d = 0.5 * (1.0 - std::cos(2.0 * M_PI * 0.55 * t));
      set(ual, {0, 1, 0}, -1.2 * d);
      set(uar, {0, 1, 0}, 1.2 * d);
      set(torso, {1, 0, 0}, 0.25 * d);
    } else if (action == "kick") {
      double cycle = std::fmod(t * 1.4, 1.0);
      double kick = std::sin(M_PI * std::min(1.0, cycle * 2.0));
      set(ull, {1, 0, 0}, -1.0 * kick);
      set(lll, {1, 0, 0}, 0.6 * kick);
      set(ual, {1, 0, 0}, 0.4 * kick);
      set(uar, {1, 0, 0}, -0.4 * kick);
    } else {
      // generic action: per-bone sinusoids parameterized by the name hash
      for (int b = 0; b < skeleton.bone_count(); ++b) {
        uint64_t h = hash ^ (0x9e3779b97f4a7c15ull * (b + 1));
        double amp = 0.15 + 0.45 * ((h >> 8) % 1000) / 1000.0;
        double freq = 0.4 + 0.9 * ((h >> 24) % 1000) / 1000.0;
        double phase = 2.0 * M_PI * ((h >> 40) % 1000) / 1000.0;
        int axis = static_cast<int>(h % 3);
        Vec3 ax{axis == 0 ? 1.0 : 0.0, axis == 1 ? 1.0 : 0.0, axis == 2 ? 1.0 : 0.0};
        if (b == 0) continue;  // keep the root level
        set(b, ax, amp * std::sin(2.0 * M_PI * freq * t + phase));
      }
    }
    m.frames.push_back(std::move(f));
  }
  validate_motion(m);
  return m;
}

}  // namespace uvc
