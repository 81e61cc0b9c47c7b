#pragma once

// Motion sequences: per-frame local bone rotations + root translation, with a
// plain-text file format and a small procedural action generator used to
// stand in for mocap sources.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "uvcloth/math.hpp"

namespace uvc {

struct MotionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PoseFrame {
  Vec3 root_translation;         // meters
  std::vector<Quat> rotations;   // one unit quaternion per bone, skeleton order
};

struct MotionSequence {
  double frame_rate = 30.0;              // Hz
  std::vector<std::string> bone_names;   // column order of the frame records
  std::vector<PoseFrame> frames;

  int frame_count() const { return static_cast<int>(frames.size()); }
};

// Sequences shorter than this cannot provide the two-frame difference window.
inline constexpr int kMinMotionFrames = 5;

inline void validate_motion(const MotionSequence& m) {
  if (m.frame_count() < kMinMotionFrames)
    throw MotionError("motion has " + std::to_string(m.frame_count()) + " frames, need >= " +
                      std::to_string(kMinMotionFrames));
  if (m.frame_rate <= 0.0) throw MotionError("non-positive frame rate");
  for (size_t k = 0; k < m.frames.size(); ++k) {
    const PoseFrame& f = m.frames[k];
    if (f.rotations.size() != m.bone_names.size())
      throw MotionError("frame " + std::to_string(k) + " has wrong rotation count");
    for (const Quat& q : f.rotations)
      if (std::abs(quat_norm(q) - 1.0) > 1e-3)
        throw MotionError("frame " + std::to_string(k) + " has a non-unit quaternion");
  }
}

// Format:
//   bones: name1 name2 ...
//   fps: <float>
//   tx ty tz  (w x y z) per bone       -- one line per frame
inline MotionSequence load_motion(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MotionError("cannot open " + path);

  MotionSequence m;
  std::string line;
  int lineno = 0;
  bool have_bones = false, have_fps = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    if (!have_bones) {
      std::string tag;
      is >> tag;
      if (tag != "bones:") throw MotionError(path + ":" + std::to_string(lineno) + ": expected 'bones:'");
      std::string name;
      while (is >> name) m.bone_names.push_back(name);
      if (m.bone_names.empty())
        throw MotionError(path + ":" + std::to_string(lineno) + ": no bone names");
      have_bones = true;
    } else if (!have_fps) {
      std::string tag;
      is >> tag;
      if (tag != "fps:" || !(is >> m.frame_rate))
        throw MotionError(path + ":" + std::to_string(lineno) + ": expected 'fps: <float>'");
      have_fps = true;
    } else {
      PoseFrame f;
      if (!(is >> f.root_translation.x >> f.root_translation.y >> f.root_translation.z))
        throw MotionError(path + ":" + std::to_string(lineno) + ": malformed root translation");
      f.rotations.reserve(m.bone_names.size());
      for (size_t b = 0; b < m.bone_names.size(); ++b) {
        Quat q;
        if (!(is >> q.w >> q.x >> q.y >> q.z))
          throw MotionError(path + ":" + std::to_string(lineno) + ": malformed rotation for bone " +
                            m.bone_names[b]);
        f.rotations.push_back(q);
      }
      double trailing;
      if (is >> trailing)
        throw MotionError(path + ":" + std::to_string(lineno) + ": trailing values on frame line");
      m.frames.push_back(std::move(f));
    }
  }
  validate_motion(m);
  return m;
}

inline void save_motion(const MotionSequence& m, const std::string& path) {
  validate_motion(m);
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw MotionError("cannot write " + path);
  std::fprintf(f, "bones:");
  for (const auto& n : m.bone_names) std::fprintf(f, " %s", n.c_str());
  std::fprintf(f, "\nfps: %.9g\n", m.frame_rate);
  for (const PoseFrame& fr : m.frames) {
    std::fprintf(f, "%.9g %.9g %.9g", fr.root_translation.x, fr.root_translation.y,
                 fr.root_translation.z);
    for (const Quat& q : fr.rotations)
      std::fprintf(f, " %.9g %.9g %.9g %.9g", q.w, q.x, q.y, q.z);
    std::fprintf(f, "\n");
  }
  bool bad = std::ferror(f) != 0;
  if (std::fclose(f) != 0) bad = true;
  if (bad) throw MotionError("I/O failure writing " + path);
}

}  // namespace uvc
