// Rigid-body transforms over coordinates and structures.

#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "pdb_io.hpp"
#include "vec3.hpp"

namespace zipper {

struct RigidTransform {
  Mat3 rotation = Mat3::identity();
  Vec3 translation;

  static RigidTransform identity() { return {}; }
  static RigidTransform translate(const Vec3& t) { return {Mat3::identity(), t}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  bool operator==(const RigidTransform&) const = default;

  // Row-major rotation followed by the translation: 12 numbers.
  std::array<double, 12> to_array() const {
    std::array<double, 12> out{};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        out[r * 3 + c] = rotation(r, c);
    for (int i = 0; i < 3; ++i)
      out[9 + i] = translation[i];
    return out;
  }

  static RigidTransform from_array(std::span<const double> v) {
    if (v.size() != 12)
      throw ArgumentError("a rigid transform needs 12 numbers");
    RigidTransform t;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        t.rotation(r, c) = v[r * 3 + c];
    t.translation = {v[9], v[10], v[11]};
    return t;
  }

  std::string to_text() const {
    std::string out;
    char buf[32];
    auto arr = to_array();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      std::snprintf(buf, sizeof buf, i ? " %.6f" : "%.6f", arr[i]);
      out += buf;
    }
    return out;
  }
};

inline Vec3 apply(const RigidTransform& t, const Vec3& p) { return t.apply(p); }

// Result applies `a` first, then `b`.
inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {b.rotation * a.rotation, b.rotation * a.translation + b.translation};
}

inline bool is_proper_rotation(const Mat3& r, double tol = 1e-9) {
  Mat3 rtr = r.transposed() * r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (std::abs(rtr(i, j) - (i == j ? 1.0 : 0.0)) > tol)
        return false;
  return std::abs(r.determinant() - 1.0) <= tol;
}

// Two-fold about x that maps sheet 1 (chains A, B) onto sheet 2 (G, H) in
// the steric-zipper template, with its translation.
inline constexpr Mat3 kSheetRotation = Mat3::diagonal(1, -1, -1);
inline constexpr Vec3 kSheetTranslation{9.07500, 4.77650, 0.0};
// Repeat of each sheet along the fibril (y) axis.
inline constexpr double kLayerShift = 9.5530;
// Refitted sheet translation reported for the AGAAAAGA models; only used
// as a comparison point, never as an input.
inline constexpr Vec3 kReferenceContactTranslation{-0.703968, 7.43502, -0.33248};

inline RigidTransform sheet_transform() { return {kSheetRotation, kSheetTranslation}; }
inline RigidTransform layer_transform(int direction) {
  return RigidTransform::translate({0.0, direction * kLayerShift, 0.0});
}

using ChainRelabel = std::map<char, char>;

// Transforms every atom of `s` and renames chains per `relabel`, which must
// name every chain of `s` and map them to distinct ids.
inline Structure apply_structure(const RigidTransform& t, const Structure& s,
                                 const ChainRelabel& relabel) {
  Structure out;
  out.chains.reserve(s.chains.size());
  for (const Chain& c : s.chains) {
    auto it = relabel.find(c.id);
    if (it == relabel.end())
      throw LabelError(std::string("relabel map does not cover chain '") + c.id + "'");
    if (out.find_chain(it->second))
      throw LabelError(std::string("relabel maps two chains onto '") + it->second + "'");
    Chain nc = c;
    nc.id = it->second;
    for (Residue& r : nc.residues)
      for (Atom& a : r.atoms) {
        a.pos = t.apply(a.pos);
        a.chain_id = nc.id;
      }
    out.chains.push_back(std::move(nc));
  }
  return out;
}

inline Structure select_chains(const Structure& s, std::string_view ids) {
  Structure out;
  for (char id : ids)
    out.chains.push_back(s.chain(id));
  return out;
}

// Appends the chains of `extra` to `base`; ids must not collide.
inline void merge_into(Structure& base, const Structure& extra) {
  for (const Chain& c : extra.chains) {
    if (base.find_chain(c.id))
      throw LabelError(std::string("chain '") + c.id + "' already present");
    base.chains.push_back(c);
  }
}

inline void translate_chain(Chain& c, const Vec3& delta) {
  for (Residue& r : c.residues)
    for (Atom& a : r.atoms)
      a.pos += delta;
}

// Least-squares translation for a fixed rotation: minimizes
// sum |target - (R source + t)|^2, whose optimum is the mean residual.
inline RigidTransform fit_translation(const Mat3& rotation,
                                      std::span<const std::pair<Vec3, Vec3>> pairs) {
  if (pairs.empty())
    throw ArgumentError("fit_translation needs at least one point pair");
  Vec3 sum;
  for (const auto& [source, target] : pairs)
    sum += target - rotation * source;
  return {rotation, sum / static_cast<double>(pairs.size())};
}

inline RigidTransform fit_translation(const Mat3& rotation,
                                      const std::vector<std::pair<Vec3, Vec3>>& pairs) {
  return fit_translation(rotation, std::span<const std::pair<Vec3, Vec3>>(pairs));
}

}  // namespace zipper
