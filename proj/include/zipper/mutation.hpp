// Mutation to alanine or glycine by side-chain truncation, with beta-carbon
// construction when the source residue has none (glycine to alanine).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "error.hpp"
#include "pdb_io.hpp"
#include "vec3.hpp"

namespace zipper {

enum class MutationTarget { ALA, GLY };

inline constexpr double kCaCbBond = 1.532;      // Angstrom
inline constexpr double kNCaCbAngle = 110.1;    // degrees

inline MutationTarget mutation_target(char code) {
  switch (code) {
    case 'A': return MutationTarget::ALA;
    case 'G': return MutationTarget::GLY;
    default:
      throw ArgumentError(std::string("unsupported mutation target '") + code +
                          "' (only A and G)");
  }
}

inline const char* residue_name(MutationTarget t) { return t == MutationTarget::ALA ? "ALA" : "GLY"; }

// CB at kCaCbBond from CA, making kNCaCbAngle with N (and C). The direction
// lies in the plane of the backbone-angle bisector (pointing away from N and
// C) and the N-CA-C plane normal, on the L-amino-acid side.
inline Vec3 place_cb(const Vec3& n, const Vec3& ca, const Vec3& c) {
  Vec3 to_n = (n - ca).normalized();
  Vec3 to_c = (c - ca).normalized();
  Vec3 bisector = (to_n + to_c).normalized();
  Vec3 normal = to_n.cross(to_c).normalized();
  double half = std::acos(std::clamp(to_n.dot(bisector), -1.0, 1.0));
  double target = kNCaCbAngle * std::numbers::pi / 180.0;
  // angle(N, CB) satisfies cos = -cos(phi) cos(half).
  double cos_phi = std::clamp(-std::cos(target) / std::cos(half), -1.0, 1.0);
  double phi = std::acos(cos_phi);
  Vec3 dir = -bisector * std::cos(phi) + normal * std::sin(phi);
  return ca + dir * kCaCbBond;
}

inline bool is_backbone(std::string_view name) {
  return name == "N" || name == "CA" || name == "C" || name == "O";
}

inline void mutate_residue(Residue& res, MutationTarget target) {
  const Atom* n = res.find("N");
  const Atom* ca = res.find("CA");
  const Atom* c = res.find("C");
  const Atom* o = res.find("O");
  if (!n || !ca || !c || !o)
    throw StructureError("residue " + res.name + " " + std::to_string(res.seq) +
                         " lacks a backbone atom (N, CA, C, O)");
  const std::string new_name = residue_name(target);
  if (res.name == new_name)
    return;

  std::vector<Atom> kept;
  for (const Atom& a : res.atoms)
    if (is_backbone(a.name) || (target == MutationTarget::ALA && a.name == "CB"))
      kept.push_back(a);
  if (target == MutationTarget::ALA &&
      std::none_of(kept.begin(), kept.end(), [](const Atom& a) { return a.name == "CB"; })) {
    Atom cb = *ca;
    cb.name = "CB";
    cb.element = "C";
    cb.serial = 0;
    cb.pos = place_cb(n->pos, ca->pos, c->pos);
    kept.push_back(cb);
  }
  for (Atom& a : kept)
    a.res_name = new_name;
  res.atoms = std::move(kept);
  res.name = new_name;
}

inline Structure mutate_residue(const Structure& s, char chain, int res_seq,
                                MutationTarget target) {
  Structure out = s;
  Residue* r = out.chain(chain).find_residue(res_seq);
  if (!r)
    throw NotFoundError("no residue " + std::string(1, chain) + ":" + std::to_string(res_seq));
  mutate_residue(*r, target);
  return out;
}

// Position-by-position mutation; `sequence` is one-letter codes (A or G)
// covering the whole chain. Residues already of the target type are left
// untouched.
inline Structure mutate_sequence(const Structure& s, char chain, std::string_view sequence) {
  Structure out = s;
  Chain& c = out.chain(chain);
  if (sequence.size() != c.residues.size())
    throw ArgumentError("sequence '" + std::string(sequence) + "' has " +
                        std::to_string(sequence.size()) + " residues, chain " +
                        std::string(1, chain) + " has " + std::to_string(c.residues.size()));
  std::vector<MutationTarget> targets;
  for (char code : sequence)
    targets.push_back(mutation_target(code));
  for (std::size_t i = 0; i < targets.size(); ++i)
    mutate_residue(c.residues[i], targets[i]);
  return out;
}

}  // namespace zipper
