// Hand-built two-sheet GYMLGS steric zipper used as an offline template.
//
// Strand A is grown from ideal beta internal coordinates, laid along z with
// residue 3's side chain pointing +x (towards the second sheet). B is A
// rotated 180 degrees about y and stacked one strand spacing up the fibril
// axis, so A and B are antiparallel. G and H are A and B under the sheet
// transform. Only chains A, B, G, H are present; the rest of the fibril is
// generated by the assembly stage.

#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "mutation.hpp"
#include "pdb_io.hpp"
#include "vec3.hpp"

namespace zipper {

namespace impl {

// Places D so that |CD| = bond, angle(B, C, D) = angle, dihedral(A, B, C, D)
// = torsion (degrees).
inline Vec3 place_atom(const Vec3& a, const Vec3& b, const Vec3& c, double bond, double angle,
                       double torsion) {
  const double deg = std::numbers::pi / 180.0;
  Vec3 bc = (c - b).normalized();
  Vec3 n = (b - a).cross(bc).normalized();
  Vec3 m = n.cross(bc);
  double th = angle * deg, ph = torsion * deg;
  Vec3 d(-bond * std::cos(th), bond * std::sin(th) * std::cos(ph),
         bond * std::sin(th) * std::sin(ph));
  return c + bc * d.x + m * d.y + n * d.z;
}

struct SideAtom {
  const char* name;
  const char* element;
  // Parents are given by name inside the residue; torsion references them.
  const char* a;
  const char* b;
  const char* c;
  double bond, angle, torsion;
};

// Side-chain rotamers (chi1, chi2, chi3) of the template residues. The
// defaults are the clash-free combination for the assembled four chains.
struct Rotamers {
  double tyr[2] = {-60.0, -90.0};
  double met[3] = {-60.0, 60.0, -60.0};
  double leu[2] = {-60.0, -60.0};
  double ser = -60.0;
};

// Heavy side-chain atoms beyond CB for the template residues.
inline std::vector<SideAtom> side_chain(const std::string& res, const Rotamers& rot) {
  if (res == "SER")
    return {{"OG", "O", "N", "CA", "CB", 1.417, 110.8, rot.ser}};
  if (res == "LEU")
    return {{"CG", "C", "N", "CA", "CB", 1.530, 116.1, rot.leu[0]},
            {"CD1", "C", "CA", "CB", "CG", 1.524, 110.3, rot.leu[1]},
            {"CD2", "C", "CA", "CB", "CG", 1.525, 110.6, rot.leu[1] + 120.0}};
  if (res == "MET")
    return {{"CG", "C", "N", "CA", "CB", 1.520, 114.1, rot.met[0]},
            {"SD", "S", "CA", "CB", "CG", 1.807, 112.7, rot.met[1]},
            {"CE", "C", "CB", "CG", "SD", 1.791, 100.8, rot.met[2]}};
  if (res == "TYR")
    return {{"CG", "C", "N", "CA", "CB", 1.512, 113.8, rot.tyr[0]},
            {"CD1", "C", "CA", "CB", "CG", 1.389, 120.8, rot.tyr[1]},
            {"CD2", "C", "CA", "CB", "CG", 1.389, 120.8, rot.tyr[1] + 180.0},
            {"CE1", "C", "CB", "CG", "CD1", 1.382, 121.2, 180.0},
            {"CE2", "C", "CB", "CG", "CD2", 1.382, 121.2, 180.0},
            {"CZ", "C", "CG", "CD1", "CE1", 1.378, 119.6, 0.0},
            {"OH", "O", "CD1", "CE1", "CZ", 1.376, 119.9, 180.0}};
  return {};
}

inline std::string three_letter(char code) {
  switch (code) {
    case 'G': return "GLY";
    case 'Y': return "TYR";
    case 'M': return "MET";
    case 'L': return "LEU";
    case 'S': return "SER";
    case 'A': return "ALA";
    default: throw ArgumentError(std::string("no template geometry for residue '") + code + "'");
  }
}

// Ideal extended strand in a local frame, before orientation.
inline Chain grow_strand(const std::string& sequence, char chain_id, double phi, double psi,
                         const Rotamers& rot) {
  Chain chain{chain_id, {}};
  Vec3 n(0, 0, 0), ca(1.458, 0, 0);
  Vec3 c = ca + Vec3(std::cos(std::numbers::pi - 111.2 * std::numbers::pi / 180) * 1.525,
                     std::sin(std::numbers::pi - 111.2 * std::numbers::pi / 180) * 1.525, 0);
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    if (i > 0) {
      Vec3 pn = chain.residues.back().find("N")->pos;
      Vec3 pca = chain.residues.back().find("CA")->pos;
      Vec3 pc = chain.residues.back().find("C")->pos;
      n = place_atom(pn, pca, pc, 1.329, 116.2, psi);
      ca = place_atom(pca, pc, n, 1.458, 121.7, 180.0);
      c = place_atom(pc, n, ca, 1.525, 111.2, phi);
    }
    Residue r{three_letter(sequence[i]), static_cast<int>(i + 1), {}};
    auto add = [&](const char* name, const char* el, const Vec3& p) {
      Atom a;
      a.name = name;
      a.element = el;
      a.res_name = r.name;
      a.res_seq = r.seq;
      a.chain_id = chain_id;
      a.pos = p;
      a.temp_factor = 20.0;
      r.atoms.push_back(a);
    };
    add("N", "N", n);
    add("CA", "C", ca);
    add("C", "C", c);
    // Carbonyl O is trans to the following N.
    Vec3 o = place_atom(n, ca, c, 1.231, 120.5, psi + 180.0);
    add("O", "O", o);
    chain.residues.push_back(std::move(r));
  }
  for (Residue& r : chain.residues) {
    if (r.name == "GLY")
      continue;
    Vec3 cb = place_cb(r.find("N")->pos, r.find("CA")->pos, r.find("C")->pos);
    Atom a = *r.find("CA");
    a.name = "CB";
    a.pos = cb;
    r.atoms.push_back(a);
    for (const SideAtom& sa : side_chain(r.name, rot)) {
      Atom s = a;
      s.name = sa.name;
      s.element = sa.element;
      s.pos = place_atom(r.find(sa.a)->pos, r.find(sa.b)->pos, r.find(sa.c)->pos, sa.bond,
                         sa.angle, sa.torsion);
      r.atoms.push_back(s);
    }
  }
  return chain;
}

}  // namespace impl

inline constexpr const char* kTemplateSequence = "GYMLGS";

// Residue rise and side-chain facing come from the backbone; the strand is
// oriented with its CA axis along +z, centred on the origin, and residue 3's
// CA->CB pointing +x.
inline Structure synthetic_template(const impl::Rotamers& rot = {}) {
  Chain a = impl::grow_strand(kTemplateSequence, 'A', -120.0, 130.0, rot);

  std::vector<Vec3> cas;
  for (const Residue& r : a.residues)
    cas.push_back(r.find("CA")->pos);
  Vec3 axis = (cas.back() + cas[cas.size() - 2] - cas[0] - cas[1]).normalized();
  const Residue& r3 = a.residues[2];
  Vec3 side = r3.find("CB")->pos - r3.find("CA")->pos;
  side = (side - axis * side.dot(axis)).normalized();
  Vec3 third = axis.cross(side);
  Vec3 centroid;
  for (const Vec3& p : cas)
    centroid += p;
  centroid = centroid / static_cast<double>(cas.size());

  Mat3 frame;  // rows map into (side, third, axis) = (x, y, z)
  for (int c = 0; c < 3; ++c) {
    frame(0, c) = side[c];
    frame(1, c) = third[c];
    frame(2, c) = axis[c];
  }
  for (Residue& r : a.residues)
    for (Atom& at : r.atoms) {
      at.pos = frame * (at.pos - centroid);
      // Coordinates are stored at file precision.
      for (int c = 0; c < 3; ++c)
        at.pos[c] = std::round(at.pos[c] * 1000.0) / 1000.0;
    }

  Structure sheet1;
  sheet1.chains.push_back(a);
  RigidTransform antiparallel{Mat3::diagonal(-1, 1, -1), {0.0, kSheetTranslation.y, 0.0}};
  merge_into(sheet1, apply_structure(antiparallel, select_chains(sheet1, "A"), {{'A', 'B'}}));
  Structure s = sheet1;
  merge_into(s, apply_structure(sheet_transform(), sheet1, {{'A', 'G'}, {'B', 'H'}}));
  for (Chain& c : s.chains)
    for (Residue& r : c.residues)
      for (Atom& at : r.atoms)
        for (int k = 0; k < 3; ++k)
          at.pos[k] = std::round(at.pos[k] * 1000.0) / 1000.0;
  renumber(s);
  return s;
}

}  // namespace zipper
