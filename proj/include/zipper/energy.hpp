// Lennard-Jones 12-6 and hydrogen-bond 12-10 pair energies with analytic
// gradients, evaluated over all pairs or over an explicit pair list.
//
// Conformations are flat coordinate vectors (x0, y0, z0, x1, ...). All sums
// run in a fixed order so results are reproducible bit for bit.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "pdb_io.hpp"
#include "vec3.hpp"

namespace zipper {

// Pairs closer than this are a modeling error, not a large energy.
inline constexpr double kDistanceFloor = 1e-6;

// 4 eps [(sigma/r)^12 - (sigma/r)^6] == A/r^12 - B/r^6.
struct LJParams {
  double epsilon = 1.0;
  double sigma = 1.0;

  double A() const { return 4.0 * epsilon * std::pow(sigma, 12); }
  double B() const { return 4.0 * epsilon * std::pow(sigma, 6); }
  // Separation of the pair minimum.
  double r_min() const { return std::pow(2.0, 1.0 / 6.0) * sigma; }

  static LJParams from_ab(double A, double B) {
    if (!(A > 0) || !(B > 0))
      throw ArgumentError("LJ coefficients A and B must be positive");
    return {B * B / (4.0 * A), std::pow(A / B, 1.0 / 6.0)};
  }

  void validate() const {
    if (!(epsilon > 0) || !(sigma > 0) || !std::isfinite(epsilon) || !std::isfinite(sigma))
      throw ArgumentError("LJ epsilon and sigma must be positive");
  }
};

// C/r^12 - D/r^10.
struct HBParams {
  double C = 1.0;
  double D = 1.0;

  // Minimum at r_min^2 = 6C / 5D, depth D / (6 r_min^10).
  double r_min() const { return std::sqrt(6.0 * C / (5.0 * D)); }

  static HBParams from_minimum(double r_min, double depth) {
    if (!(r_min > 0) || !(depth > 0))
      throw ArgumentError("hydrogen-bond minimum and depth must be positive");
    return {5.0 * depth * std::pow(r_min, 12), 6.0 * depth * std::pow(r_min, 10)};
  }

  void validate() const {
    if (!(C > 0) || !(D >= 0) || !std::isfinite(C) || !std::isfinite(D))
      throw ArgumentError("hydrogen-bond C must be positive and D non-negative");
  }
};

// Parameters used when nothing is supplied: reduced LJ units and a unit-depth
// hydrogen bond centred on a typical backbone N...O separation.
inline constexpr double kDefaultHBondMinimum = 2.9;
inline constexpr double kDefaultHBondCutoff = 3.5;

struct EnergyParams {
  LJParams lj;
  HBParams hb = HBParams::from_minimum(kDefaultHBondMinimum, 1.0);
  double hb_cutoff = kDefaultHBondCutoff;
};

enum class PairKind { vdw, hbond };

inline const char* to_string(PairKind k) { return k == PairKind::vdw ? "vdw" : "hbond"; }

struct AtomPair {
  std::size_t i = 0;
  std::size_t j = 0;
  PairKind kind = PairKind::vdw;

  bool operator==(const AtomPair&) const = default;
};

class PairList {
public:
  PairList() = default;

  void add(std::size_t i, std::size_t j, PairKind kind) {
    if (i == j)
      throw ArgumentError("pair list entry joins atom " + std::to_string(i) + " to itself");
    for (const AtomPair& p : pairs_)
      if (p.kind == kind && ((p.i == i && p.j == j) || (p.i == j && p.j == i)))
        throw ArgumentError("duplicate " + std::string(to_string(kind)) + " pair (" +
                            std::to_string(i) + ", " + std::to_string(j) + ")");
    pairs_.push_back({i, j, kind});
  }

  std::span<const AtomPair> pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

  std::size_t count(PairKind kind) const {
    return std::count_if(pairs_.begin(), pairs_.end(),
                         [kind](const AtomPair& p) { return p.kind == kind; });
  }

  void check_indices(std::size_t n_atoms) const {
    for (const AtomPair& p : pairs_)
      if (p.i >= n_atoms || p.j >= n_atoms)
        throw ArgumentError("pair (" + std::to_string(p.i) + ", " + std::to_string(p.j) +
                            ") out of range for " + std::to_string(n_atoms) + " atoms");
  }

  void append(const PairList& other) {
    for (const AtomPair& p : other.pairs_)
      add(p.i, p.j, p.kind);
  }

private:
  std::vector<AtomPair> pairs_;
};

using Conformation = std::vector<double>;

inline Conformation to_conformation(std::span<const Vec3> pts) {
  Conformation x;
  x.reserve(pts.size() * 3);
  for (const Vec3& p : pts) {
    x.push_back(p.x);
    x.push_back(p.y);
    x.push_back(p.z);
  }
  return x;
}

inline std::vector<Vec3> to_points(std::span<const double> x) {
  if (x.size() % 3 != 0)
    throw ArgumentError("conformation length is not a multiple of 3");
  std::vector<Vec3> pts(x.size() / 3);
  for (std::size_t k = 0; k < pts.size(); ++k)
    pts[k] = {x[3 * k], x[3 * k + 1], x[3 * k + 2]};
  return pts;
}

namespace impl {

inline Vec3 point(std::span<const double> x, std::size_t i) {
  return {x[3 * i], x[3 * i + 1], x[3 * i + 2]};
}

inline void check_conformation(std::span<const double> x) {
  if (x.size() % 3 != 0)
    throw ArgumentError("conformation length is not a multiple of 3");
}

inline double checked_distance_sq(const Vec3& d, std::size_t i, std::size_t j) {
  double r2 = d.length_sq();
  if (!(r2 > kDistanceFloor * kDistanceFloor))
    throw SingularityError(i, j, "atoms " + std::to_string(i) + " and " + std::to_string(j) +
                                     " are closer than the distance floor");
  return r2;
}

inline void check_r(double r) {
  if (!(r > kDistanceFloor))
    throw SingularityError("pair distance " + std::to_string(r) + " at or below the floor");
}

// Energy and dE/dr / r for one pair at squared distance r2.
inline double lj_from_r2(double A, double B, double r2, double* dudr_over_r) {
  double inv2 = 1.0 / r2;
  double inv6 = inv2 * inv2 * inv2;
  double inv12 = inv6 * inv6;
  if (dudr_over_r)
    *dudr_over_r = (-12.0 * A * inv12 + 6.0 * B * inv6) * inv2;
  return A * inv12 - B * inv6;
}

inline double hb_from_r2(double C, double D, double r2, double* dudr_over_r) {
  double inv2 = 1.0 / r2;
  double inv10 = std::pow(inv2, 5);
  double inv12 = inv10 * inv2;
  if (dudr_over_r)
    *dudr_over_r = (-12.0 * C * inv12 + 10.0 * D * inv10) * inv2;
  return C * inv12 - D * inv10;
}

}  // namespace impl

inline double lj_pair(const LJParams& p, double r) {
  impl::check_r(r);
  return impl::lj_from_r2(p.A(), p.B(), r * r, nullptr);
}

inline double hb_pair(const HBParams& p, double r) {
  impl::check_r(r);
  return impl::hb_from_r2(p.C, p.D, r * r, nullptr);
}

// Sum over every unordered pair i < j.
inline double lj_total(std::span<const double> x, const LJParams& p) {
  impl::check_conformation(x);
  const std::size_t n = x.size() / 3;
  const double A = p.A(), B = p.B();
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double r2 = impl::checked_distance_sq(impl::point(x, i) - impl::point(x, j), i, j);
      e += impl::lj_from_r2(A, B, r2, nullptr);
    }
  return e;
}

inline std::vector<double> lj_total_gradient(std::span<const double> x, const LJParams& p) {
  impl::check_conformation(x);
  const std::size_t n = x.size() / 3;
  const double A = p.A(), B = p.B();
  std::vector<double> g(x.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      Vec3 d = impl::point(x, i) - impl::point(x, j);
      double k;
      impl::lj_from_r2(A, B, impl::checked_distance_sq(d, i, j), &k);
      for (int c = 0; c < 3; ++c) {
        g[3 * i + c] += k * d[c];
        g[3 * j + c] -= k * d[c];
      }
    }
  return g;
}

struct EnergyBreakdown {
  double vdw = 0.0;
  double hbond = 0.0;
  double total() const { return vdw + hbond; }
};

// Energy of the listed pairs only: vdw pairs by LJ, hbond pairs by the 12-10
// form.
inline EnergyBreakdown pairlist_energy(std::span<const double> x, const LJParams& lj,
                                       const HBParams& hb, const PairList& pl) {
  impl::check_conformation(x);
  pl.check_indices(x.size() / 3);
  const double A = lj.A(), B = lj.B();
  EnergyBreakdown e;
  for (const AtomPair& p : pl.pairs()) {
    double r2 = impl::checked_distance_sq(impl::point(x, p.i) - impl::point(x, p.j), p.i, p.j);
    if (p.kind == PairKind::vdw)
      e.vdw += impl::lj_from_r2(A, B, r2, nullptr);
    else
      e.hbond += impl::hb_from_r2(hb.C, hb.D, r2, nullptr);
  }
  return e;
}

inline double lj_pairlist(std::span<const double> x, const LJParams& lj, const PairList& pl) {
  impl::check_conformation(x);
  pl.check_indices(x.size() / 3);
  const double A = lj.A(), B = lj.B();
  double e = 0.0;
  for (const AtomPair& p : pl.pairs()) {
    if (p.kind != PairKind::vdw)
      continue;
    double r2 = impl::checked_distance_sq(impl::point(x, p.i) - impl::point(x, p.j), p.i, p.j);
    e += impl::lj_from_r2(A, B, r2, nullptr);
  }
  return e;
}

// Gradient of pairlist_energy. Pass hb == nullptr to differentiate the vdw
// pairs only (the gradient of lj_pairlist).
inline std::vector<double> pairlist_gradient(std::span<const double> x, const LJParams& lj,
                                             const HBParams* hb, const PairList& pl) {
  impl::check_conformation(x);
  pl.check_indices(x.size() / 3);
  const double A = lj.A(), B = lj.B();
  std::vector<double> g(x.size(), 0.0);
  for (const AtomPair& p : pl.pairs()) {
    if (p.kind == PairKind::hbond && !hb)
      continue;
    Vec3 d = impl::point(x, p.i) - impl::point(x, p.j);
    double r2 = impl::checked_distance_sq(d, p.i, p.j);
    double k;
    if (p.kind == PairKind::vdw)
      impl::lj_from_r2(A, B, r2, &k);
    else
      impl::hb_from_r2(hb->C, hb->D, r2, &k);
    for (int c = 0; c < 3; ++c) {
      g[3 * p.i + c] += k * d[c];
      g[3 * p.j + c] -= k * d[c];
    }
  }
  return g;
}

inline std::vector<double> gradient(std::span<const double> x, const LJParams& lj,
                                    const PairList& pl) {
  return pairlist_gradient(x, lj, nullptr, pl);
}

inline EnergyBreakdown total_energy(const Structure& s, const LJParams& lj, const HBParams& hb,
                                    const PairList& pl) {
  return pairlist_energy(to_conformation(positions(s)), lj, hb, pl);
}

// Backbone N...O pairs closer than `cutoff`, excluding pairs inside one
// residue or between sequence neighbours of the same chain. Only N and O
// enter, so side-chain edits never change the result.
inline PairList detect_hbonds(const Structure& s, double cutoff = kDefaultHBondCutoff) {
  struct Site {
    std::size_t index;
    std::size_t chain;
    int res_seq;
    std::size_t residue;
    Vec3 pos;
  };
  std::vector<Site> donors, acceptors;
  std::size_t idx = 0, residue_counter = 0;
  for (std::size_t ci = 0; ci < s.chains.size(); ++ci)
    for (const Residue& r : s.chains[ci].residues) {
      for (const Atom& a : r.atoms) {
        if (a.name == "N")
          donors.push_back({idx, ci, r.seq, residue_counter, a.pos});
        else if (a.name == "O")
          acceptors.push_back({idx, ci, r.seq, residue_counter, a.pos});
        ++idx;
      }
      ++residue_counter;
    }
  PairList pl;
  const double cut2 = cutoff * cutoff;
  for (const Site& n : donors)
    for (const Site& o : acceptors) {
      if (n.residue == o.residue)
        continue;
      if (n.chain == o.chain && std::abs(n.res_seq - o.res_seq) <= 1)
        continue;
      if ((n.pos - o.pos).length_sq() < cut2)
        pl.add(n.index, o.index, PairKind::hbond);
    }
  return pl;
}

// Pair list from address pairs, resolved against the canonical atom order.
inline PairList resolve_pairs(const Structure& s,
                              std::span<const std::pair<AtomAddress, AtomAddress>> addrs,
                              PairKind kind) {
  PairList pl;
  for (const auto& [a, b] : addrs)
    pl.add(atom_index(s, a), atom_index(s, b), kind);
  return pl;
}

// Flat "key value" text (also accepts "key = value"); '#' starts a comment.
// Keys: epsilon, sigma, A, B (LJ; A/B win when both given), C, D (hydrogen
// bond), hb_cutoff (Angstrom).
inline EnergyParams parse_energy_params(std::string_view text) {
  std::map<std::string, double> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::replace(line.begin(), line.end(), '=', ' ');
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key))
      continue;
    double value;
    std::string rest;
    if (!(ls >> value) || (ls >> rest))
      throw ParseError(line_no, "expected '<key> <number>' in energy parameter file");
    static const char* known[] = {"epsilon", "sigma", "A", "B", "C", "D", "hb_cutoff"};
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* k) { return key == k; }) == std::end(known))
      throw ParseError(line_no, "unknown energy parameter '" + key + "'");
    kv[key] = value;
  }
  EnergyParams p;
  if (kv.count("A") || kv.count("B")) {
    if (!kv.count("A") || !kv.count("B"))
      throw ArgumentError("A and B must be given together");
    p.lj = LJParams::from_ab(kv["A"], kv["B"]);
  } else {
    if (kv.count("epsilon"))
      p.lj.epsilon = kv["epsilon"];
    if (kv.count("sigma"))
      p.lj.sigma = kv["sigma"];
  }
  if (kv.count("C") != kv.count("D"))
    throw ArgumentError("C and D must be given together");
  if (kv.count("C"))
    p.hb = {kv["C"], kv["D"]};
  if (kv.count("hb_cutoff"))
    p.hb_cutoff = kv["hb_cutoff"];
  p.lj.validate();
  p.hb.validate();
  if (!(p.hb_cutoff > 0))
    throw ArgumentError("hb_cutoff must be positive");
  return p;
}

// One pair per line: "<vdw|hbond> <chain:res:atom> <chain:res:atom>".
inline PairList parse_pair_file(std::string_view text, const Structure& s) {
  PairList pl;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    std::string kind, a, b, rest;
    if (!(ls >> kind))
      continue;
    if (!(ls >> a >> b) || (ls >> rest) || (kind != "vdw" && kind != "hbond"))
      throw ParseError(line_no, "expected '<vdw|hbond> <addr> <addr>' in pair file");
    pl.add(atom_index(s, AtomAddress::parse(a)), atom_index(s, AtomAddress::parse(b)),
           kind == "vdw" ? PairKind::vdw : PairKind::hbond);
  }
  return pl;
}

}  // namespace zipper
