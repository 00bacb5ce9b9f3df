// Shared helpers for the unit suites: seeded generators and small builders.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pdb_io.hpp"
#include "vec3.hpp"

namespace testing_support {

using namespace zipper;

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  Vec3 vec(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }
  Vec3 unit_vec() {
    for (;;) {
      Vec3 v = vec(-1, 1);
      double l = v.length();
      if (l > 0.1 && l <= 1.0)
        return v / l;
    }
  }
  Mat3 rotation() { return rotation_about(unit_vec(), uniform(-std::numbers::pi, std::numbers::pi)); }

  // Points with every pairwise distance at least `min_sep`.
  std::vector<Vec3> spread_points(std::size_t n, double box, double min_sep) {
    std::vector<Vec3> pts;
    while (pts.size() < n) {
      Vec3 p = vec(-box, box);
      bool ok = true;
      for (const Vec3& q : pts)
        ok = ok && distance(p, q) >= min_sep;
      if (ok)
        pts.push_back(p);
    }
    return pts;
  }
};

inline Atom make_atom(char chain, int seq, const std::string& res, const std::string& name,
                      const Vec3& pos, const std::string& element = "C") {
  Atom a;
  a.name = name;
  a.res_name = res;
  a.chain_id = chain;
  a.res_seq = seq;
  a.pos = pos;
  a.element = element;
  return a;
}

// Adds an atom, creating the chain/residue as needed.
inline void add_atom(Structure& s, const Atom& a) {
  Chain* c = s.find_chain(a.chain_id);
  if (!c) {
    s.chains.push_back(Chain{a.chain_id, {}});
    c = &s.chains.back();
  }
  if (c->residues.empty() || c->residues.back().seq != a.res_seq)
    c->residues.push_back(Residue{a.res_name, a.res_seq, {}});
  c->residues.back().atoms.push_back(a);
}

inline double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  static std::random_device rd;
  auto dir = std::filesystem::temp_directory_path() /
             ("zipper-test-" + tag + "-" + std::to_string(rd()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing_support
