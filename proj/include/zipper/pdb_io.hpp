// In-memory structure model and fixed-column PDB coordinate I/O.
//
// Only ATOM, TER, END and ENDMDL records are interpreted. Everything else
// (headers, HETATM, CONECT, ...) is skipped.

#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <filesystem>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "vec3.hpp"

namespace zipper {

struct Atom {
  int serial = 0;
  std::string name;        // trimmed, e.g. "CB"
  char alt_loc = ' ';
  std::string res_name;    // e.g. "ALA"
  char chain_id = ' ';
  int res_seq = 0;
  Vec3 pos;
  double occupancy = 1.0;
  double temp_factor = 0.0;
  std::string element;     // e.g. "C"

  bool is_hydrogen() const { return element == "H" || element == "D"; }
};

struct Residue {
  std::string name;
  int seq = 0;
  std::vector<Atom> atoms;

  Atom* find(std::string_view atom_name) {
    for (Atom& a : atoms)
      if (a.name == atom_name)
        return &a;
    return nullptr;
  }
  const Atom* find(std::string_view atom_name) const {
    return const_cast<Residue*>(this)->find(atom_name);
  }
};

struct Chain {
  char id = ' ';
  std::vector<Residue> residues;

  Residue* find_residue(int seq) {
    for (Residue& r : residues)
      if (r.seq == seq)
        return &r;
    return nullptr;
  }
  const Residue* find_residue(int seq) const {
    return const_cast<Chain*>(this)->find_residue(seq);
  }
  std::size_t atom_count() const {
    std::size_t n = 0;
    for (const Residue& r : residues)
      n += r.atoms.size();
    return n;
  }
};

struct Structure {
  std::vector<Chain> chains;

  Chain* find_chain(char id) {
    for (Chain& c : chains)
      if (c.id == id)
        return &c;
    return nullptr;
  }
  const Chain* find_chain(char id) const { return const_cast<Structure*>(this)->find_chain(id); }

  Chain& chain(char id) {
    if (Chain* c = find_chain(id))
      return *c;
    throw NotFoundError(std::string("no chain ") + id);
  }
  const Chain& chain(char id) const { return const_cast<Structure*>(this)->chain(id); }

  std::size_t atom_count() const {
    std::size_t n = 0;
    for (const Chain& c : chains)
      n += c.atom_count();
    return n;
  }

  // Visits atoms in canonical order: chains, then residues, then atoms,
  // each in stored order. Pair lists index into this order.
  template <typename F>
  void for_each_atom(F&& f) {
    for (Chain& c : chains)
      for (Residue& r : c.residues)
        for (Atom& a : r.atoms)
          f(a);
  }
  template <typename F>
  void for_each_atom(F&& f) const {
    for (const Chain& c : chains)
      for (const Residue& r : c.residues)
        for (const Atom& a : r.atoms)
          f(a);
  }

  std::string chain_ids() const {
    std::string ids;
    for (const Chain& c : chains)
      ids += c.id;
    return ids;
  }
};

// chain.res_seq.atom, written "A:3:CB".
struct AtomAddress {
  char chain = ' ';
  int res_seq = 0;
  std::string name;

  bool operator==(const AtomAddress&) const = default;

  std::string to_string() const {
    return std::string(1, chain) + ":" + std::to_string(res_seq) + ":" + name;
  }

  static AtomAddress parse(std::string_view text) {
    auto c1 = text.find(':');
    auto c2 = c1 == std::string_view::npos ? c1 : text.find(':', c1 + 1);
    if (c1 != 1 || c2 == std::string_view::npos || c2 + 1 >= text.size())
      throw ArgumentError("bad atom address '" + std::string(text) + "' (expected e.g. A:3:CB)");
    AtomAddress addr;
    addr.chain = text[0];
    std::string_view num = text.substr(c1 + 1, c2 - c1 - 1);
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), addr.res_seq);
    if (ec != std::errc() || p != num.data() + num.size())
      throw ArgumentError("bad residue number in atom address '" + std::string(text) + "'");
    addr.name = std::string(text.substr(c2 + 1));
    return addr;
  }
};

struct ParseStats {
  std::size_t atoms = 0;
  std::size_t dropped_altlocs = 0;
  std::size_t skipped_records = 0;
};

namespace impl {

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t'))
    ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t'))
    --e;
  return s.substr(b, e - b);
}

// Columns are 1-based and inclusive, like the format documentation.
inline std::string_view columns(std::string_view line, std::size_t first, std::size_t last) {
  if (line.size() < first)
    return {};
  return line.substr(first - 1, std::min(last, line.size()) - (first - 1));
}

template <typename T>
T parse_number(std::string_view field, std::size_t line_no, const char* what) {
  std::string_view t = trim(field);
  if (!t.empty() && t.front() == '+')
    t.remove_prefix(1);
  T value{};
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || p != t.data() + t.size())
    throw ParseError(line_no, std::string("malformed ") + what + " field '" + std::string(field) + "'");
  return value;
}

inline std::string infer_element(std::string_view raw_name) {
  // Columns 13-14 hold the element for standard names (" CA " -> C).
  std::string el;
  for (char c : raw_name.substr(0, 2))
    if (std::isalpha(static_cast<unsigned char>(c)))
      el += c;
  if (raw_name.size() >= 1 && raw_name[0] == ' ' && !el.empty())
    el.resize(1);
  if (el.empty()) {
    for (char c : raw_name)
      if (std::isalpha(static_cast<unsigned char>(c)))
        return std::string(1, c);
  }
  return el;
}

}  // namespace impl

inline Atom parse_atom_line(std::string_view line, std::size_t line_no) {
  using impl::columns;
  using impl::trim;
  if (line.size() < 54)
    throw ParseError(line_no, "ATOM record shorter than 54 columns");
  Atom a;
  a.serial = impl::parse_number<int>(columns(line, 7, 11), line_no, "serial");
  std::string_view raw_name = columns(line, 13, 16);
  a.name = std::string(trim(raw_name));
  if (a.name.empty())
    throw ParseError(line_no, "empty atom name");
  a.alt_loc = line[16];
  a.res_name = std::string(trim(columns(line, 18, 20)));
  a.chain_id = line[21];
  a.res_seq = impl::parse_number<int>(columns(line, 23, 26), line_no, "residue number");
  a.pos.x = impl::parse_number<double>(columns(line, 31, 38), line_no, "x");
  a.pos.y = impl::parse_number<double>(columns(line, 39, 46), line_no, "y");
  a.pos.z = impl::parse_number<double>(columns(line, 47, 54), line_no, "z");
  if (!a.pos.is_finite())
    throw ParseError(line_no, "non-finite coordinate");
  std::string_view occ = trim(columns(line, 55, 60));
  if (!occ.empty())
    a.occupancy = impl::parse_number<double>(occ, line_no, "occupancy");
  std::string_view tf = trim(columns(line, 61, 66));
  if (!tf.empty())
    a.temp_factor = impl::parse_number<double>(tf, line_no, "temperature factor");
  std::string_view el = trim(columns(line, 77, 78));
  a.element = el.empty() ? impl::infer_element(raw_name) : std::string(el);
  return a;
}

inline Structure parse_pdb(std::string_view text, ParseStats* stats = nullptr) {
  ParseStats local;
  ParseStats& st = stats ? *stats : local;
  Structure s;
  Chain* current = nullptr;  // null after TER or before the first atom
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos)
      eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);

    std::string_view rec = impl::trim(impl::columns(line, 1, 6));
    if (rec == "ATOM") {
      Atom a = parse_atom_line(line, line_no);
      if (a.alt_loc != ' ' && a.alt_loc != 'A') {
        ++st.dropped_altlocs;
        continue;
      }
      if (!current || current->id != a.chain_id) {
        if (s.find_chain(a.chain_id))
          throw StructureError("line " + std::to_string(line_no) + ": duplicate chain id '" +
                               std::string(1, a.chain_id) + "'");
        s.chains.push_back(Chain{a.chain_id, {}});
        current = &s.chains.back();
      }
      if (current->residues.empty() || current->residues.back().seq != a.res_seq ||
          current->residues.back().name != a.res_name)
        current->residues.push_back(Residue{a.res_name, a.res_seq, {}});
      current->residues.back().atoms.push_back(std::move(a));
      ++st.atoms;
    } else if (rec == "TER") {
      current = nullptr;
    } else if (rec == "END" || rec == "ENDMDL") {
      break;
    } else if (!impl::trim(line).empty()) {
      ++st.skipped_records;
    }
  }
  return s;
}

inline Structure read_pdb_file(const std::filesystem::path& path, ParseStats* stats = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IOError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_pdb(ss.str(), stats);
}

namespace impl {

inline void put_coord(char* out, double v, const Atom& a) {
  char buf[32];
  int n = std::snprintf(buf, sizeof buf, "%8.3f", v);
  if (!std::isfinite(v) || n != 8)
    throw FormatError("coordinate " + std::to_string(v) + " of atom " + std::to_string(a.serial) +
                      " does not fit the 8.3 column format");
  std::memcpy(out, buf, 8);
}

inline std::string padded_atom_name(const Atom& a) {
  if (a.name.size() >= 4 || a.element.size() == 2)
    return a.name;
  return " " + a.name;
}

}  // namespace impl

inline std::string format_atom_line(const Atom& a) {
  if (a.serial < 1 || a.serial > 99999)
    throw FormatError("atom serial " + std::to_string(a.serial) + " outside 1..99999");
  if (a.res_seq < -999 || a.res_seq > 9999)
    throw FormatError("residue number " + std::to_string(a.res_seq) + " does not fit 4 columns");
  if (a.name.empty() || a.name.size() > 4 || a.res_name.size() > 3 || a.element.size() > 2)
    throw FormatError("atom " + std::to_string(a.serial) + " has an over-long label");
  char buf[96];
  std::snprintf(buf, sizeof buf, "ATOM  %5d %-4s%c%-3s %c%4d    ", a.serial,
                impl::padded_atom_name(a).c_str(), a.alt_loc, a.res_name.c_str(), a.chain_id,
                a.res_seq);
  std::string line(buf);
  line.resize(54, ' ');
  impl::put_coord(&line[30], a.pos.x, a);
  impl::put_coord(&line[38], a.pos.y, a);
  impl::put_coord(&line[46], a.pos.z, a);
  std::snprintf(buf, sizeof buf, "%6.2f%6.2f          %2s", a.occupancy, a.temp_factor,
                a.element.c_str());
  if (std::strlen(buf) != 24)
    throw FormatError("occupancy/temperature factor of atom " + std::to_string(a.serial) +
                      " does not fit 6.2 columns");
  line += buf;
  return line;
}

// Emits ATOM records, TER after each chain, END last. Atom serials must be
// strictly increasing in output order (see renumber()).
inline std::string write_pdb(const Structure& s) {
  std::string out;
  int last_serial = 0;
  for (const Chain& c : s.chains) {
    const Atom* last = nullptr;
    for (const Residue& r : c.residues) {
      for (const Atom& a : r.atoms) {
        if (a.serial <= last_serial)
          throw FormatError("atom serials not strictly increasing at serial " +
                            std::to_string(a.serial));
        last_serial = a.serial;
        out += format_atom_line(a);
        out += '\n';
        last = &a;
      }
    }
    if (last) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "TER   %5d      %-3s %c%4d", last->serial + 1,
                    last->res_name.c_str(), last->chain_id, last->res_seq);
      out += buf;
      out += '\n';
      last_serial = last->serial + 1;
    }
  }
  out += "END\n";
  return out;
}

inline void write_pdb_file(const Structure& s, const std::filesystem::path& path) {
  std::string text = write_pdb(s);
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IOError("cannot write " + path.string());
  out << text;
}

// Sequential serials starting at 1; each TER consumes one serial.
inline void renumber(Structure& s) {
  int serial = 1;
  for (Chain& c : s.chains) {
    std::size_t n = 0;
    for (Residue& r : c.residues)
      for (Atom& a : r.atoms) {
        a.serial = serial++;
        ++n;
      }
    if (n)
      ++serial;
  }
}

// Residue numbers 1..n within each chain, in stored order.
inline void renumber_residues(Structure& s) {
  for (Chain& c : s.chains) {
    int seq = 1;
    for (Residue& r : c.residues) {
      r.seq = seq++;
      for (Atom& a : r.atoms)
        a.res_seq = r.seq;
    }
  }
}

// Checks chain-id uniqueness and that every atom agrees with its parents.
inline void validate(const Structure& s) {
  for (std::size_t i = 0; i < s.chains.size(); ++i) {
    const Chain& c = s.chains[i];
    for (std::size_t j = i + 1; j < s.chains.size(); ++j)
      if (s.chains[j].id == c.id)
        throw StructureError(std::string("duplicate chain id '") + c.id + "'");
    for (const Residue& r : c.residues)
      for (const Atom& a : r.atoms) {
        if (a.chain_id != c.id || a.res_seq != r.seq || a.res_name != r.name)
          throw StructureError("atom " + std::to_string(a.serial) + " (" + a.name +
                               ") disagrees with its chain/residue");
        if (a.name.empty())
          throw StructureError("atom with empty name");
        if (!a.pos.is_finite())
          throw StructureError("atom " + std::to_string(a.serial) + " has non-finite position");
      }
  }
}

namespace impl {

template <typename S, typename A>
A& find_atom_impl(S& s, char chain, int res_seq, std::string_view name) {
  std::vector<A*> hits;
  for (auto& c : s.chains) {
    if (c.id != chain)
      continue;
    for (auto& r : c.residues) {
      if (r.seq != res_seq)
        continue;
      for (auto& a : r.atoms)
        if (a.name == name)
          hits.push_back(&a);
    }
  }
  std::string label = std::string(1, chain) + ":" + std::to_string(res_seq) + ":" +
                      std::string(name);
  if (hits.empty())
    throw NotFoundError("atom " + label + " not found");
  if (hits.size() == 1)
    return *hits.front();
  std::vector<A*> preferred;
  for (A* a : hits)
    if (a->alt_loc == ' ' || a->alt_loc == 'A')
      preferred.push_back(a);
  if (preferred.size() == 1)
    return *preferred.front();
  throw AmbiguityError("atom " + label + " matches " + std::to_string(hits.size()) + " records");
}

}  // namespace impl

inline const Atom& find_atom(const Structure& s, char chain, int res_seq, std::string_view name) {
  return impl::find_atom_impl<const Structure, const Atom>(s, chain, res_seq, name);
}
inline Atom& find_atom(Structure& s, char chain, int res_seq, std::string_view name) {
  return impl::find_atom_impl<Structure, Atom>(s, chain, res_seq, name);
}
inline const Atom& find_atom(const Structure& s, const AtomAddress& addr) {
  return find_atom(s, addr.chain, addr.res_seq, addr.name);
}
inline Atom& find_atom(Structure& s, const AtomAddress& addr) {
  return find_atom(s, addr.chain, addr.res_seq, addr.name);
}

// Position of the addressed atom in canonical (for_each_atom) order.
inline std::size_t atom_index(const Structure& s, const AtomAddress& addr) {
  const Atom* target = &find_atom(s, addr);
  std::size_t i = 0, found = 0;
  bool hit = false;
  s.for_each_atom([&](const Atom& a) {
    if (&a == target) {
      found = i;
      hit = true;
    }
    ++i;
  });
  if (!hit)
    throw NotFoundError("atom " + addr.to_string() + " not found");
  return found;
}

inline AtomAddress address_of(const Atom& a) { return {a.chain_id, a.res_seq, a.name}; }

inline std::vector<Vec3> positions(const Structure& s) {
  std::vector<Vec3> out;
  out.reserve(s.atom_count());
  s.for_each_atom([&](const Atom& a) { out.push_back(a.pos); });
  return out;
}

inline void set_positions(Structure& s, const std::vector<Vec3>& pos) {
  if (pos.size() != s.atom_count())
    throw ArgumentError("position count does not match atom count");
  std::size_t i = 0;
  s.for_each_atom([&](Atom& a) { a.pos = pos[i++]; });
}

// One-letter code for the residues this project handles.
inline char one_letter(std::string_view res_name) {
  static constexpr std::pair<std::string_view, char> table[] = {
      {"ALA", 'A'}, {"ARG", 'R'}, {"ASN", 'N'}, {"ASP", 'D'}, {"CYS", 'C'},
      {"GLN", 'Q'}, {"GLU", 'E'}, {"GLY", 'G'}, {"HIS", 'H'}, {"ILE", 'I'},
      {"LEU", 'L'}, {"LYS", 'K'}, {"MET", 'M'}, {"PHE", 'F'}, {"PRO", 'P'},
      {"SER", 'S'}, {"THR", 'T'}, {"TRP", 'W'}, {"TYR", 'Y'}, {"VAL", 'V'}};
  for (auto [three, one] : table)
    if (three == res_name)
      return one;
  return 'X';
}

inline std::string sequence_of(const Chain& c) {
  std::string seq;
  for (const Residue& r : c.residues)
    seq += one_letter(r.name);
  return seq;
}

}  // namespace zipper
