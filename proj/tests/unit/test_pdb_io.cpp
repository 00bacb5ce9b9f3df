#include <gtest/gtest.h>

#include <sstream>

#include "synthetic.hpp"
#include "support.hpp"

using namespace zipper;
using namespace testing_support;

namespace {

const char* kLine =
    "ATOM      1  N   GLY A   1       1.000   2.000   3.000  1.00  0.00           N";

Structure random_structure(Gen& g) {
  static const char* names[] = {"N", "CA", "C", "O", "CB", "OG", "CD1", "NE2", "HD21"};
  static const char* elements[] = {"N", "C", "C", "O", "C", "O", "C", "N", "H"};
  static const char* residues[] = {"ALA", "GLY", "SER", "TYR", "LEU"};
  Structure s;
  int nchains = g.integer(1, 4);
  for (int c = 0; c < nchains; ++c) {
    char id = static_cast<char>('A' + c);
    int nres = g.integer(1, 5);
    int seq = g.integer(-20, 50);
    for (int r = 0; r < nres; ++r, ++seq) {
      std::string res = residues[g.integer(0, 4)];
      int natoms = g.integer(1, 9);
      for (int k = 0; k < natoms; ++k) {
        Atom a = make_atom(id, seq, res, names[k], {}, elements[k]);
        a.pos = Vec3(round3(g.uniform(-999, 9999)), round3(g.uniform(-999, 9999)),
                     round3(g.uniform(-999, 9999)));
        a.occupancy = std::round(g.uniform(0, 1) * 100) / 100;
        a.temp_factor = std::round(g.uniform(0, 99) * 100) / 100;
        add_atom(s, a);
      }
    }
  }
  renumber(s);
  return s;
}

void expect_same(const Structure& a, const Structure& b) {
  ASSERT_EQ(a.chains.size(), b.chains.size());
  for (std::size_t c = 0; c < a.chains.size(); ++c) {
    const Chain &ca = a.chains[c], &cb = b.chains[c];
    ASSERT_EQ(ca.id, cb.id);
    ASSERT_EQ(ca.residues.size(), cb.residues.size());
    for (std::size_t r = 0; r < ca.residues.size(); ++r) {
      const Residue &ra = ca.residues[r], &rb = cb.residues[r];
      ASSERT_EQ(ra.name, rb.name);
      ASSERT_EQ(ra.seq, rb.seq);
      ASSERT_EQ(ra.atoms.size(), rb.atoms.size());
      for (std::size_t k = 0; k < ra.atoms.size(); ++k) {
        const Atom &x = ra.atoms[k], &y = rb.atoms[k];
        EXPECT_EQ(x.serial, y.serial);
        EXPECT_EQ(x.name, y.name);
        EXPECT_EQ(x.alt_loc, y.alt_loc);
        EXPECT_EQ(x.element, y.element);
        EXPECT_EQ(x.chain_id, y.chain_id);
        EXPECT_EQ(x.res_seq, y.res_seq);
        for (int d = 0; d < 3; ++d)
          EXPECT_NEAR(x.pos[d], y.pos[d], 5e-4);
        EXPECT_NEAR(x.occupancy, y.occupancy, 5e-3);
        EXPECT_NEAR(x.temp_factor, y.temp_factor, 5e-3);
      }
    }
  }
}

}  // namespace

TEST(PdbParse, SingleAtomLineFields) {
  Structure s = parse_pdb(kLine);
  ASSERT_EQ(s.chains.size(), 1u);
  const Atom& a = s.chains[0].residues[0].atoms[0];
  EXPECT_EQ(a.serial, 1);
  EXPECT_EQ(a.name, "N");
  EXPECT_EQ(a.res_name, "GLY");
  EXPECT_EQ(a.chain_id, 'A');
  EXPECT_EQ(a.res_seq, 1);
  EXPECT_EQ(a.pos, Vec3(1.0, 2.0, 3.0));
  EXPECT_EQ(a.element, "N");
  EXPECT_DOUBLE_EQ(a.occupancy, 1.0);
}

TEST(PdbParse, EmptyInputHasNoChains) {
  EXPECT_TRUE(parse_pdb("").chains.empty());
  EXPECT_TRUE(parse_pdb("REMARK nothing here\n").chains.empty());
}

TEST(PdbParse, TerEndsChainAndOtherRecordsIgnored) {
  std::string text = std::string("HEADER    TEST\nREMARK 1\n") + kLine + "\nTER\n" +
                     "HETATM    2  O   HOH A 101       0.000   0.000   0.000  1.00  0.00           O\n" +
                     "ATOM      3  CA  GLY B   1       4.000   5.000   6.000  1.00  0.00           C\n" +
                     "END\nATOM      9  CA  GLY C   1       4.000   5.000   6.000\n";
  ParseStats st;
  Structure s = parse_pdb(text, &st);
  EXPECT_EQ(s.chain_ids(), "AB");
  EXPECT_EQ(st.atoms, 2u);
  EXPECT_EQ(st.skipped_records, 3u);
}

TEST(PdbParse, TrailingWhitespaceAndCrlf) {
  std::string text = std::string(kLine) + "     \r\n";
  Structure s = parse_pdb(text);
  EXPECT_EQ(s.chains[0].residues[0].atoms[0].element, "N");
  EXPECT_EQ(s.chains[0].residues[0].atoms[0].pos, Vec3(1, 2, 3));
}

TEST(PdbParse, MissingElementIsInferred) {
  std::string line = std::string(kLine).substr(0, 66);
  EXPECT_EQ(parse_pdb(line).chains[0].residues[0].atoms[0].element, "N");
}

TEST(PdbParse, MalformedNumberCarriesLineNumber) {
  std::string bad = kLine;
  bad.replace(30, 8, "   1.x00");
  std::string text = "REMARK\n" + std::string(kLine) + "\n" + bad + "\n";
  try {
    parse_pdb(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line_number, 3u);
  }
}

TEST(PdbParse, ShortAtomLineIsParseError) {
  EXPECT_THROW(parse_pdb("ATOM      1  N   GLY A   1       1.000   2.000"), ParseError);
}

TEST(PdbParse, DuplicateChainAfterTerIsStructureError) {
  std::string b = "ATOM      2  CA  GLY B   1       4.000   5.000   6.000  1.00  0.00           C";
  std::string text = std::string(kLine) + "\nTER\n" + b + "\nTER\n" + kLine + "\n";
  EXPECT_THROW(parse_pdb(text), StructureError);
}

TEST(PdbParse, AltlocsOtherThanAAreDroppedAndCounted) {
  std::string a = "ATOM      1  CB ASER A   1       1.000   2.000   3.000  0.50  0.00           C";
  std::string b = "ATOM      2  CB BSER A   1       1.500   2.000   3.000  0.50  0.00           C";
  ParseStats st;
  Structure s = parse_pdb(a + "\n" + b + "\n", &st);
  EXPECT_EQ(st.dropped_altlocs, 1u);
  EXPECT_EQ(s.atom_count(), 1u);
  EXPECT_EQ(find_atom(s, 'A', 1, "CB").pos.x, 1.0);
}

TEST(PdbWrite, ColumnPositions) {
  Atom a = make_atom('B', 42, "ALA", "CB", {-12.345, 6.789, 1234.5}, "C");
  a.serial = 12345;
  a.occupancy = 0.5;
  a.temp_factor = 17.25;
  std::string line = format_atom_line(a);
  ASSERT_LE(line.size(), 80u);
  EXPECT_EQ(line.substr(0, 6), "ATOM  ");
  EXPECT_EQ(line.substr(6, 5), "12345");
  EXPECT_EQ(line.substr(12, 4), " CB ");
  EXPECT_EQ(line.substr(17, 3), "ALA");
  EXPECT_EQ(line[21], 'B');
  EXPECT_EQ(line.substr(22, 4), "  42");
  EXPECT_EQ(line.substr(30, 8), " -12.345");
  EXPECT_EQ(line.substr(38, 8), "   6.789");
  EXPECT_EQ(line.substr(46, 8), "1234.500");
  EXPECT_EQ(line.substr(54, 6), "  0.50");
  EXPECT_EQ(line.substr(60, 6), " 17.25");
  EXPECT_EQ(line.substr(76, 2), " C");
}

TEST(PdbWrite, FourCharacterAndTwoLetterElementNames) {
  Atom h = make_atom('A', 1, "ASN", "HD21", {}, "H");
  h.serial = 1;
  EXPECT_EQ(format_atom_line(h).substr(12, 4), "HD21");
  Atom fe = make_atom('A', 1, "HEM", "FE", {}, "FE");
  fe.serial = 1;
  EXPECT_EQ(format_atom_line(fe).substr(12, 4), "FE  ");
}

TEST(PdbWrite, ZeroCoordinates) {
  Structure s;
  add_atom(s, make_atom('A', 1, "GLY", "CA", {0, 0, 0}));
  renumber(s);
  std::string text = write_pdb(s);
  std::string line = text.substr(0, text.find('\n'));
  EXPECT_EQ(line.substr(30, 24), "   0.000   0.000   0.000");
}

TEST(PdbWrite, TerAndEndRecords) {
  Structure s;
  add_atom(s, make_atom('A', 1, "GLY", "CA", {0, 0, 0}));
  add_atom(s, make_atom('B', 7, "ALA", "CA", {1, 0, 0}));
  renumber(s);
  std::istringstream in(write_pdb(s));
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);)
    lines.push_back(l);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[1], "TER       2      GLY A   1");
  EXPECT_EQ(lines[2].substr(6, 5), "    3");
  EXPECT_EQ(lines[3], "TER       4      ALA B   7");
  EXPECT_EQ(lines[4], "END");
}

TEST(PdbWrite, UnrepresentableCoordinateIsFormatError) {
  Structure s;
  add_atom(s, make_atom('A', 1, "GLY", "CA", {10000.0, 0, 0}));
  renumber(s);
  EXPECT_THROW(write_pdb(s), FormatError);
  s.chains[0].residues[0].atoms[0].pos = {9999.999, -999.999, 0};
  EXPECT_NO_THROW(write_pdb(s));
  s.chains[0].residues[0].atoms[0].pos = {0, -1000.0, 0};
  EXPECT_THROW(write_pdb(s), FormatError);
}

TEST(PdbWrite, NonIncreasingSerialsRejected) {
  Structure s;
  add_atom(s, make_atom('A', 1, "GLY", "CA", {0, 0, 0}));
  add_atom(s, make_atom('A', 1, "GLY", "C", {1, 0, 0}));
  s.chains[0].residues[0].atoms[0].serial = 5;
  s.chains[0].residues[0].atoms[1].serial = 5;
  EXPECT_THROW(write_pdb(s), FormatError);
}

TEST(PdbRoundTrip, RandomStructuresProperty) {
  Gen g(11);
  for (int trial = 0; trial < 200; ++trial) {
    Structure s = random_structure(g);
    std::string text = write_pdb(s);
    Structure back = parse_pdb(text);
    expect_same(s, back);
    EXPECT_EQ(write_pdb(back), text);
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);)
      EXPECT_LE(l.size(), 80u);
  }
}

TEST(PdbRoundTrip, SyntheticTemplateIsFixedPoint) {
  Structure s = synthetic_template();
  std::string once = write_pdb(s);
  std::string twice = write_pdb(parse_pdb(once));
  EXPECT_EQ(once, twice);
  expect_same(s, parse_pdb(once));
}

TEST(PdbRoundTrip, BundledTemplateFileMatchesGenerator) {
  std::string file = slurp(std::filesystem::path(ZIPPER_DATA_DIR) / "synthetic_template.pdb");
  EXPECT_EQ(file, write_pdb(synthetic_template()));
}

TEST(FindAtom, AddressesAndErrors) {
  Structure s = synthetic_template();
  const Atom& cb = find_atom(s, 'A', 3, "CB");
  EXPECT_EQ(cb.res_name, "MET");
  EXPECT_EQ(cb.chain_id, 'A');
  EXPECT_THROW(find_atom(s, 'Z', 1, "CA"), NotFoundError);
  EXPECT_THROW(find_atom(s, 'A', 99, "CA"), NotFoundError);
  EXPECT_THROW(s.chain('Z'), NotFoundError);
}

TEST(FindAtom, AltlocAPreferredElseAmbiguous) {
  Structure s;
  Atom a = make_atom('A', 1, "SER", "OG", {1, 0, 0});
  a.alt_loc = 'A';
  Atom b = make_atom('A', 1, "SER", "OG", {2, 0, 0});
  b.alt_loc = 'B';
  add_atom(s, a);
  add_atom(s, b);
  EXPECT_EQ(find_atom(s, 'A', 1, "OG").pos.x, 1.0);
  s.chains[0].residues[0].atoms[1].alt_loc = ' ';
  EXPECT_THROW(find_atom(s, 'A', 1, "OG"), AmbiguityError);
}

TEST(AtomAddressText, ParseAndFormat) {
  AtomAddress a = AtomAddress::parse("G:4:CB");
  EXPECT_EQ(a.chain, 'G');
  EXPECT_EQ(a.res_seq, 4);
  EXPECT_EQ(a.name, "CB");
  EXPECT_EQ(a.to_string(), "G:4:CB");
  EXPECT_EQ(AtomAddress::parse("A:-3:N").res_seq, -3);
  for (const char* bad : {"", "G4CB", "GG:4:CB", "G:x:CB", "G:4:", "G:4"})
    EXPECT_THROW(AtomAddress::parse(bad), ArgumentError) << bad;
}

TEST(Structure, RenumberingAndSequence) {
  Structure s = synthetic_template();
  EXPECT_EQ(s.chain_ids(), "ABGH");
  for (const Chain& c : s.chains)
    EXPECT_EQ(sequence_of(c), "GYMLGS");
  for (Chain& c : s.chains)
    for (Residue& r : c.residues) {
      r.seq += 126;
      for (Atom& a : r.atoms)
        a.res_seq = r.seq;
    }
  EXPECT_NO_THROW(validate(s));
  renumber_residues(s);
  EXPECT_EQ(s.chains[1].residues.front().seq, 1);
  EXPECT_EQ(s.chains[1].residues.back().seq, 6);
  EXPECT_NO_THROW(validate(s));
  s.chains[0].residues[0].atoms[0].chain_id = 'Q';
  EXPECT_THROW(validate(s), StructureError);
}

TEST(Structure, PositionsFollowCanonicalOrder) {
  Structure s = synthetic_template();
  std::vector<Vec3> p = positions(s);
  ASSERT_EQ(p.size(), s.atom_count());
  EXPECT_EQ(p[atom_index(s, {'G', 4, "CB"})], find_atom(s, 'G', 4, "CB").pos);
  for (Vec3& v : p)
    v += Vec3(1, 0, 0);
  Structure t = s;
  set_positions(t, p);
  EXPECT_EQ(find_atom(t, 'B', 2, "CA").pos, find_atom(s, 'B', 2, "CA").pos + Vec3(1, 0, 0));
}
