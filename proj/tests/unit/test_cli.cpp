#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <sys/wait.h>

#include "json.hpp"
#include "mutation.hpp"
#include "synthetic.hpp"
#include "support.hpp"

using namespace zipper;
using namespace testing_support;
using nlohmann::json;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

// Runs the CLI with `args` (already shell-quoted where needed); stderr is
// discarded.
CliRun zipper_cli(const std::string& args) {
  std::string cmd = std::string("'") + ZIPPER_CLI + "' " + args + " 2>/dev/null";
  CliRun r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p)
    return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0)
    r.out.append(buf.data(), n);
  int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
  return "'" + p.string() + "'";
}

std::string two_atom_pdb(const Vec3& b) {
  Structure s;
  add_atom(s, make_atom('A', 1, "ALA", "CB", {0, 0, 0}));
  add_atom(s, make_atom('B', 1, "ALA", "CB", b));
  renumber(s);
  return write_pdb(s);
}

}  // namespace

TEST(Cli, EnergyOfContactPair) {
  // 3-decimal coordinates 6e-6 A from the LJ minimum.
  auto dir = scratch_dir("cli-energy");
  std::string pdb = write_file(dir / "pair.pdb", two_atom_pdb({1.122, 0.032, 0.0}));
  std::string pairs = write_file(dir / "pairs.txt", "vdw A:1:CB B:1:CB\n");
  CliRun r = zipper_cli("energy " + pdb + " --pairs " + pairs);
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "-1.000000 0.000000 -1.000000\n");
  CliRun none = zipper_cli("energy " + pdb);
  EXPECT_EQ(none.code, 0);
  EXPECT_EQ(none.out, "0.000000 0.000000 0.000000\n");
  CliRun j = zipper_cli("energy --json " + pdb + " --pairs " + pairs);
  EXPECT_NEAR(json::parse(j.out)["vdw"].get<double>(), -1.0, 1e-9);
}

TEST(Cli, EnergyErrorsMapToExitCodes) {
  auto dir = scratch_dir("cli-err");
  std::string bad = write_file(dir / "bad.pdb", "ATOM      1  CB  ALA A   1    garbage\n");
  EXPECT_EQ(zipper_cli("energy " + bad).code, 1);
  EXPECT_EQ(zipper_cli("energy '" + (dir / "missing.pdb").string() + "'").code, 1);
  std::string same = write_file(dir / "same.pdb", two_atom_pdb({0, 0, 0}));
  std::string pairs = write_file(dir / "pairs.txt", "vdw A:1:CB B:1:CB\n");
  EXPECT_EQ(zipper_cli("energy " + same + " --pairs " + pairs).code, 3);
}

TEST(Cli, TemplateMatchesLibraryAndDataFile) {
  CliRun r = zipper_cli("template");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, write_pdb(synthetic_template()));
  EXPECT_EQ(r.out, slurp(std::filesystem::path(ZIPPER_DATA_DIR) / "synthetic_template.pdb"));
}

TEST(Cli, MutateChain) {
  auto dir = scratch_dir("cli-mut");
  std::string in = write_file(dir / "t.pdb", write_pdb(synthetic_template()));
  CliRun r = zipper_cli("mutate " + in + " --chain A --seq AAAAGA");
  ASSERT_EQ(r.code, 0);
  Structure s = parse_pdb(r.out);
  EXPECT_EQ(sequence_of(s.chain('A')), "AAAAGA");
  EXPECT_EQ(sequence_of(s.chain('B')), "GYMLGS");
  EXPECT_EQ(zipper_cli("mutate " + in + " --chain A --seq AAAAGW").code, 3);
}

TEST(Cli, FetchValidationAndWarmCache) {
  EXPECT_EQ(zipper_cli("fetch 'XYZ!'").code, 2);
  auto dir = scratch_dir("cli-fetch");
  std::ofstream(dir / "3NHC.pdb") << "cached\n";
  CliRun r = zipper_cli("--cache-dir '" + dir.string() + "' --base-url http://127.0.0.1:9 fetch 3nhc");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, (dir / "3NHC.pdb").string() + "\n");
  CliRun offline = zipper_cli("--cache-dir '" + dir.string() + "' --base-url http://127.0.0.1:9 fetch 1abc");
  EXPECT_EQ(offline.code, 2);
}

TEST(Cli, OptimizeDefaultContacts) {
  auto dir = scratch_dir("cli-opt");
  Structure core = synthetic_template();
  for (char id : {'A', 'B', 'G', 'H'})
    core = mutate_sequence(core, id, "AAAAGA");
  renumber(core);
  std::string in = write_file(dir / "core.pdb", write_pdb(core));
  CliRun r = zipper_cli("optimize " + in + " --seed 3 --trace '" + (dir / "t.csv").string() + "'");
  ASSERT_EQ(r.code, 0);
  json j = json::parse(r.out);
  EXPECT_NEAR(j["best_value"].get<double>(), -2.0, 1e-6);
  EXPECT_EQ(j["best_point"].size(), 6u);
  for (const json& p : j["pairs"])
    EXPECT_NEAR(p["post"].get<double>(), std::pow(2.0, 1.0 / 6.0), 1e-4);
  EXPECT_EQ(slurp(dir / "t.csv").rfind("iteration,temperature,best_value\n", 0), 0u);
}

TEST(Cli, PipelineDefaultWritesThreeModels) {
  auto dir = scratch_dir("cli-pipe");
  CliRun r = zipper_cli("pipeline --out '" + dir.string() + "'");
  ASSERT_EQ(r.code, 0);
  json j = json::parse(r.out);
  ASSERT_EQ(j.size(), 3u);
  int pdbs = 0;
  for (auto& e : std::filesystem::directory_iterator(dir))
    pdbs += e.path().extension() == ".pdb";
  EXPECT_EQ(pdbs, 3);
}

TEST(Cli, PipelineSeedIsReproducible) {
  auto a = scratch_dir("cli-seed-a"), b = scratch_dir("cli-seed-b");
  ASSERT_EQ(zipper_cli("pipeline --seed 7 --out '" + a.string() + "'").code, 0);
  ASSERT_EQ(zipper_cli("pipeline --seed 7 --sequential --out '" + b.string() + "'").code, 0);
  for (const char* f : {"model-1-AAAAGA.pdb", "model-2-GAAAAG.pdb", "model-3-AGAAAA.pdb"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Cli, PipelinePartialFailureExitsFour) {
  auto dir = scratch_dir("cli-partial");
  std::string cfg = write_file(dir / "c.json",
                               R"({"models":["AAAAGA","AAAAGW"],"output_dir":")" +
                                   (dir / "out").string() + "\"}");
  CliRun r = zipper_cli("pipeline --config " + cfg);
  EXPECT_EQ(r.code, 4);
  json j = json::parse(r.out);
  EXPECT_TRUE(j[0]["ok"].get<bool>());
  EXPECT_FALSE(j[1]["ok"].get<bool>());
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "model-1-AAAAGA.pdb"));
}

TEST(Cli, PipelineBadConfigExitsOne) {
  auto dir = scratch_dir("cli-badcfg");
  std::string cfg = write_file(dir / "c.json", "{ nope");
  EXPECT_EQ(zipper_cli("pipeline --config " + cfg).code, 1);
}

TEST(Cli, HelpListsSubcommandsAndFlags) {
  CliRun r = zipper_cli("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* word : {"fetch", "template", "mutate", "energy", "optimize", "pipeline",
                           "--cache-dir", "--base-url"})
    EXPECT_NE(r.out.find(word), std::string::npos) << word;
  CliRun p = zipper_cli("pipeline --help");
  for (const char* word : {"--config", "--seed", "--out", "--template", "--sequential"})
    EXPECT_NE(p.out.find(word), std::string::npos) << word;
  EXPECT_NE(zipper_cli("").code, 0);
}
