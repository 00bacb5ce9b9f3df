// zipper: command-line front end for the fibril modeling library.
//
// Exit codes: 0 ok, 1 input/parse error, 2 fetch error, 3 geometry or
// energy error, 4 some pipeline models failed.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pipeline.hpp"

namespace {

using namespace zipper;
using nlohmann::json;

constexpr int kExitParse = 1;
constexpr int kExitFetch = 2;
constexpr int kExitGeometry = 3;
constexpr int kExitPartial = 4;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IOError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out)
    throw IOError("cannot write " + path);
}

std::pair<AtomAddress, AtomAddress> parse_pair_arg(const std::string& s) {
  auto comma = s.find(',');
  if (comma == std::string::npos)
    throw ArgumentError("pair '" + s + "' must look like A:3:CB,G:4:CB");
  return {AtomAddress::parse(s.substr(0, comma)), AtomAddress::parse(s.substr(comma + 1))};
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const IOError*>(&e))
    return kExitParse;
  if (dynamic_cast<const FetchError*>(&e) || dynamic_cast<const ValidationError*>(&e))
    return kExitFetch;
  return kExitGeometry;
}

struct Globals {
  std::string cache_dir;
  std::string base_url;

  FetchConfig fetch() const {
    FetchConfig cfg = FetchConfig::from_env();
    if (!cache_dir.empty())
      cfg.cache_dir = cache_dir;
    if (!base_url.empty())
      cfg.base_url = base_url;
    return cfg;
  }
};

std::string breakdown_line(const EnergyBreakdown& e) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f\n", e.vdw, e.hbond, e.total());
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steric-zipper fibril model builder"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--cache-dir", g.cache_dir,
                 "Download cache directory (default $ZIPPER_CACHE_DIR, else ~/.cache/zipper)");
  app.add_option("--base-url", g.base_url,
                 "Archive base URL (default $ZIPPER_ARCHIVE_URL, else the RCSB download URL)");

  // fetch
  auto* fetch = app.add_subcommand("fetch", "Download an entry into the cache and print its path");
  std::string fetch_id;
  fetch->add_option("id", fetch_id, "Four-character entry id, e.g. 3NHC")->required();

  // template
  auto* tmpl = app.add_subcommand("template", "Write the bundled synthetic GYMLGS template");
  std::string tmpl_out = "-";
  tmpl->add_option("-o,--output", tmpl_out, "Output PDB path ('-' for stdout)");

  // mutate
  auto* mutate = app.add_subcommand("mutate", "Mutate one chain to an A/G sequence");
  std::string mut_in, mut_out = "-", mut_seq;
  char mut_chain = 'A';
  mutate->add_option("file", mut_in, "Input PDB")->required();
  mutate->add_option("--chain", mut_chain, "Chain id")->required();
  mutate->add_option("--seq", mut_seq, "One-letter A/G sequence covering the chain")->required();
  mutate->add_option("-o,--output", mut_out, "Output PDB path ('-' for stdout)");

  // energy
  auto* energy = app.add_subcommand("energy", "Print vdw, hbond and total energy");
  std::string en_in, en_params, en_pairs;
  bool en_json = false;
  energy->add_option("file", en_in, "Input PDB")->required();
  energy->add_option("--params", en_params, "Energy parameter file (key value lines)");
  energy->add_option("--pairs", en_pairs,
                     "Pair file ('vdw|hbond addr addr' lines); default: detected hbonds");
  energy->add_flag("--json", en_json, "Print JSON instead of 'vdw hbond total'");

  // optimize
  auto* optimize = app.add_subcommand("optimize", "Anneal free atoms against fixed partners");
  std::string opt_in, opt_params, opt_config, opt_trace, opt_out;
  std::vector<std::string> opt_fixed, opt_free, opt_pairs;
  std::optional<std::uint64_t> opt_seed;
  optimize->add_option("file", opt_in, "Input PDB")->required();
  optimize->add_option("--fixed", opt_fixed, "Fixed atom address (repeatable), e.g. A:3:CB");
  optimize->add_option("--free", opt_free, "Free atom address (repeatable), e.g. G:4:CB");
  optimize->add_option("--pair", opt_pairs, "Designated vdw pair 'addr,addr' (repeatable)");
  optimize->add_option("--params", opt_params, "Energy parameter file");
  optimize->add_option("--config", opt_config, "JSON config; its anneal section is used");
  optimize->add_option("--seed", opt_seed, "Root random seed");
  optimize->add_option("--trace", opt_trace, "Write the annealing trace as CSV");
  optimize->add_option("-o,--output", opt_out, "Write the structure with free atoms moved");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Build all configured fibril models");
  std::string pl_config, pl_out, pl_template;
  std::optional<std::uint64_t> pl_seed;
  bool pl_sequential = false;
  pipeline->add_option("--config", pl_config, "JSON pipeline config (default: built-in)");
  pipeline->add_option("--seed", pl_seed, "Root random seed (overrides the config)");
  pipeline->add_option("--out", pl_out, "Output directory (overrides the config)");
  pipeline->add_option("--template", pl_template,
                       "'synthetic', a PDB path, or an entry id (overrides the config)");
  pipeline->add_flag("--sequential", pl_sequential, "Build models one at a time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*fetch) {
      std::cout << fetch_to_cache(g.fetch(), fetch_id).string() << '\n';
      return 0;
    }

    if (*tmpl) {
      write_text(tmpl_out, write_pdb(synthetic_template()));
      return 0;
    }

    if (*mutate) {
      Structure s = read_pdb_file(mut_in);
      Structure m = mutate_sequence(s, mut_chain, mut_seq);
      renumber(m);
      write_text(mut_out, write_pdb(m));
      return 0;
    }

    if (*energy) {
      Structure s = read_pdb_file(en_in);
      EnergyParams params;
      if (!en_params.empty())
        params = parse_energy_params(read_text(en_params));
      PairList pl = en_pairs.empty() ? detect_hbonds(s, params.hb_cutoff)
                                     : parse_pair_file(read_text(en_pairs), s);
      EnergyBreakdown e = total_energy(s, params.lj, params.hb, pl);
      if (en_json)
        std::cout << json{{"vdw", e.vdw},
                          {"hbond", e.hbond},
                          {"total", e.total()},
                          {"pairs", pl.size()}}
                         .dump()
                  << '\n';
      else
        std::cout << breakdown_line(e);
      return 0;
    }

    if (*optimize) {
      PipelineConfig cfg = opt_config.empty() ? PipelineConfig{} : read_config_file(opt_config);
      if (!opt_params.empty())
        cfg.energy = parse_energy_params(read_text(opt_params));
      if (opt_seed)
        cfg.seed = *opt_seed;
      ContactSpec cs = cfg.contacts;
      if (!opt_fixed.empty() || !opt_free.empty() || !opt_pairs.empty()) {
        cs = {};
        for (const auto& a : opt_fixed)
          cs.fixed.push_back(AtomAddress::parse(a));
        for (const auto& a : opt_free)
          cs.free.push_back(AtomAddress::parse(a));
        for (const auto& p : opt_pairs)
          cs.pairs.push_back(parse_pair_arg(p));
      }
      Structure s = read_pdb_file(opt_in);
      PairList pl = resolve_pairs(s, cs.pairs, PairKind::vdw);
      ContactProblem prob = make_contact_objective(s, cs.fixed, cs.free, pl, cfg.energy.lj);
      AnnealConfig ac = cfg.anneal;
      ac.seed = cfg.seed;
      OptimizationResult r = anneal(prob.objective, prob.start, ac);
      Structure moved = s;
      for (std::size_t k = 0; k < cs.free.size(); ++k)
        find_atom(moved, cs.free[k]).pos =
            Vec3(r.best_point[3 * k], r.best_point[3 * k + 1], r.best_point[3 * k + 2]);
      json pairs = json::array();
      for (const auto& [a, b] : cs.pairs)
        pairs.push_back({{"pair", pair_string(a, b)},
                         {"pre", distance(find_atom(s, a).pos, find_atom(s, b).pos)},
                         {"post", distance(find_atom(moved, a).pos, find_atom(moved, b).pos)}});
      std::cout << json{{"best_value", r.best_value},
                        {"best_point", r.best_point},
                        {"iterations", r.iterations},
                        {"stalled", r.stalled},
                        {"rejected_nonfinite", r.rejected_nonfinite},
                        {"seed", cfg.seed},
                        {"pairs", pairs}}
                       .dump(2)
                << '\n';
      if (!opt_trace.empty())
        write_text(opt_trace, trace_to_csv(r));
      if (!opt_out.empty())
        write_text(opt_out, write_pdb(moved));
      return 0;
    }

    if (*pipeline) {
      PipelineConfig cfg = pl_config.empty() ? PipelineConfig{} : read_config_file(pl_config);
      // Environment, then the config file, then flags.
      if (!g.cache_dir.empty())
        cfg.fetch.cache_dir = g.cache_dir;
      if (!g.base_url.empty())
        cfg.fetch.base_url = g.base_url;
      if (pl_seed)
        cfg.seed = *pl_seed;
      if (!pl_out.empty())
        cfg.output_dir = pl_out;
      if (!pl_template.empty())
        cfg.template_source = pl_template;
      if (pl_sequential)
        cfg.parallel = false;

      PipelineRun run = run_pipeline(cfg);
      json summary = json::array();
      for (std::size_t k = 0; k < run.models.size(); ++k) {
        const ModelOutcome& m = run.models[k];
        json row = {{"model", m.spec.name}, {"sequence", m.spec.sequence}, {"ok", m.ok}};
        if (m.ok) {
          row["pdb"] = model_pdb_path(cfg, k).string();
          row["report"] = model_report_path(cfg, k).string();
        } else {
          row["error"] = m.error;
          std::cerr << "zipper: " << m.spec.name << " failed: " << m.error << '\n';
        }
        summary.push_back(row);
      }
      std::cout << summary.dump(2) << '\n';
      return run.all_ok() ? 0 : kExitPartial;
    }
  } catch (const std::exception& e) {
    std::cerr << "zipper: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}
