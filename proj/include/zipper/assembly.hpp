// End-to-end fibril model building: mutate the template core, optimize the
// inter-sheet contact, refit the sheet-2 placement, generate the 12-chain
// lattice, relax, and report.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <future>
#include <limits>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "energy.hpp"
#include "error.hpp"
#include "fetch.hpp"
#include "geometry.hpp"
#include "mutation.hpp"
#include "optimizer.hpp"
#include "pdb_io.hpp"
#include "synthetic.hpp"

namespace zipper {

struct ContactSpec {
  std::vector<AtomAddress> fixed;
  std::vector<AtomAddress> free;
  std::vector<std::pair<AtomAddress, AtomAddress>> pairs;

  // A.3.CB-G.4.CB and B.4.CB-H.3.CB; sheet 1 atoms fixed, sheet 2 atoms free.
  static ContactSpec zipper_default() {
    AtomAddress a3{'A', 3, "CB"}, b4{'B', 4, "CB"}, g4{'G', 4, "CB"}, h3{'H', 3, "CB"};
    return {{a3, b4}, {g4, h3}, {{a3, g4}, {b4, h3}}};
  }
};

// How the free-atom optimum is turned into rigid chain motion.
enum class RefitMode {
  per_chain,  // each moving chain follows its own probe atoms
  sheet,      // one translation shared by every moving chain
};

struct RefineConfig {
  int max_steps = 500;
  double max_displacement = 1.0;  // Angstrom, per atom
};

struct ModelSpec {
  std::string name;
  std::string sequence;
};

// The three distinct six-residue windows of AGAAAAGA.
inline std::vector<ModelSpec> window_models() {
  return {{"model-1", "AAAAGA"}, {"model-2", "GAAAAG"}, {"model-3", "AGAAAA"}};
}

// The model list exactly as printed for the original study (Models 1 and 3
// share a sequence there).
inline std::vector<ModelSpec> literal_models() {
  return {{"model-1", "AAAAGA"}, {"model-2", "GAAAAG"}, {"model-3", "AAAAGA"}};
}

struct PipelineConfig {
  std::string template_source = "synthetic";  // "synthetic", a file path, or an entry id
  bool renumber_residues = true;
  std::vector<ModelSpec> models = window_models();
  ContactSpec contacts = ContactSpec::zipper_default();
  std::map<char, char> sheet_parent{{'G', 'A'}, {'H', 'B'}};
  EnergyParams energy;
  AnnealConfig anneal;
  RefineConfig refine;
  RefitMode refit = RefitMode::per_chain;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "models";
  FetchConfig fetch = FetchConfig::from_env();
  bool parallel = true;
};

inline Structure load_template(const PipelineConfig& cfg) {
  Structure s;
  if (cfg.template_source == "synthetic") {
    s = synthetic_template();
  } else if (std::filesystem::exists(cfg.template_source)) {
    s = read_pdb_file(cfg.template_source);
  } else if (is_entry_id(cfg.template_source)) {
    s = parse_pdb(fetch_entry(cfg.fetch, cfg.template_source));
  } else {
    throw ArgumentError("template '" + cfg.template_source +
                        "' is neither 'synthetic', an existing file, nor an entry id");
  }
  if (cfg.renumber_residues)
    renumber_residues(s);
  return s;
}

// Chains A, B, G, H mutated to `sequence`. G and H come from the template
// when present, otherwise from A and B under the sheet transform.
inline Structure build_core(const Structure& tmpl, std::string_view sequence) {
  for (char id : {'A', 'B'})
    if (!tmpl.find_chain(id))
      throw StructureError(std::string("template lacks chain ") + id);
  bool has_g = tmpl.find_chain('G'), has_h = tmpl.find_chain('H');
  if (has_g != has_h)
    throw StructureError("template has only one of chains G and H");

  Structure core = select_chains(tmpl, "AB");
  if (has_g)
    merge_into(core, select_chains(tmpl, "GH"));
  else
    merge_into(core, apply_structure(sheet_transform(), core, {{'A', 'G'}, {'B', 'H'}}));
  for (char id : {'A', 'B', 'G', 'H'})
    core = mutate_sequence(core, id, sequence);
  return core;
}

struct ContactResult {
  Structure structure;
  // Sheet-level placement fitted over all probe atoms, rotation held at the
  // sheet two-fold: moved sheet 2 ~= R * sheet 1 + t.
  RigidTransform transform;
  // Same fit restricted to each moving chain's own probe atoms.
  std::map<char, RigidTransform> chain_transforms;
  // Translation actually applied to each moving chain.
  std::map<char, Vec3> chain_shifts;
  OptimizationResult optimization;
  std::vector<double> pre_distances;
  std::vector<double> post_distances;
  std::vector<std::pair<AtomAddress, AtomAddress>> refit_pairs;  // (parent atom, probe atom)
};

inline std::vector<double> pair_distances(
    const Structure& s, const std::vector<std::pair<AtomAddress, AtomAddress>>& pairs) {
  std::vector<double> d;
  for (const auto& [a, b] : pairs)
    d.push_back(distance(find_atom(s, a).pos, find_atom(s, b).pos));
  return d;
}

inline ContactResult optimize_contact(const Structure& core, const PipelineConfig& cfg,
                                      std::uint64_t seed) {
  const ContactSpec& cs = cfg.contacts;
  PairList pl = resolve_pairs(core, cs.pairs, PairKind::vdw);
  ContactProblem prob = make_contact_objective(core, cs.fixed, cs.free, pl, cfg.energy.lj);

  AnnealConfig ac = cfg.anneal;
  ac.seed = seed;
  ContactResult out;
  out.optimization = anneal(prob.objective, prob.start, ac);
  out.pre_distances = pair_distances(core, cs.pairs);

  // Group probe displacements by chain.
  std::map<char, std::vector<std::pair<Vec3, Vec3>>> moves;        // (before, after)
  std::map<char, std::vector<std::pair<Vec3, Vec3>>> parent_fits;  // (parent atom, after)
  std::vector<std::pair<Vec3, Vec3>> all_parent_fits, all_moves;
  for (std::size_t k = 0; k < cs.free.size(); ++k) {
    const AtomAddress& probe = cs.free[k];
    const std::vector<double>& x = out.optimization.best_point;
    Vec3 before(prob.start[3 * k], prob.start[3 * k + 1], prob.start[3 * k + 2]);
    Vec3 after(x[3 * k], x[3 * k + 1], x[3 * k + 2]);
    moves[probe.chain].push_back({before, after});
    all_moves.push_back({before, after});
    auto parent = cfg.sheet_parent.find(probe.chain);
    if (parent == cfg.sheet_parent.end())
      throw LabelError(std::string("no sheet parent declared for chain ") + probe.chain);
    AtomAddress src{parent->second, probe.res_seq, probe.name};
    out.refit_pairs.push_back({src, probe});
    std::pair<Vec3, Vec3> fit{find_atom(core, src).pos, after};
    parent_fits[probe.chain].push_back(fit);
    all_parent_fits.push_back(fit);
  }

  out.structure = core;
  if (!all_parent_fits.empty())
    out.transform = fit_translation(kSheetRotation, all_parent_fits);
  else
    out.transform = sheet_transform();
  Vec3 shared = all_moves.empty() ? Vec3{} : fit_translation(Mat3::identity(), all_moves).translation;
  for (const auto& [chain, mv] : moves) {
    out.chain_transforms[chain] = fit_translation(kSheetRotation, parent_fits[chain]);
    Vec3 shift = cfg.refit == RefitMode::per_chain
                     ? fit_translation(Mat3::identity(), mv).translation
                     : shared;
    out.chain_shifts[chain] = shift;
    translate_chain(out.structure.chain(chain), shift);
  }
  out.post_distances = pair_distances(out.structure, cs.pairs);
  return out;
}

// C, D / E, F are A, B shifted up / down the fibril axis; I, J / K, L are
// G, H shifted likewise. Chains come out in alphabetical order.
inline Structure generate_full(const Structure& core) {
  for (char id : {'A', 'B', 'G', 'H'})
    if (!core.find_chain(id))
      throw StructureError(std::string("core lacks chain ") + id);
  Structure out = core;
  Structure sheet1 = select_chains(core, "AB");
  Structure sheet2 = select_chains(core, "GH");
  merge_into(out, apply_structure(layer_transform(+1), sheet1, {{'A', 'C'}, {'B', 'D'}}));
  merge_into(out, apply_structure(layer_transform(-1), sheet1, {{'A', 'E'}, {'B', 'F'}}));
  merge_into(out, apply_structure(layer_transform(+1), sheet2, {{'G', 'I'}, {'H', 'J'}}));
  merge_into(out, apply_structure(layer_transform(-1), sheet2, {{'G', 'K'}, {'H', 'L'}}));
  std::stable_sort(out.chains.begin(), out.chains.end(),
                   [](const Chain& a, const Chain& b) { return a.id < b.id; });
  return out;
}

struct RefineResult {
  Structure structure;
  std::vector<double> energy_trace;  // first entry is the starting energy
  double max_displacement = 0.0;
};

namespace impl {

inline std::string pair_label(const Structure& s, std::size_t i, std::size_t j) {
  std::vector<AtomAddress> addr;
  s.for_each_atom([&](const Atom& a) { addr.push_back(address_of(a)); });
  auto lab = [&](std::size_t k) { return k < addr.size() ? addr[k].to_string() : "?"; };
  return lab(i) + " and " + lab(j);
}

}  // namespace impl

// Steepest descent on the listed pair energy over all coordinates, each atom
// confined to a ball of radius cfg.max_displacement around its start. The
// energy trace never increases.
inline RefineResult refine(const Structure& s, const EnergyParams& params, const PairList& pl,
                           const RefineConfig& cfg) {
  const Conformation x0 = to_conformation(positions(s));
  auto energy = [&](const Conformation& x) {
    return pairlist_energy(x, params.lj, params.hb, pl).total();
  };
  double e;
  try {
    e = energy(x0);
  } catch (const SingularityError& err) {
    throw SingularityError(err.first, err.second,
                           "refine: atoms " + impl::pair_label(s, err.first, err.second) +
                               " coincide");
  }
  if (!std::isfinite(e))
    throw ArgumentError("refine: starting energy is not finite");

  const std::size_t n = x0.size() / 3;
  auto project = [&](Conformation& x) {
    for (std::size_t i = 0; i < n; ++i) {
      Vec3 d(x[3 * i] - x0[3 * i], x[3 * i + 1] - x0[3 * i + 1], x[3 * i + 2] - x0[3 * i + 2]);
      double len = d.length();
      if (len > cfg.max_displacement) {
        d *= cfg.max_displacement / len;
        for (int c = 0; c < 3; ++c)
          x[3 * i + c] = x0[3 * i + c] + d[c];
      }
    }
  };

  RefineResult res;
  res.energy_trace.push_back(e);
  Conformation x = x0, trial(x0.size());
  double t = 1.0;
  for (int step = 0; step < cfg.max_steps; ++step) {
    std::vector<double> g = pairlist_gradient(x, params.lj, &params.hb, pl);
    double g2 = 0.0, gmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Vec3 gi(g[3 * i], g[3 * i + 1], g[3 * i + 2]);
      g2 += gi.dot(gi);
      gmax = std::max(gmax, gi.length());
    }
    if (!(g2 > 0.0) || !std::isfinite(g2))
      break;
    // No atom's unprojected move may exceed the cap; otherwise atoms pinned
    // at the cap let the step grow until round-off gradients move the rest.
    t = std::min(t, cfg.max_displacement / gmax);
    bool accepted = false;
    double e_new = e;
    while (t * std::sqrt(g2) > 1e-14) {
      for (std::size_t k = 0; k < x.size(); ++k)
        trial[k] = x[k] - t * g[k];
      project(trial);
      double decrease = 0.0;  // g . (x - trial), the first-order decrease
      for (std::size_t k = 0; k < x.size(); ++k)
        decrease += g[k] * (x[k] - trial[k]);
      try {
        e_new = energy(trial);
      } catch (const SingularityError&) {
        e_new = std::numeric_limits<double>::infinity();
      }
      if (decrease > 0 && std::isfinite(e_new) && e_new < e && e_new <= e - 1e-4 * decrease) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted)
      break;
    double improvement = e - e_new;
    x = trial;
    e = e_new;
    res.energy_trace.push_back(e);
    if (improvement <= 1e-12 * std::max(1.0, std::abs(e)))
      break;
    t *= 2.0;
  }
  res.structure = s;
  std::vector<Vec3> pts = to_points(x);
  set_positions(res.structure, pts);
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 d(x[3 * i] - x0[3 * i], x[3 * i + 1] - x0[3 * i + 1], x[3 * i + 2] - x0[3 * i + 2]);
    res.max_displacement = std::max(res.max_displacement, d.length());
  }
  return res;
}

// Per-model seed derived from the root seed (splitmix64 step).
inline std::uint64_t model_seed(std::uint64_t root, std::size_t index) {
  std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct PairDistance {
  std::string label;
  double pre = 0.0;   // before contact optimization
  double post = 0.0;  // in the written model
};

struct ModelReport {
  std::string model;
  std::string sequence;
  std::uint64_t seed = 0;
  std::vector<PairDistance> designated_pairs;
  RigidTransform transform;
  std::map<char, RigidTransform> chain_transforms;
  std::vector<std::string> refit_pairs;
  RefitMode refit_mode = RefitMode::per_chain;
  Vec3 reference_translation = kReferenceContactTranslation;
  EnergyBreakdown energy_before;
  EnergyBreakdown energy_after;
  std::size_t hbond_pair_count = 0;
  std::vector<std::string> hbond_pairs;
  double hbond_cutoff = kDefaultHBondCutoff;
  double optimizer_best = 0.0;
  long optimizer_iterations = 0;
  bool optimizer_stalled = false;
  long optimizer_rejected = 0;
  std::vector<double> refine_trace;
  double refine_max_displacement = 0.0;
};

struct ModelOutcome {
  ModelSpec spec;
  bool ok = false;
  std::string error;
  ModelReport report;
  Structure structure;
  std::string pdb_text;
};

inline std::string pair_string(const AtomAddress& a, const AtomAddress& b) {
  return a.to_string() + "-" + b.to_string();
}

// Builds one model; nothing is written.
inline ModelOutcome build_model(const Structure& tmpl, const ModelSpec& spec,
                                const PipelineConfig& cfg, std::uint64_t seed) {
  ModelOutcome out;
  out.spec = spec;
  ModelReport& rep = out.report;
  rep.model = spec.name;
  rep.sequence = spec.sequence;
  rep.seed = seed;
  rep.refit_mode = cfg.refit;
  rep.hbond_cutoff = cfg.energy.hb_cutoff;

  Structure core = build_core(tmpl, spec.sequence);
  ContactResult contact = optimize_contact(core, cfg, seed);
  rep.transform = contact.transform;
  rep.chain_transforms = contact.chain_transforms;
  for (const auto& [src, probe] : contact.refit_pairs)
    rep.refit_pairs.push_back(pair_string(src, probe));
  rep.optimizer_best = contact.optimization.best_value;
  rep.optimizer_iterations = contact.optimization.iterations;
  rep.optimizer_stalled = contact.optimization.stalled;
  rep.optimizer_rejected = contact.optimization.rejected_nonfinite;

  Structure full = generate_full(contact.structure);
  renumber(full);
  PairList pl = resolve_pairs(full, cfg.contacts.pairs, PairKind::vdw);
  PairList hb = detect_hbonds(full, cfg.energy.hb_cutoff);
  pl.append(hb);
  rep.energy_before = total_energy(full, cfg.energy.lj, cfg.energy.hb, pl);

  std::vector<AtomAddress> addr;
  full.for_each_atom([&](const Atom& a) { addr.push_back(address_of(a)); });
  rep.hbond_pair_count = hb.size();
  for (const AtomPair& p : hb.pairs())
    rep.hbond_pairs.push_back(pair_string(addr[p.i], addr[p.j]));

  RefineResult refined = refine(full, cfg.energy, pl, cfg.refine);
  rep.refine_trace = refined.energy_trace;
  rep.refine_max_displacement = refined.max_displacement;

  // Everything reported after this point is measured on the file contents.
  out.pdb_text = write_pdb(refined.structure);
  out.structure = parse_pdb(out.pdb_text);
  rep.energy_after = total_energy(out.structure, cfg.energy.lj, cfg.energy.hb, pl);
  std::vector<double> post = pair_distances(out.structure, cfg.contacts.pairs);
  for (std::size_t k = 0; k < cfg.contacts.pairs.size(); ++k) {
    const auto& [a, b] = cfg.contacts.pairs[k];
    rep.designated_pairs.push_back({pair_string(a, b), contact.pre_distances[k], post[k]});
  }
  out.ok = true;
  return out;
}

inline std::string model_file_stem(std::size_t index) { return "model-" + std::to_string(index + 1); }

inline std::filesystem::path model_pdb_path(const PipelineConfig& cfg, std::size_t index) {
  return cfg.output_dir / (model_file_stem(index) + "-" + cfg.models[index].sequence + ".pdb");
}

inline std::filesystem::path model_report_path(const PipelineConfig& cfg, std::size_t index) {
  return cfg.output_dir / (model_file_stem(index) + "-report.json");
}

// Builds every model; a failing model records its error and the rest still
// run. Files are written by run_pipeline().
inline std::vector<ModelOutcome> run_models(const Structure& tmpl, const PipelineConfig& cfg) {
  auto one = [&](std::size_t k) {
    try {
      return build_model(tmpl, cfg.models[k], cfg, model_seed(cfg.seed, k));
    } catch (const std::exception& e) {
      ModelOutcome bad;
      bad.spec = cfg.models[k];
      bad.error = e.what();
      return bad;
    }
  };
  std::vector<ModelOutcome> out;
  if (cfg.parallel) {
    std::vector<std::future<ModelOutcome>> jobs;
    for (std::size_t k = 0; k < cfg.models.size(); ++k)
      jobs.push_back(std::async(std::launch::async, one, k));
    for (auto& j : jobs)
      out.push_back(j.get());
  } else {
    for (std::size_t k = 0; k < cfg.models.size(); ++k)
      out.push_back(one(k));
  }
  return out;
}

}  // namespace zipper
