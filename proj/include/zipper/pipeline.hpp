// JSON pipeline configuration, per-model JSON reports, and run_pipeline().
//
// Config keys (all optional):
//   template, renumber_residues, preset ("windows" | "literal"), models
//   ([{"name", "sequence"}] or ["AAAAGA", ...]), contacts {fixed, free,
//   pairs}, sheet_parent, energy {epsilon, sigma, A, B, C, D, hb_cutoff},
//   anneal {...}, refine {max_steps, max_displacement}, refit
//   ("per_chain" | "sheet"), seed, output_dir, parallel,
//   fetch {base_url, cache_dir, timeout}.

#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "assembly.hpp"

namespace zipper {

using nlohmann::json;

namespace impl {

inline json addresses_to_json(const std::vector<AtomAddress>& v) {
  json out = json::array();
  for (const AtomAddress& a : v)
    out.push_back(a.to_string());
  return out;
}

inline std::vector<AtomAddress> addresses_from_json(const json& j) {
  std::vector<AtomAddress> out;
  for (const json& e : j)
    out.push_back(AtomAddress::parse(e.get<std::string>()));
  return out;
}

inline json breakdown_to_json(const EnergyBreakdown& e) {
  return {{"vdw", e.vdw}, {"hbond", e.hbond}, {"total", e.total()}};
}

inline json transform_to_json(const RigidTransform& t) {
  auto a = t.to_array();
  return json(std::vector<double>(a.begin(), a.end()));
}

inline const char* refit_name(RefitMode m) { return m == RefitMode::sheet ? "sheet" : "per_chain"; }

template <typename T>
void read_opt(const json& j, const char* key, T& dst) {
  if (j.contains(key))
    dst = j.at(key).get<T>();
}

}  // namespace impl

inline json anneal_to_json(const AnnealConfig& a) {
  json j = {{"cooling_factor", a.cooling_factor},
            {"steps_per_temperature", a.steps_per_temperature},
            {"step_size", a.step_size},
            {"descent_period", a.descent_period},
            {"descent_fd_step", a.descent_fd_step},
            {"descent_max_steps", a.descent_max_steps},
            {"max_iterations", a.max_iterations},
            {"target_tolerance", a.target_tolerance}};
  j["initial_temperature"] = a.initial_temperature ? json(*a.initial_temperature) : json("auto");
  return j;
}

inline json energy_to_json(const EnergyParams& e) {
  return {{"epsilon", e.lj.epsilon}, {"sigma", e.lj.sigma}, {"C", e.hb.C},
          {"D", e.hb.D},             {"hb_cutoff", e.hb_cutoff}};
}

// Echo of everything that influences the models (output paths excluded).
inline json config_to_json(const PipelineConfig& cfg) {
  json models = json::array();
  for (const ModelSpec& m : cfg.models)
    models.push_back({{"name", m.name}, {"sequence", m.sequence}});
  json pairs = json::array();
  for (const auto& [a, b] : cfg.contacts.pairs)
    pairs.push_back({a.to_string(), b.to_string()});
  json parents = json::object();
  for (const auto& [c, p] : cfg.sheet_parent)
    parents[std::string(1, c)] = std::string(1, p);
  return {{"template", cfg.template_source},
          {"renumber_residues", cfg.renumber_residues},
          {"models", models},
          {"contacts",
           {{"fixed", impl::addresses_to_json(cfg.contacts.fixed)},
            {"free", impl::addresses_to_json(cfg.contacts.free)},
            {"pairs", pairs}}},
          {"sheet_parent", parents},
          {"energy", energy_to_json(cfg.energy)},
          {"anneal", anneal_to_json(cfg.anneal)},
          {"refine",
           {{"max_steps", cfg.refine.max_steps},
            {"max_displacement", cfg.refine.max_displacement}}},
          {"refit", impl::refit_name(cfg.refit)},
          {"seed", cfg.seed}};
}

namespace impl {

inline PipelineConfig config_from_json_raw(const json& j) {
  PipelineConfig cfg;
  impl::read_opt(j, "template", cfg.template_source);
  impl::read_opt(j, "renumber_residues", cfg.renumber_residues);
  impl::read_opt(j, "seed", cfg.seed);
  impl::read_opt(j, "parallel", cfg.parallel);
  if (j.contains("output_dir"))
    cfg.output_dir = j.at("output_dir").get<std::string>();

  if (j.contains("preset")) {
    std::string preset = j.at("preset").get<std::string>();
    if (preset == "windows")
      cfg.models = window_models();
    else if (preset == "literal")
      cfg.models = literal_models();
    else
      throw ArgumentError("unknown model preset '" + preset + "'");
  }
  if (j.contains("models")) {
    cfg.models.clear();
    for (const json& m : j.at("models")) {
      ModelSpec spec;
      if (m.is_string()) {
        spec.sequence = m.get<std::string>();
      } else {
        spec.sequence = m.at("sequence").get<std::string>();
        impl::read_opt(m, "name", spec.name);
      }
      if (spec.name.empty())
        spec.name = "model-" + std::to_string(cfg.models.size() + 1);
      cfg.models.push_back(spec);
    }
  }
  if (j.contains("contacts")) {
    const json& c = j.at("contacts");
    ContactSpec cs;
    cs.fixed = impl::addresses_from_json(c.at("fixed"));
    cs.free = impl::addresses_from_json(c.at("free"));
    for (const json& p : c.at("pairs")) {
      if (p.size() != 2)
        throw ArgumentError("each contact pair needs exactly two atom addresses");
      cs.pairs.push_back({AtomAddress::parse(p[0].get<std::string>()),
                          AtomAddress::parse(p[1].get<std::string>())});
    }
    cfg.contacts = cs;
  }
  if (j.contains("sheet_parent")) {
    cfg.sheet_parent.clear();
    for (const auto& [k, v] : j.at("sheet_parent").items()) {
      std::string p = v.get<std::string>();
      if (k.size() != 1 || p.size() != 1)
        throw ArgumentError("sheet_parent maps single chain ids");
      cfg.sheet_parent[k[0]] = p[0];
    }
  }
  if (j.contains("energy")) {
    std::ostringstream flat;
    flat.precision(17);
    for (const auto& [k, v] : j.at("energy").items())
      flat << k << ' ' << v.get<double>() << '\n';
    cfg.energy = parse_energy_params(flat.str());
  }
  if (j.contains("anneal")) {
    const json& a = j.at("anneal");
    AnnealConfig& ac = cfg.anneal;
    if (a.contains("initial_temperature")) {
      const json& t = a.at("initial_temperature");
      if (t.is_string() && t.get<std::string>() == "auto")
        ac.initial_temperature.reset();
      else
        ac.initial_temperature = t.get<double>();
    }
    impl::read_opt(a, "cooling_factor", ac.cooling_factor);
    impl::read_opt(a, "steps_per_temperature", ac.steps_per_temperature);
    impl::read_opt(a, "step_size", ac.step_size);
    impl::read_opt(a, "descent_period", ac.descent_period);
    impl::read_opt(a, "descent_fd_step", ac.descent_fd_step);
    impl::read_opt(a, "descent_max_steps", ac.descent_max_steps);
    impl::read_opt(a, "max_iterations", ac.max_iterations);
    impl::read_opt(a, "target_tolerance", ac.target_tolerance);
    ac.validate();
  }
  if (j.contains("refine")) {
    impl::read_opt(j.at("refine"), "max_steps", cfg.refine.max_steps);
    impl::read_opt(j.at("refine"), "max_displacement", cfg.refine.max_displacement);
  }
  if (j.contains("refit")) {
    std::string m = j.at("refit").get<std::string>();
    if (m == "per_chain")
      cfg.refit = RefitMode::per_chain;
    else if (m == "sheet")
      cfg.refit = RefitMode::sheet;
    else
      throw ArgumentError("refit must be 'per_chain' or 'sheet'");
  }
  if (j.contains("fetch")) {
    const json& f = j.at("fetch");
    impl::read_opt(f, "base_url", cfg.fetch.base_url);
    if (f.contains("cache_dir"))
      cfg.fetch.cache_dir = f.at("cache_dir").get<std::string>();
    impl::read_opt(f, "timeout", cfg.fetch.timeout);
  }
  return cfg;
}

}  // namespace impl

// Type mismatches in the JSON surface as ArgumentError.
inline PipelineConfig config_from_json(const json& j) {
  try {
    return impl::config_from_json_raw(j);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("config: ") + e.what());
  }
}

inline PipelineConfig read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw IOError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(0, std::string("config ") + path.string() + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const ArgumentError& e) {
    throw ArgumentError("config " + path.string() + ": " + e.what());
  }
}

inline json report_to_json(const ModelReport& r, const PipelineConfig& cfg) {
  json pairs = json::array();
  for (const PairDistance& p : r.designated_pairs)
    pairs.push_back({{"pair", p.label}, {"pre", p.pre}, {"post", p.post}});
  json chains = json::object();
  for (const auto& [c, t] : r.chain_transforms)
    chains[std::string(1, c)] = impl::transform_to_json(t);
  Vec3 dev = r.transform.translation - r.reference_translation;
  return {
      {"model", r.model},
      {"sequence", r.sequence},
      {"designated_pairs", pairs},
      {"transform", impl::transform_to_json(r.transform)},
      {"chain_transforms", chains},
      {"refit", {{"mode", impl::refit_name(r.refit_mode)}, {"pairs", r.refit_pairs}}},
      {"reference_translation",
       {{"reference", {r.reference_translation.x, r.reference_translation.y,
                       r.reference_translation.z}},
        {"fitted", {r.transform.translation.x, r.transform.translation.y,
                    r.transform.translation.z}},
        {"deviation", {dev.x, dev.y, dev.z}},
        {"deviation_norm", dev.length()}}},
      {"layer_offsets", "applied after contact optimization"},
      {"energy_before_refine", impl::breakdown_to_json(r.energy_before)},
      {"energy_after_refine", impl::breakdown_to_json(r.energy_after)},
      {"hbond_pairs", r.hbond_pair_count},
      {"hbond_criterion",
       {{"atoms", "backbone N...O"},
        {"cutoff", r.hbond_cutoff},
        {"excluded", "same residue, sequence neighbours in one chain"}}},
      {"hbond_pair_list", r.hbond_pairs},
      {"optimizer",
       {{"best_value", r.optimizer_best},
        {"iterations", r.optimizer_iterations},
        {"stalled", r.optimizer_stalled},
        {"rejected_nonfinite", r.optimizer_rejected}}},
      {"refine",
       {{"energy_trace", r.refine_trace},
        {"steps", r.refine_trace.empty() ? 0 : r.refine_trace.size() - 1},
        {"max_displacement", r.refine_max_displacement}}},
      {"seeds", {{"root", cfg.seed}, {"model", r.seed}}},
      {"config", config_to_json(cfg)},
  };
}

struct PipelineRun {
  std::vector<ModelOutcome> models;
  std::vector<std::filesystem::path> written;

  bool all_ok() const {
    return std::all_of(models.begin(), models.end(), [](const ModelOutcome& m) { return m.ok; });
  }
};

inline PipelineRun run_pipeline(const PipelineConfig& cfg) {
  PipelineRun run;
  Structure tmpl = load_template(cfg);
  run.models = run_models(tmpl, cfg);
  std::filesystem::create_directories(cfg.output_dir);
  for (std::size_t k = 0; k < run.models.size(); ++k) {
    const ModelOutcome& m = run.models[k];
    if (!m.ok)
      continue;
    auto pdb = model_pdb_path(cfg, k);
    std::ofstream(pdb, std::ios::binary) << m.pdb_text;
    auto rep = model_report_path(cfg, k);
    std::ofstream(rep, std::ios::binary) << report_to_json(m.report, cfg).dump(2) << '\n';
    run.written.push_back(pdb);
    run.written.push_back(rep);
  }
  return run;
}

}  // namespace zipper
