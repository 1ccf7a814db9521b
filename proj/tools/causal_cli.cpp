// Command-line front end: graphs, identification, estimation, discovery and
// simulation wired to the library. Every run is a pure function of its files,
// flags and seed.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "causal/dataset.hpp"
#include "causal/discovery.hpp"
#include "causal/error.hpp"
#include "causal/estimate.hpp"
#include "causal/graph.hpp"
#include "causal/identify.hpp"
#include "causal/json_io.hpp"
#include "causal/longitudinal.hpp"
#include "causal/measurement.hpp"
#include "causal/scm.hpp"
#include "causal/swig.hpp"

namespace {

constexpr const char* kVersion = "causal 0.1.0";

// exit codes: 0 ok, 1 usage, 2 bad input, 3 not identified, 4 positivity,
// 5 numerical failure
int exit_code_for(causal::ErrorCode code) {
  using EC = causal::ErrorCode;
  switch (code) {
    case EC::sequential_ignorability:
      return 3;
    case EC::positivity:
      return 4;
    case EC::insufficient_rows:
    case EC::rank_deficient:
    case EC::separation:
    case EC::no_convergence:
    case EC::singular_matrix:
    case EC::estimator_failed_on_resample:
      return 5;
    default:
      return 2;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) causal::fail(causal::ErrorCode::parse_error, "cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::set<std::string> split_set(const std::string& text) {
  auto items = split_list(text);
  return {items.begin(), items.end()};
}

// "A=1,B=0" -> ordered pairs
std::vector<std::pair<std::string, std::string>> parse_assignments(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& item : split_list(text)) {
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
      causal::fail(causal::ErrorCode::parse_error, "expected name=value, got '" + item + "'");
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return out;
}

int parse_int(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    int v = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    causal::fail(causal::ErrorCode::parse_error, what + " must be an integer, got '" + text + "'");
  }
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) causal::fail(causal::ErrorCode::parse_error, "cannot write file: " + out_path);
  out << text;
}

causal::Json interval_json(const causal::Interval& ci) {
  return causal::Json::array({ci.lower, ci.upper});
}

causal::Json diagnostics_json(const causal::Diagnostics& d) {
  causal::Json j = causal::Json::object();
  if (!d.positivity.empty()) {
    causal::Json entries = causal::Json::array();
    for (const auto& e : d.positivity) {
      causal::Json stratum = causal::Json::object();
      for (const auto& [name, level] : e.stratum) stratum[name] = level;
      entries.push_back({{"stratum", stratum},
                         {"treatment_level", e.treatment_level},
                         {"frequency", e.frequency}});
    }
    j["positivity"] = entries;
  }
  if (d.weights) {
    j["weights"] = {{"min", d.weights->min},
                    {"max", d.weights->max},
                    {"mean", d.weights->mean},
                    {"sum", d.weights->sum},
                    {"normalized_sum", d.weights->normalized_sum},
                    {"clipped", d.weights->clipped}};
  }
  if (d.model) {
    j["model"] = {{"iterations", d.model->iterations},
                  {"gradient_norm", d.model->gradient_norm},
                  {"ridge_applied", d.model->ridge_applied}};
  }
  if (d.propensity_range)
    j["propensity_range"] =
        causal::Json::array({d.propensity_range->first, d.propensity_range->second});
  if (!d.notes.empty()) j["notes"] = d.notes;
  return j;
}

causal::Json estimate_json(const causal::EffectEstimate& est) {
  causal::Json j{{"point", est.point}, {"method", est.method}, {"n", est.n}};
  if (est.ci) j["ci"] = interval_json(*est.ci);
  j["diagnostics"] = diagnostics_json(est.diagnostics);
  return j;
}

struct CommonData {
  causal::Schema schema;
  causal::Dataset data;
};

CommonData load_data(const std::string& data_path, const std::string& schema_path,
                     const std::string& population = "") {
  CommonData out;
  out.schema = causal::parse_schema(read_file(schema_path));
  std::istringstream in(read_file(data_path));
  out.data = causal::read_csv(in, out.schema, population);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"causal graphical models: identification, estimation, discovery"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_path;
  app.add_option("--out", out_path, "write output to this file instead of stdout")
      ->capture_default_str();

  // ---- dsep ----
  auto* dsep = app.add_subcommand("dsep", "test whether two sets are separated given a third");
  std::string dsep_graph, dsep_x, dsep_y, dsep_given;
  dsep->add_option("--graph", dsep_graph, "graph JSON path")->required();
  dsep->add_option("--x", dsep_x, "first variable set, comma separated")->required();
  dsep->add_option("--y", dsep_y, "second variable set, comma separated")->required();
  dsep->add_option("--given", dsep_given, "conditioning set, comma separated");

  // ---- swig ----
  auto* swig = app.add_subcommand("swig", "split the graph at intervened variables");
  std::string swig_graph, swig_do;
  swig->add_option("--graph", swig_graph, "graph JSON path")->required();
  swig->add_option("--do", swig_do, "interventions, e.g. A=1,B=0")->required();

  // ---- identify ----
  auto* identify = app.add_subcommand("identify", "derive an estimand for a treatment effect");
  std::string id_graph, id_treat, id_outcome;
  identify->add_option("--graph", id_graph, "graph JSON path")->required();
  identify->add_option("--treatment", id_treat, "treatment variable")->required();
  identify->add_option("--outcome", id_outcome, "outcome variable")->required();

  // ---- estimate ----
  auto* estimate = app.add_subcommand("estimate", "estimate an identified effect from data");
  std::string es_graph, es_data, es_schema, es_treat, es_outcome, es_method = "gformula";
  int es_a = 1;
  bool es_ace = false, es_stabilized = false;
  std::size_t es_bootstrap = 0;
  double es_level = 0.95, es_clip = 0.01;
  std::uint64_t es_seed = 0;
  estimate->add_option("--graph", es_graph, "graph JSON path")->required();
  estimate->add_option("--data", es_data, "CSV data path")->required();
  estimate->add_option("--schema", es_schema, "schema JSON path")->required();
  estimate->add_option("--treatment", es_treat, "treatment variable")->required();
  estimate->add_option("--outcome", es_outcome, "outcome variable")->required();
  estimate->add_option("--method", es_method, "gformula | ipw | diff")->capture_default_str();
  estimate->add_option("--a", es_a, "treatment level of interest")->capture_default_str();
  estimate->add_flag("--ace", es_ace, "contrast levels 1 and 0 instead of a single arm");
  estimate->add_flag("--stabilized", es_stabilized, "normalize weights (ipw only)");
  estimate->add_option("--clip", es_clip, "propensity clipping floor (ipw only)")
      ->capture_default_str();
  estimate->add_option("--bootstrap", es_bootstrap, "bootstrap replicates for a CI (0 = none)");
  estimate->add_option("--level", es_level, "CI level")->capture_default_str();
  estimate->add_option("--seed", es_seed, "bootstrap seed")->capture_default_str();

  // ---- transport ----
  auto* transport = app.add_subcommand("transport", "carry an effect to a target population");
  std::string tr_graph, tr_source, tr_target, tr_schema, tr_treat, tr_outcome;
  int tr_a = 1;
  bool tr_ace = false;
  std::size_t tr_bootstrap = 0;
  double tr_level = 0.95;
  std::uint64_t tr_seed = 0;
  transport->add_option("--graph", tr_graph, "graph JSON path")->required();
  transport->add_option("--source", tr_source, "source population CSV")->required();
  transport->add_option("--target", tr_target, "target population CSV")->required();
  transport->add_option("--schema", tr_schema, "schema JSON path (both populations)")->required();
  transport->add_option("--treatment", tr_treat, "treatment variable")->required();
  transport->add_option("--outcome", tr_outcome, "outcome variable")->required();
  transport->add_option("--a", tr_a, "treatment level of interest")->capture_default_str();
  transport->add_flag("--ace", tr_ace, "contrast levels 1 and 0");
  transport->add_option("--bootstrap", tr_bootstrap, "bootstrap replicates (0 = none)");
  transport->add_option("--level", tr_level, "CI level")->capture_default_str();
  transport->add_option("--seed", tr_seed, "bootstrap seed")->capture_default_str();

  // ---- measure-correct ----
  auto* measure = app.add_subcommand("measure-correct",
                                     "adjust for a misclassified confounder via its proxy");
  std::string mc_data, mc_schema, mc_treat, mc_outcome, mc_proxy, mc_truth = "truth";
  std::string mc_matrix, mc_extra;
  int mc_a = 1;
  bool mc_ace = false;
  measure->add_option("--data", mc_data, "CSV data path")->required();
  measure->add_option("--schema", mc_schema, "schema JSON path")->required();
  measure->add_option("--treatment", mc_treat, "treatment variable")->required();
  measure->add_option("--outcome", mc_outcome, "outcome variable")->required();
  measure->add_option("--proxy", mc_proxy, "observed proxy of the confounder")->required();
  measure->add_option("--truth-name", mc_truth, "name for the reconstructed variable")
      ->capture_default_str();
  measure->add_option("--matrix", mc_matrix, "misclassification matrix JSON path")->required();
  measure->add_option("--extra", mc_extra, "additional well-measured covariates, comma separated");
  measure->add_option("--a", mc_a, "treatment level of interest")->capture_default_str();
  measure->add_flag("--ace", mc_ace, "contrast levels 1 and 0");

  // ---- policy-value ----
  auto* policy = app.add_subcommand("policy-value",
                                    "evaluate a static regime or a stochastic policy");
  std::string pv_graph, pv_data, pv_schema, pv_outcome, pv_treats, pv_blocks;
  std::string pv_regime, pv_policy;
  policy->add_option("--graph", pv_graph, "graph JSON path")->required();
  policy->add_option("--data", pv_data, "CSV data path")->required();
  policy->add_option("--schema", pv_schema, "schema JSON path")->required();
  policy->add_option("--outcome", pv_outcome, "outcome variable")->required();
  policy->add_option("--treatments", pv_treats, "phase treatments in order, comma separated")
      ->required();
  policy->add_option("--blocks", pv_blocks,
                     "per-phase covariate blocks, semicolon separated phases, comma within");
  policy->add_option("--regime", pv_regime, "static action per phase, comma separated");
  policy->add_option("--policy", pv_policy, "policy JSON path");

  // ---- discover ----
  auto* discover = app.add_subcommand("discover", "learn an equivalence class from data");
  std::string dc_data, dc_schema, dc_oracle;
  double dc_alpha = causal::kDefaultCiAlpha;
  discover->add_option("--data", dc_data, "CSV data path");
  discover->add_option("--schema", dc_schema, "schema JSON path");
  discover->add_option("--oracle-graph", dc_oracle,
                       "answer independence queries from this graph instead of data");
  discover->add_option("--alpha", dc_alpha, "test level")->capture_default_str();

  // ---- simulate ----
  auto* simulate = app.add_subcommand("simulate", "sample a structural model to CSV");
  std::string sm_model, sm_population, sm_intervene;
  std::size_t sm_n = 0;
  std::uint64_t sm_seed = 0;
  simulate->add_option("--model", sm_model, "structural model JSON path")->required();
  simulate->add_option("--n", sm_n, "number of rows")->required();
  simulate->add_option("--seed", sm_seed, "sampling seed")->capture_default_str();
  simulate->add_option("--population", sm_population, "population tag for the sample");
  simulate->add_option("--intervene", sm_intervene, "point interventions, e.g. A=1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    if (*dsep) {
      causal::Graph g = causal::parse_graph(read_file(dsep_graph));
      bool sep = g.d_separated(split_set(dsep_x), split_set(dsep_y), split_set(dsep_given));
      emit(sep ? "d-separated\n" : "d-connected\n", out_path);
      return 0;
    }

    if (*swig) {
      causal::Graph g = causal::parse_graph(read_file(swig_graph));
      std::map<std::string, std::string> interventions;
      for (const auto& [name, value] : parse_assignments(swig_do)) interventions[name] = value;
      causal::Swig s = causal::construct_swig(g, interventions);
      causal::Json nodes = causal::Json::array();
      for (const auto& v : s.split.variables())
        nodes.push_back({{"name", v.name},
                         {"label", s.label_of(v.name)},
                         {"role", s.fixed_nodes.count(v.name) ? "fixed" : "random"}});
      causal::Json edges = causal::Json::array();
      for (const auto& e : s.split.edges()) {
        if (e.kind == causal::EdgeKind::directed)
          edges.push_back({{"kind", "directed"}, {"from", e.from}, {"to", e.to}});
        else
          edges.push_back({{"kind", "bidirected"}, {"between", causal::Json::array({e.from, e.to})}});
      }
      causal::Json doc{{"interventions", interventions}, {"nodes", nodes}, {"edges", edges}};
      emit(doc.dump(2) + "\n", out_path);
      return 0;
    }

    if (*identify) {
      causal::Graph g = causal::parse_graph(read_file(id_graph));
      causal::Estimand est = causal::identify_effect(g, id_treat, "a", id_outcome);
      emit(est.text() + "\n", out_path);
      return est.kind == causal::EstimandKind::not_identified ? 3 : 0;
    }

    if (*estimate) {
      causal::Graph g = causal::parse_graph(read_file(es_graph));
      CommonData in = load_data(es_data, es_schema);
      causal::Estimand est = causal::identify_effect(g, es_treat, "a", es_outcome);
      if (est.kind == causal::EstimandKind::not_identified) {
        std::cerr << est.text() << "\n";
        return 3;
      }
      causal::PropensityModel prop;
      prop.kind = causal::PropensityModel::saturated;
      prop.clip_epsilon = es_clip;
      prop.stabilized = es_stabilized;
      auto point_of = [&](const causal::Dataset& d) -> causal::EffectEstimate {
        if (es_method == "diff") return causal::diff_in_means(d, es_treat, es_outcome);
        if (es_method == "ipw") {
          if (!es_ace) return causal::ipw_mean(d, est, es_a, prop);
          causal::EffectEstimate hi = causal::ipw_mean(d, est, 1, prop);
          causal::EffectEstimate lo = causal::ipw_mean(d, est, 0, prop);
          hi.point -= lo.point;
          return hi;
        }
        if (es_method != "gformula")
          causal::fail(causal::ErrorCode::bad_argument,
                       "unknown method '" + es_method + "' (expected gformula, ipw or diff)");
        if (!es_ace) return causal::gformula_mean(d, est, es_a);
        causal::EffectEstimate hi = causal::gformula_mean(d, est, 1);
        causal::EffectEstimate lo = causal::gformula_mean(d, est, 0);
        hi.point -= lo.point;
        return hi;
      };
      causal::EffectEstimate result = point_of(in.data);
      if (es_bootstrap > 0) {
        result.ci = causal::bootstrap_ci(
            [&](const causal::Dataset& d) { return point_of(d).point; }, in.data,
            static_cast<int>(es_bootstrap), es_level, es_seed);
      }
      causal::Json j = estimate_json(result);
      j["estimand"] = est.text();
      emit(j.dump(2) + "\n", out_path);
      return 0;
    }

    if (*transport) {
      causal::Graph g = causal::parse_graph(read_file(tr_graph));
      CommonData src = load_data(tr_source, tr_schema, "source");
      CommonData tgt = load_data(tr_target, tr_schema, "target");
      auto w = causal::find_backdoor_set(g, tr_treat, tr_outcome);
      if (!w) {
        std::cerr << "not identified: no adjustment set satisfies the backdoor criterion\n";
        return 3;
      }
      causal::Estimand est = causal::identify_transport(g, tr_treat, "a", tr_outcome, *w);
      if (est.kind == causal::EstimandKind::not_identified) {
        std::cerr << est.text() << "\n";
        return 3;
      }
      auto point_of = [&](const causal::Dataset& s, const causal::Dataset& t) {
        if (!tr_ace) return causal::transport_mean(s, t, est, tr_a);
        causal::EffectEstimate hi = causal::transport_mean(s, t, est, 1);
        causal::EffectEstimate lo = causal::transport_mean(s, t, est, 0);
        hi.point -= lo.point;
        return hi;
      };
      causal::EffectEstimate result = point_of(src.data, tgt.data);
      if (tr_bootstrap > 0) {
        result.ci = causal::bootstrap_ci(
            [&](const causal::Dataset& s, const causal::Dataset& t) {
              return point_of(s, t).point;
            },
            src.data, tgt.data, static_cast<int>(tr_bootstrap), tr_level, tr_seed);
      }
      causal::Json j = estimate_json(result);
      j["estimand"] = est.text();
      emit(j.dump(2) + "\n", out_path);
      return 0;
    }

    if (*measure) {
      CommonData in = load_data(mc_data, mc_schema);
      causal::MisclassificationMatrix mis =
          causal::parse_misclassification(read_file(mc_matrix));
      std::vector<std::string> extra = split_list(mc_extra);
      auto run = [&](int a) {
        return causal::corrected_effect(in.data, mc_treat, a, mc_outcome, mc_proxy, mc_truth,
                                        extra, mis);
      };
      causal::CorrectedEffect result = run(mc_a);
      double point = result.point;
      if (mc_ace) {
        causal::CorrectedEffect lo = run(0);
        point = run(1).point - lo.point;
      }
      causal::Json j{{"point", point},
                     {"method", "measurement_corrected_gformula"},
                     {"n", in.data.n()},
                     {"clip", {{"clipped_mass", result.clip.clipped_mass},
                               {"renorm_factor", result.clip.renorm_factor},
                               {"warn", result.clip.warn}}},
                     {"condition", mis.condition()}};
      emit(j.dump(2) + "\n", out_path);
      return 0;
    }

    if (*policy) {
      causal::Graph g = causal::parse_graph(read_file(pv_graph));
      CommonData in = load_data(pv_data, pv_schema);
      std::vector<std::string> treats = split_list(pv_treats);
      std::vector<causal::Phase> phases;
      {
        std::vector<std::string> per_phase;
        std::string chunk;
        std::istringstream bs(pv_blocks);
        while (std::getline(bs, chunk, ';')) per_phase.push_back(chunk);
        per_phase.resize(treats.size());
        for (std::size_t t = 0; t < treats.size(); ++t)
          phases.push_back({treats[t], split_list(per_phase[t])});
      }
      causal::Estimand est = causal::identify_sequential(g, phases, pv_outcome);
      if (pv_regime.empty() == pv_policy.empty())
        causal::fail(causal::ErrorCode::bad_argument,
                     "give exactly one of --regime and --policy");
      causal::EffectEstimate result;
      if (!pv_regime.empty()) {
        causal::Regime regime;
        for (const auto& item : split_list(pv_regime))
          regime.push_back(parse_int(item, "regime entry"));
        result = causal::sequential_gformula(in.data, est, regime);
      } else {
        causal::PolicySpec spec = causal::parse_policy(read_file(pv_policy));
        result = causal::policy_value(in.data, est, spec);
      }
      causal::Json j = estimate_json(result);
      j["estimand"] = est.text();
      emit(j.dump(2) + "\n", out_path);
      return 0;
    }

    if (*discover) {
      causal::PcResult result;
      if (!dc_oracle.empty()) {
        causal::GraphCi ci(causal::parse_graph(read_file(dc_oracle)));
        std::vector<std::string> nodes;
        for (const auto& v : ci.graph().variables()) nodes.push_back(v.name);
        result = causal::pc_learn(ci, nodes);
      } else {
        if (dc_data.empty() || dc_schema.empty())
          causal::fail(causal::ErrorCode::bad_argument,
                       "discover needs --data and --schema (or --oracle-graph)");
        CommonData in = load_data(dc_data, dc_schema);
        causal::DataCi ci(in.data, dc_alpha);
        std::vector<std::string> nodes = in.data.column_order();
        result = causal::pc_learn(ci, nodes);
      }
      for (const auto& d : result.decisions) {
        std::cerr << (d.independent ? "independent " : "dependent   ") << d.x << "," << d.y
                  << " given {";
        bool first = true;
        for (const auto& zv : d.z) {
          if (!first) std::cerr << ",";
          std::cerr << zv;
          first = false;
        }
        std::cerr << "}";
        if (!std::isnan(d.p_value)) std::cerr << " p=" << d.p_value;
        if (d.low_power) std::cerr << " low-power";
        std::cerr << "\n";
      }
      std::cerr << "queries: " << result.decisions.size()
                << (result.low_power ? " (some low-power)" : "") << "\n";
      emit(causal::cpdag_to_json(result.cpdag).dump(2) + "\n", out_path);
      return 0;
    }

    if (*simulate) {
      causal::StructuralModel model = causal::parse_scm(read_file(sm_model));
      if (!sm_intervene.empty()) {
        std::map<std::string, int> settings;
        for (const auto& [name, value] : parse_assignments(sm_intervene))
          settings[name] = parse_int(value, "intervention value");
        model = model.intervene(settings);
      }
      causal::Dataset sample = model.sample(sm_n, sm_seed, sm_population);
      std::ostringstream csv;
      causal::write_csv(sample, csv);
      emit(csv.str(), out_path);
      return 0;
    }
  } catch (const causal::Error& e) {
    std::cerr << "error [" << causal::error_code_name(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  }
  return 1;
}
