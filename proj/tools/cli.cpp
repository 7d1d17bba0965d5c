#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "classtalk/analyzers.hpp"
#include "classtalk/errors.hpp"
#include "classtalk/feature_catalog.hpp"
#include "classtalk/render.hpp"

namespace classtalk::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr std::string_view kToolVersion = "classtalk 0.1.0";

// Analysis cannot start because the inputs lack a column; maps to the
// configuration exit code.
struct MissingAnnotation : ConfigError {
  using ConfigError::ConfigError;
};

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

bool parse_bool(const std::string& v, const std::string& where) {
  std::string s = v;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw ConfigError(where + ": expected a boolean, got '" + v + "'");
}

double parse_real(const std::string& v, const std::string& where) {
  if (auto x = parse_number(v)) return *x;
  throw ConfigError(where + ": expected a number, got '" + v + "'");
}

std::size_t parse_count(const std::string& v, const std::string& where) {
  const double x = parse_real(v, where);
  if (x < 0 || x != static_cast<double>(static_cast<std::size_t>(x))) {
    throw ConfigError(where + ": expected a non-negative integer, got '" + v + "'");
  }
  return static_cast<std::size_t>(x);
}

}  // namespace

RunConfig parse_config(const std::string& contents, const fs::path& base_dir) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(contents);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }

  RunConfig cfg;
  auto path_of = [&](const std::string& v) {
    fs::path p(v);
    return p.is_absolute() ? p : base_dir / p;
  };
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"columns.speaker", [&](auto& v, auto&) { cfg.column_mapping.speaker_column = v; }},
      {"columns.text", [&](auto& v, auto&) { cfg.column_mapping.text_column = v; }},
      {"columns.start_time", [&](auto& v, auto&) { cfg.column_mapping.start_time_column = v; }},
      {"columns.end_time", [&](auto& v, auto&) { cfg.column_mapping.end_time_column = v; }},
      {"paths.roster", [&](auto& v, auto&) { cfg.roster_path = path_of(v); }},
      {"paths.lexicon", [&](auto& v, auto&) { cfg.lexicon_path = path_of(v); }},
      {"paths.role_map", [&](auto& v, auto&) { cfg.role_map_path = path_of(v); }},
      {"paths.output_dir", [&](auto& v, auto&) { cfg.output_dir = path_of(v); }},
      {"classifier.endpoint", [&](auto& v, auto&) { cfg.classifier_endpoint = v; }},
      {"classifier.precomputed", [&](auto& v, auto&) { cfg.precomputed_path = path_of(v); }},
      {"classifier.max_batch",
       [&](auto& v, auto& w) { cfg.limits.max_batch = parse_count(v, w); }},
      {"classifier.timeout_seconds",
       [&](auto& v, auto& w) {
         cfg.limits.timeout = std::chrono::duration<double>(parse_real(v, w));
       }},
      {"classifier.retries",
       [&](auto& v, auto& w) { cfg.limits.retries = static_cast<int>(parse_count(v, w)); }},
      {"classifier.backoff_ms",
       [&](auto& v, auto& w) {
         cfg.limits.backoff_base = std::chrono::milliseconds(parse_count(v, w));
       }},
      {"preprocess.case_sensitive",
       [&](auto& v, auto& w) { cfg.deid.case_sensitive = parse_bool(v, w); }},
      {"preprocess.deidentify_speaker",
       [&](auto& v, auto& w) { cfg.deid.deidentify_speaker_column = parse_bool(v, w); }},
      {"preprocess.separator", [&](auto& v, auto&) { cfg.separator = v; }},
      {"preprocess.strip_whitespace",
       [&](auto& v, auto& w) { cfg.normalize.strip_whitespace = parse_bool(v, w); }},
      {"preprocess.collapse_spaces",
       [&](auto& v, auto& w) { cfg.normalize.collapse_internal_spaces = parse_bool(v, w); }},
      {"preprocess.capitalize",
       [&](auto& v, auto& w) { cfg.normalize.capitalize_sentence_start = parse_bool(v, w); }},
      {"llm.base_url", [&](auto& v, auto&) { cfg.llm.base_url = v; }},
      {"llm.api_key_env", [&](auto& v, auto&) { cfg.llm.api_key_env = v; }},
      {"llm.model", [&](auto& v, auto&) { cfg.llm.params.model_id = v; }},
      {"llm.temperature",
       [&](auto& v, auto& w) { cfg.llm.params.temperature = parse_real(v, w); }},
      {"llm.max_output_tokens",
       [&](auto& v, auto& w) {
         cfg.llm.params.max_output_tokens = static_cast<int>(parse_count(v, w));
       }},
      {"llm.context_tokens",
       [&](auto& v, auto& w) { cfg.llm.params.context_tokens = parse_count(v, w); }},
      {"llm.chars_per_token",
       [&](auto& v, auto& w) { cfg.llm.params.chars_per_token = parse_real(v, w); }},
      {"llm.line_numbers",
       [&](auto& v, auto& w) { cfg.format_options.include_line_numbers = parse_bool(v, w); }},
      {"llm.line_format", [&](auto& v, auto&) { cfg.format_options.line_format = v; }},
      {"run.jobs", [&](auto& v, auto& w) { cfg.jobs = parse_count(v, w); }},
      {"run.format", [&](auto& v, auto&) { cfg.format = parse_format(v); }},
  };

  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError("config key '" + section + "' must be inside a [section]");
    }
    for (const auto& [key, node] : body) {
      const std::string where = section + "." + key;
      auto it = setters.find(where);
      if (it == setters.end()) throw ConfigError("unknown config key '" + where + "'");
      try {
        it->second(unquote(node.data()), where);
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        throw ConfigError(where + ": " + e.what());
      }
    }
  }
  cfg.column_mapping.validate();
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::string contents;
  try {
    contents = read_file(path);
  } catch (const Error& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  return parse_config(contents, path.parent_path());
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& raw : inputs) {
    const fs::path p(raw);
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p)) {
        const auto name = entry.path().filename().string();
        if (name == kManifestName || name == kDeidReportName) continue;
        if (entry.is_regular_file() && format_from_path(entry.path())) {
          found.push_back(entry.path());
        }
      }
      std::sort(found.begin(), found.end());
      if (found.empty()) throw ConfigError("no .csv or .json transcripts in " + raw);
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(p, ec)) {
      if (!format_from_path(p)) throw ConfigError("not a .csv or .json file: " + raw);
      out.push_back(p);
    } else {
      throw ConfigError("input not found: " + raw);
    }
  }
  return out;
}

namespace {

// Per-file work runs on up to `jobs` threads; results land by index, so
// output order never depends on scheduling.
template <class F>
void parallel_for(std::size_t n, std::size_t jobs, F&& f) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) f(i);
  };
  if (jobs == 1) {
    worker();
    return;
  }
  std::vector<std::jthread> threads;
  for (std::size_t j = 0; j < jobs; ++j) threads.emplace_back(worker);
}

struct FileResult {
  std::string input;
  std::string output;
  std::string error;
  ojson details = ojson::object();
};

// Flags that can override the configuration file.
struct Overrides {
  std::optional<std::string> config;
  std::optional<std::string> output_dir;
  std::optional<std::size_t> jobs;
  std::optional<std::string> format;
  std::optional<std::string> speaker_column;
  std::optional<std::string> text_column;
  std::optional<std::string> start_column;
  std::optional<std::string> end_column;
  std::optional<std::string> role_map;
  std::optional<std::string> roster;
  std::optional<std::string> lexicon;
  std::optional<std::string> endpoint;
  std::optional<std::string> precomputed;
  std::optional<std::size_t> max_batch;
};

RunConfig resolve_config(const Overrides& o) {
  RunConfig cfg = o.config ? load_config(*o.config) : RunConfig{};
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.format) cfg.format = parse_format(*o.format);
  if (o.speaker_column) cfg.column_mapping.speaker_column = *o.speaker_column;
  if (o.text_column) cfg.column_mapping.text_column = *o.text_column;
  if (o.start_column) cfg.column_mapping.start_time_column = *o.start_column;
  if (o.end_column) cfg.column_mapping.end_time_column = *o.end_column;
  if (o.role_map) cfg.role_map_path = *o.role_map;
  if (o.roster) cfg.roster_path = *o.roster;
  if (o.lexicon) cfg.lexicon_path = *o.lexicon;
  if (o.endpoint) {
    cfg.classifier_endpoint = *o.endpoint;
    if (!o.precomputed) cfg.precomputed_path.reset();
  }
  if (o.precomputed) {
    cfg.precomputed_path = *o.precomputed;
    if (!o.endpoint) cfg.classifier_endpoint.reset();
  }
  if (o.max_batch) cfg.limits.max_batch = *o.max_batch;
  cfg.column_mapping.validate();
  return cfg;
}

std::string display(const fs::path& p) { return p.generic_string(); }

// Runs `load` and turns any library error into a configuration error, for
// resources that must be valid before any file is touched.
template <class F>
auto setup(const std::string& what, F&& load) {
  try {
    return load();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

// Output path per input: <output_dir>/<stem>.<ext>. Rejects an output
// directory holding any input and two inputs mapping to one output.
std::vector<fs::path> plan_outputs(const std::vector<fs::path>& inputs, const RunConfig& cfg) {
  if (!cfg.output_dir) throw ConfigError("an output directory is required (--output-dir)");
  const fs::path out_dir = *cfg.output_dir;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + display(out_dir));
  const auto out_canon = fs::weakly_canonical(out_dir);
  std::vector<fs::path> outputs;
  std::set<fs::path> seen;
  for (const auto& in : inputs) {
    if (fs::weakly_canonical(fs::absolute(in).parent_path()) == out_canon) {
      throw ConfigError("output directory " + display(out_dir) + " must differ from the input " +
                        "location of " + display(in));
    }
    const auto fmt = cfg.format ? *cfg.format : *format_from_path(in);
    fs::path out = out_dir / in.stem();
    out += "." + std::string(to_string(fmt));
    if (!seen.insert(out).second) {
      throw ConfigError("two inputs would both be written to " + display(out));
    }
    outputs.push_back(out);
  }
  return outputs;
}

ojson mapping_json(const ColumnMapping& m) {
  ojson j;
  j["speaker"] = m.speaker_column;
  j["text"] = m.text_column;
  j["start_time"] = m.start_time_column ? ojson(*m.start_time_column) : ojson(nullptr);
  j["end_time"] = m.end_time_column ? ojson(*m.end_time_column) : ojson(nullptr);
  return j;
}

int finish_run(const std::string& command, ojson options, const std::vector<FileResult>& results,
               const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::size_t failed = 0;
  ojson files = ojson::array();
  for (const auto& r : results) {
    ojson f;
    f["input"] = r.input;
    f["output"] = r.error.empty() ? ojson(r.output) : ojson(nullptr);
    f["status"] = r.error.empty() ? "ok" : "error";
    if (!r.error.empty()) {
      f["error"] = r.error;
      ++failed;
      err << "error: " << r.input << ": " << r.error << "\n";
    }
    for (const auto& [k, v] : r.details.items()) f[k] = v;
    files.push_back(std::move(f));
  }
  ojson manifest;
  manifest["tool"] = kToolVersion;
  manifest["command"] = command;
  manifest["options"] = std::move(options);
  manifest["files"] = std::move(files);
  manifest["summary"] = {{"total", results.size()},
                         {"ok", results.size() - failed},
                         {"failed", failed}};
  write_file_atomic(*cfg.output_dir / kManifestName, manifest.dump(2) + "\n");
  out << command << ": " << (results.size() - failed) << " of " << results.size()
      << " file(s) written to " << display(*cfg.output_dir) << "\n";
  return failed ? kExitPartial : kExitOk;
}

// --- preprocess ---

constexpr std::array<std::string_view, 3> kStepOrder = {"deidentify", "merge", "normalize"};

int cmd_preprocess(const Overrides& o, const std::vector<std::string>& raw_inputs,
                   const std::vector<std::string>& raw_steps, std::ostream& out,
                   std::ostream& err) {
  const RunConfig cfg = resolve_config(o);
  std::set<std::string> requested;
  for (const auto& s : raw_steps) {
    if (std::find(kStepOrder.begin(), kStepOrder.end(), s) == kStepOrder.end()) {
      throw ConfigError("unknown step '" + s + "' (valid: deidentify, merge, normalize)");
    }
    requested.insert(s);
  }
  std::vector<std::string> steps;
  for (auto s : kStepOrder) {
    if (requested.count(std::string(s))) steps.emplace_back(s);
  }
  const bool deid = requested.count("deidentify") > 0;
  const bool merge = requested.count("merge") > 0;
  const bool normalize = requested.count("normalize") > 0;

  Roster roster;
  if (deid) {
    if (!cfg.roster_path) {
      throw ConfigError("the deidentify step needs a roster (--roster or [paths] roster)");
    }
    roster = setup("roster", [&] { return Roster::load(*cfg.roster_path); });
    for (const auto& w : roster.warnings()) err << "warning: " << w << "\n";
  }
  const auto inputs = expand_inputs(raw_inputs);
  const auto outputs = plan_outputs(inputs, cfg);

  std::vector<FileResult> results(inputs.size());
  std::vector<std::optional<DeidReport>> reports(inputs.size());
  parallel_for(inputs.size(), cfg.jobs, [&](std::size_t i) {
    auto& r = results[i];
    r.input = display(inputs[i]);
    r.output = display(outputs[i].filename());
    try {
      const auto in_format = *format_from_path(inputs[i]);
      const auto out_format = cfg.format ? *cfg.format : in_format;
      Transcript t = load_transcript(inputs[i], in_format, cfg.column_mapping);
      r.details["rows_in"] = t.size();
      if (steps.empty() && out_format == in_format) {
        // Identity pipeline: the file parsed, so copy it byte for byte.
        write_file_atomic(outputs[i], read_file(inputs[i]));
      } else {
        if (deid) {
          auto [clean, report] = deidentify(t, roster, cfg.deid);
          t = std::move(clean);
          r.details["replacements"] = report.total_count();
          reports[i] = std::move(report);
        }
        if (merge) t = merge_consecutive(t, cfg.separator);
        if (normalize) t = normalize_text(t, cfg.normalize);
        save_transcript(t, outputs[i], out_format);
      }
      r.details["rows_out"] = t.size();
    } catch (const std::exception& e) {
      r.error = e.what();
      reports[i].reset();
    }
  });

  ojson options;
  options["steps"] = steps;
  options["columns"] = mapping_json(cfg.column_mapping);
  options["format"] = cfg.format ? ojson(to_string(*cfg.format)) : ojson("same as input");
  if (deid) {
    options["roster"] = display(*cfg.roster_path);
    options["case_sensitive"] = cfg.deid.case_sensitive;
    options["deidentify_speaker"] = cfg.deid.deidentify_speaker_column;
    options["deid_report"] = kDeidReportName;
  }
  if (merge) options["separator"] = cfg.separator;
  if (normalize) {
    options["strip_whitespace"] = cfg.normalize.strip_whitespace;
    options["collapse_spaces"] = cfg.normalize.collapse_internal_spaces;
    options["capitalize"] = cfg.normalize.capitalize_sentence_start;
  }
  if (deid) {
    std::vector<std::pair<std::string, DeidReport>> ok_reports;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (reports[i]) ok_reports.emplace_back(inputs[i].stem().string(), *reports[i]);
    }
    write_file_atomic(*cfg.output_dir / kDeidReportName, deid_report_csv(ok_reports));
  }
  return finish_run("preprocess", std::move(options), results, cfg, out, err);
}

// --- annotate ---

int cmd_annotate(const Overrides& o, const std::vector<std::string>& raw_inputs,
                 const std::vector<std::string>& features, std::ostream& out,
                 std::ostream& err) {
  const RunConfig cfg = resolve_config(o);
  if (features.empty()) throw ConfigError("no features requested (--features)");
  std::vector<FeatureSpec> specs;
  for (const auto& f : features) specs.push_back(builtin_feature_spec(f));

  const bool needs_classifier = std::any_of(specs.begin(), specs.end(), [](const auto& s) {
    return s.backend == FeatureBackend::classifier;
  });
  const bool needs_lexicon = std::any_of(specs.begin(), specs.end(), [](const auto& s) {
    return s.name == catalog::kMathDensity;
  });

  Lexicon lexicon;
  if (needs_lexicon) {
    if (!cfg.lexicon_path) {
      throw ConfigError("math_density needs a lexicon (--lexicon or [paths] lexicon)");
    }
    lexicon = setup("lexicon", [&] { return Lexicon::load(*cfg.lexicon_path); });
    if (lexicon.empty()) throw ConfigError("lexicon " + display(*cfg.lexicon_path) + " is empty");
  }
  RoleMap roles;
  std::unique_ptr<ClassifierBackend> backend;
  if (needs_classifier) {
    if (cfg.classifier_endpoint.has_value() == cfg.precomputed_path.has_value()) {
      throw ConfigError(
          "classifier features need exactly one of a classifier endpoint (--endpoint) or a "
          "precomputed label file (--precomputed)");
    }
    if (!cfg.role_map_path) {
      throw ConfigError("classifier features need a role map (--role-map or [paths] role_map)");
    }
    roles = setup("role map", [&] { return load_role_map(*cfg.role_map_path); });
    if (cfg.precomputed_path) {
      backend = setup("precomputed labels", [&] {
        return std::make_unique<PrecomputedClassifier>(
            PrecomputedClassifier::from_file(*cfg.precomputed_path));
      });
    } else {
      if (cfg.limits.max_batch == 0) throw ConfigError("max_batch must be at least 1");
      backend = std::make_unique<RemoteClassifier>(
          setup("endpoint", [&] { return Endpoint::parse(*cfg.classifier_endpoint); }),
          cfg.limits);
    }
  }
  const auto inputs = expand_inputs(raw_inputs);
  const auto outputs = plan_outputs(inputs, cfg);

  std::vector<FileResult> results(inputs.size());
  parallel_for(inputs.size(), cfg.jobs, [&](std::size_t i) {
    auto& r = results[i];
    r.input = display(inputs[i]);
    r.output = display(outputs[i].filename());
    try {
      const auto in_format = *format_from_path(inputs[i]);
      Transcript t = load_transcript(inputs[i], in_format, cfg.column_mapping);
      for (const auto& spec : specs) {
        if (spec.name == catalog::kTalkTime) {
          t = annotate_talk_time(t);
        } else if (spec.name == catalog::kMathDensity) {
          t = annotate_math_density(t, lexicon);
        } else {
          t = annotate_with_classifier(t, spec, roles, *backend);
        }
      }
      save_transcript(t, outputs[i], cfg.format ? *cfg.format : in_format);
      r.details["rows"] = t.size();
    } catch (const std::exception& e) {
      r.error = e.what();
    }
  });

  ojson options;
  options["features"] = features;
  options["columns"] = mapping_json(cfg.column_mapping);
  options["format"] = cfg.format ? ojson(to_string(*cfg.format)) : ojson("same as input");
  if (needs_lexicon) options["lexicon"] = display(*cfg.lexicon_path);
  if (needs_classifier) {
    options["role_map"] = display(*cfg.role_map_path);
    if (cfg.precomputed_path) {
      options["backend"] = "precomputed";
      options["precomputed"] = display(*cfg.precomputed_path);
    } else {
      options["backend"] = "remote";
      options["endpoint"] = *cfg.classifier_endpoint;
      options["max_batch"] = cfg.limits.max_batch;
      options["retries"] = cfg.limits.retries;
    }
  }
  return finish_run("annotate", std::move(options), results, cfg, out, err);
}

// --- analyze ---

struct AnalyzeFlags {
  std::vector<std::string> inputs;
  std::string mode = "print";
  std::optional<std::string> out_file;
  std::optional<std::string> svg_file;
  std::string feature;
  std::string group_by = "speaker";
  std::string repr = "raw";
  std::string value_kind = "detect";
  // qualitative
  std::string value;
  std::size_t max_examples = 10;
  std::size_t before = 0;
  std::size_t after = 0;
  // lexical
  std::size_t n = 1;
  std::optional<std::size_t> top_k;
  std::vector<std::string> groups;
  bool use_log_odds = false;
  std::optional<double> prior_mass;
  std::vector<std::string> background;
  // temporal
  std::size_t bins = 10;
  // llm
  std::string prompt = "summarize";
  std::optional<std::string> template_file;
  std::optional<std::string> system_file;
  std::optional<std::string> model;
  std::optional<std::string> base_url;
};

ValueKind parse_value_kind(const std::string& s) {
  if (s == "detect") return ValueKind::detect;
  if (s == "numeric") return ValueKind::numeric;
  if (s == "labels") return ValueKind::labels;
  throw ConfigError("unknown value kind '" + s + "' (valid: detect, numeric, labels)");
}

std::vector<Transcript> load_corpus(const std::vector<fs::path>& files, const RunConfig& cfg) {
  std::vector<Transcript> corpus;
  for (const auto& f : files) corpus.push_back(load_transcript(f, cfg.column_mapping));
  return corpus;
}

void require_column(const std::vector<Transcript>& corpus, const std::string& column,
                    const std::vector<std::string>& raw_inputs) {
  for (const auto& t : corpus) {
    if (t.has_column(column)) continue;
    std::string msg = "transcript '" + t.source_id() + "' has no '" + column + "' column";
    if (auto feature = catalog::feature_for_column(column)) {
      std::string inputs;
      for (const auto& i : raw_inputs) inputs += " " + i;
      msg += "; run `classtalk annotate --features " + *feature + inputs +
             " --output-dir <dir>` and analyze the annotated files";
    }
    throw MissingAnnotation(msg);
  }
}

SpeakerGroup parse_group(const std::string& spec, const std::optional<RoleMap>& roles) {
  if (spec.rfind("role:", 0) == 0) {
    const auto role = parse_role(spec.substr(5));
    if (!roles) throw ConfigError("group '" + spec + "' needs a role map (--role-map)");
    return {std::string(to_string(role)), speakers_with_role(*roles, role)};
  }
  SpeakerGroup g{spec, {}};
  std::stringstream ss(spec);
  for (std::string s; std::getline(ss, s, ',');) {
    if (!s.empty()) g.speakers.insert(s);
  }
  if (g.speakers.empty()) throw ConfigError("empty speaker group '" + spec + "'");
  return g;
}

// One group per distinct speaker, in name order.
std::vector<SpeakerGroup> per_speaker_groups(const std::vector<Transcript>& corpus) {
  std::set<std::string> speakers;
  for (const auto& t : corpus) {
    for (const auto& u : t.utterances()) speakers.insert(u.speaker);
  }
  std::vector<SpeakerGroup> groups;
  for (const auto& s : speakers) groups.push_back({s, {s}});
  return groups;
}

void emit(const std::string& text, const AnalyzeFlags& f, std::ostream& out) {
  if (f.out_file) {
    write_file_atomic(*f.out_file, text);
  } else {
    out << text;
    if (!text.empty() && text.back() != '\n') out << "\n";
  }
}

int cmd_analyze(const std::string& analysis, const Overrides& o, const AnalyzeFlags& f,
                std::ostream& out, std::ostream& err) {
  const RunConfig cfg = resolve_config(o);
  const auto files = expand_inputs(f.inputs);
  const auto corpus = load_corpus(files, cfg);

  if (analysis == "llm") {
    if (f.mode == "plot_data" || f.mode == "plot") {
      throw ConfigError("the llm analysis has no plot_data form");
    }
    PromptTemplate tmpl;
    if (f.template_file) {
      tmpl.name = "custom";
      tmpl.user_template = setup("template", [&] { return read_file(*f.template_file); });
      if (f.system_file) {
        tmpl.system_text = setup("system prompt", [&] { return read_file(*f.system_file); });
      }
    } else {
      tmpl = builtin_template(f.prompt);
    }
    tmpl.validate();
    cfg.format_options.validate();
    PromptParams params = cfg.llm.params;
    if (f.model) params.model_id = *f.model;
    auto client = HttpChatClient::from_environment(f.base_url ? *f.base_url : cfg.llm.base_url,
                                                   cfg.llm.api_key_env);
    std::string text;
    for (const auto& t : corpus) {
      const auto result = run_prompt(tmpl, t, cfg.format_options, client, params);
      if (result.truncated_input) {
        err << "warning: " << t.source_id() << " was truncated to fit the context budget\n";
      }
      text += "== " + t.source_id() + " ==\n" + result.text + "\n";
    }
    emit(text, f, out);
    return kExitOk;
  }

  const auto mode = parse_render_mode(f.mode);
  AnalysisReport report;
  if (analysis == "qualitative") {
    require_column(corpus, f.feature, f.inputs);
    Value target = f.value;
    if (auto x = parse_number(f.value)) target = *x;
    report = qualitative_examples(corpus, f.feature, target, f.max_examples,
                                  ContextWindow{f.before, f.after});
  } else if (analysis == "quantitative") {
    require_column(corpus, f.feature, f.inputs);
    report = quantitative_summary(corpus, f.feature, parse_group_by(f.group_by),
                                  parse_representation(f.repr), parse_value_kind(f.value_kind));
  } else if (analysis == "temporal") {
    require_column(corpus, f.feature, f.inputs);
    report = temporal_profile(corpus, f.feature, BinSpec{f.bins}, parse_group_by(f.group_by),
                              parse_representation(f.repr), parse_value_kind(f.value_kind));
  } else if (analysis == "lexical") {
    std::optional<RoleMap> roles;
    if (cfg.role_map_path) {
      roles = setup("role map", [&] { return load_role_map(*cfg.role_map_path); });
    }
    std::vector<SpeakerGroup> groups;
    for (const auto& g : f.groups) groups.push_back(parse_group(g, roles));
    if (f.use_log_odds) {
      if (groups.size() != 2) {
        throw ConfigError("log-odds compares exactly two groups (--group A --group B)");
      }
      const auto counts = ngram_counts(corpus, f.n, groups);
      LogOddsPrior prior;
      prior.prior_mass = f.prior_mass;
      if (!f.background.empty()) {
        const auto bg_corpus = load_corpus(expand_inputs(f.background), cfg);
        const auto bg = ngram_counts(bg_corpus, f.n, per_speaker_groups(bg_corpus));
        NgramCounts merged;
        for (const auto& [_, c] : bg) {
          for (const auto& [g, k] : c) merged[g] += k;
        }
        prior.background = std::move(merged);
      }
      const auto result = log_odds(counts.at(groups[0].name), counts.at(groups[1].name), prior,
                                   f.top_k);
      report = log_odds_report(result, groups[0].name, groups[1].name, f.n);
    } else {
      if (groups.empty()) groups = per_speaker_groups(corpus);
      report = ngram_frequency_report(ngram_counts(corpus, f.n, groups), f.n, f.top_k);
    }
  } else {
    throw ConfigError("unknown analysis '" + analysis + "'");
  }

  emit(render(report, mode), f, out);
  if (f.svg_file) write_file_atomic(*f.svg_file, render_svg(report));
  return kExitOk;
}

// --- health ---

int cmd_health(const Overrides& o, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = resolve_config(o);
  if (!cfg.classifier_endpoint) {
    throw ConfigError("no classifier endpoint (--endpoint or [classifier] endpoint)");
  }
  const auto endpoint = Endpoint::parse(*cfg.classifier_endpoint);
  try {
    const auto status = health_check(endpoint, cfg.limits);
    out << (status.ok ? "ok" : "not ok") << " " << endpoint.origin() << "\n";
    for (const auto& f : status.features) out << "  " << f << "\n";
    return status.ok ? kExitOk : kExitPartial;
  } catch (const TransportError& e) {
    err << "error: " << e.what() << "\n";
    return kExitPartial;
  }
}

void add_analysis_common(CLI::App* sub, AnalyzeFlags& f) {
  sub->add_option("inputs", f.inputs, "Transcript files or corpus directories")->required();
}

void add_feature_options(CLI::App* sub, AnalyzeFlags& f, bool with_repr) {
  sub->add_option("--feature", f.feature, "Annotation column to analyze")->required();
  sub->add_option("--group-by", f.group_by, "speaker or none")->capture_default_str();
  if (with_repr) {
    sub->add_option("--repr", f.repr, "raw, percentage or mean")->capture_default_str();
  }
  sub->add_option("--value-kind", f.value_kind, "detect, numeric or labels")
      ->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pre-process, annotate and analyze classroom conversation transcripts",
               "classtalk"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  Overrides o;
  app.add_option("--config", o.config, "INI-style configuration file");
  app.add_option("--output-dir", o.output_dir, "Directory for written transcripts");
  app.add_option("--jobs", o.jobs, "Files processed in parallel (0 = all cores)");
  app.add_option("--format", o.format, "Output format: csv or json (default: input's)");
  app.add_option("--speaker-column", o.speaker_column, "Speaker column name");
  app.add_option("--text-column", o.text_column, "Utterance text column name");
  app.add_option("--start-column", o.start_column, "Start time column name");
  app.add_option("--end-column", o.end_column, "End time column name");
  app.add_option("--role-map", o.role_map, "JSON object mapping speakers to roles");

  std::vector<std::string> inputs;

  auto* pre = app.add_subcommand("preprocess", "De-identify, merge and normalize transcripts");
  std::vector<std::string> steps;
  pre->add_option("inputs", inputs, "Transcript files or corpus directories")->required();
  pre->add_option("--steps", steps, "Comma-separated subset of deidentify,merge,normalize")
      ->delimiter(',');
  pre->add_option("--roster", o.roster, "JSON roster of names and replacements");

  auto* ann = app.add_subcommand("annotate", "Add utterance-level feature columns");
  std::vector<std::string> features;
  ann->add_option("inputs", inputs, "Transcript files or corpus directories")->required();
  ann->add_option("--features", features, "Comma-separated feature names")
      ->delimiter(',')
      ->required();
  ann->add_option("--lexicon", o.lexicon, "Math term list, one per line");
  ann->add_option("--endpoint", o.endpoint, "Classifier service URL");
  ann->add_option("--precomputed", o.precomputed, "CSV of precomputed classifier labels");
  ann->add_option("--max-batch", o.max_batch, "Items per classifier request");

  auto* ana = app.add_subcommand("analyze", "Analyze annotated transcripts");
  ana->require_subcommand(1);
  AnalyzeFlags af;
  ana->add_option("--mode", af.mode, "print, report or plot_data")->capture_default_str();
  ana->add_option("--out", af.out_file, "Write the rendering to this file");
  ana->add_option("--svg", af.svg_file, "Also write an SVG chart to this file");

  auto* qual = ana->add_subcommand("qualitative", "Excerpts with a given feature value");
  add_analysis_common(qual, af);
  qual->add_option("--feature", af.feature, "Annotation column")->required();
  qual->add_option("--value", af.value, "Value to look for")->required();
  qual->add_option("--max", af.max_examples, "Maximum number of examples")
      ->capture_default_str();
  qual->add_option("--before", af.before, "Context lines before")->capture_default_str();
  qual->add_option("--after", af.after, "Context lines after")->capture_default_str();

  auto* quant = ana->add_subcommand("quantitative", "Per-speaker totals or shares");
  add_analysis_common(quant, af);
  add_feature_options(quant, af, true);

  auto* lex = ana->add_subcommand("lexical", "N-gram frequencies and log-odds");
  add_analysis_common(lex, af);
  lex->add_option("--n", af.n, "N-gram length")->capture_default_str();
  lex->add_option("--top-k", af.top_k, "Keep only the top K n-grams");
  lex->add_option("--group", af.groups, "role:<role> or comma-separated speakers (repeatable)");
  lex->add_flag("--log-odds", af.use_log_odds, "Compare two groups with weighted log-odds");
  lex->add_option("--prior-mass", af.prior_mass, "Dirichlet prior mass (default: corpus size)");
  lex->add_option("--background", af.background, "Background corpus for the prior");

  auto* temp = ana->add_subcommand("temporal", "Feature profile over transcript time bins");
  add_analysis_common(temp, af);
  add_feature_options(temp, af, true);
  temp->add_option("--bins", af.bins, "Number of bins")->capture_default_str();

  auto* llm = ana->add_subcommand("llm", "Prompt a chat model with each transcript");
  add_analysis_common(llm, af);
  llm->add_option("--prompt", af.prompt, "summarize or suggestions")->capture_default_str();
  llm->add_option("--template-file", af.template_file, "Custom user prompt with {transcript}");
  llm->add_option("--system-file", af.system_file, "System prompt for a custom template");
  llm->add_option("--model", af.model, "Model identifier");
  llm->add_option("--base-url", af.base_url, "OpenAI-compatible API base URL");

  auto* health = app.add_subcommand("health", "Check the classifier service");
  health->add_option("--endpoint", o.endpoint, "Classifier service URL");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (pre->parsed()) return cmd_preprocess(o, inputs, steps, out, err);
    if (ann->parsed()) return cmd_annotate(o, inputs, features, out, err);
    if (health->parsed()) return cmd_health(o, out, err);
    for (auto* sub : {qual, quant, lex, temp, llm}) {
      if (sub->parsed()) return cmd_analyze(sub->get_name(), o, af, out, err);
    }
    err << "error: no command\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitPartial;
  }
}

}  // namespace classtalk::cli
