#include "hcc/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "hcc/error.hpp"

namespace hcc {
namespace {

using nlohmann::json;

// RFC 4180 field splitting for a single physical line.
std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty() && !was_quoted) {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else {
      field += c;
    }
  }
  if (quoted) {
    fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ": unterminated quoted field");
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

double parse_number(const std::string& cell, std::size_t line_no, const std::string& column) {
  std::size_t b = cell.find_first_not_of(" \t");
  std::size_t e = cell.find_last_not_of(" \t");
  double v = 0.0;
  if (b != std::string::npos) {
    const char* first = cell.data() + b;
    const char* last = cell.data() + e + 1;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec == std::errc() && ptr == last) return v;
  }
  fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ", column '" + column +
                              "': non-numeric cell '" + cell + "'");
}

std::string read_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kNotFound, std::string("cannot open ") + what + " " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) fail(ErrorCode::kInternal, "cannot format number");
  return std::string(buf, ptr);
}

bool ScoreTable::fully_labeled() const {
  for (const auto& r : rows) {
    if (!r.true_leaf) return false;
  }
  return true;
}

std::vector<CalibrationRecord> ScoreTable::records(const Taxonomy& t) const {
  std::vector<CalibrationRecord> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    if (!r.true_leaf) {
      fail(ErrorCode::kValidation,
           "instance '" + r.scores.instance_id + "' has no true_leaf; labels are required here");
    }
    // Rows were validated (and renormalized if requested) on ingestion.
    out.push_back(make_record(t, r.scores, *r.true_leaf, SimplexPolicy::kReject));
  }
  return out;
}

std::vector<PropagatedScores> ScoreTable::propagated(const Taxonomy& t) const {
  std::vector<PropagatedScores> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(propagate_scores(t, r.scores));
  return out;
}

ScoreTable ingest_scores(std::istream& in, const Taxonomy& t, bool renormalize) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };

  if (!next_line()) fail(ErrorCode::kParse, "score file is empty");
  const auto header = split_csv_line(line, line_no);
  if (header.size() < 2 || header[0] != "instance_id" || header[1] != "true_leaf") {
    fail(ErrorCode::kParse, "score header must start with instance_id,true_leaf");
  }
  // column -> leaf position
  std::vector<std::size_t> position(header.size(), 0);
  std::vector<bool> seen(t.leaf_count(), false);
  for (std::size_t c = 2; c < header.size(); ++c) {
    auto v = t.find(header[c]);
    if (!v || !t.is_leaf(*v)) {
      fail(ErrorCode::kValidation, "score header names unknown leaf column '" + header[c] + "'");
    }
    const std::size_t pos = *t.leaf_position(*v);
    if (seen[pos]) fail(ErrorCode::kValidation, "leaf column '" + header[c] + "' appears twice");
    seen[pos] = true;
    position[c] = pos;
  }
  for (std::size_t p = 0; p < seen.size(); ++p) {
    if (!seen[p]) {
      fail(ErrorCode::kValidation,
           "score header is missing leaf column '" + t.name(t.leaf_order()[p]) + "'");
    }
  }

  ScoreTable table;
  const SimplexPolicy policy = renormalize ? SimplexPolicy::kRenormalize : SimplexPolicy::kReject;
  while (next_line()) {
    const auto cells = split_csv_line(line, line_no);
    if (cells.size() != header.size()) {
      fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " cells, found " +
                                  std::to_string(cells.size()));
    }
    ScoreRow row;
    row.scores.instance_id = cells[0];
    if (!cells[1].empty()) {
      auto v = t.find(cells[1]);
      if (!v || !t.is_leaf(*v)) {
        fail(ErrorCode::kValidation, "line " + std::to_string(line_no) + ": true_leaf '" +
                                         cells[1] + "' is not a leaf of the taxonomy");
      }
      row.true_leaf = *v;
    }
    row.scores.values.assign(t.leaf_count(), 0.0);
    for (std::size_t c = 2; c < cells.size(); ++c) {
      row.scores.values[position[c]] = parse_number(cells[c], line_no, header[c]);
    }
    try {
      enforce_simplex(row.scores, policy);
    } catch (const Error& e) {
      fail(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

ScoreTable ingest_scores(const std::filesystem::path& path, const Taxonomy& t, bool renormalize) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kNotFound, "cannot open score file " + path.string());
  return ingest_scores(in, t, renormalize);
}

void write_scores(std::ostream& out, const Taxonomy& t, std::span<const ScoreRow> rows) {
  out << "instance_id,true_leaf";
  for (NodeIndex leaf : t.leaf_order()) out << ',' << csv_escape(t.name(leaf));
  out << '\n';
  for (const auto& r : rows) {
    out << csv_escape(r.scores.instance_id) << ','
        << (r.true_leaf ? csv_escape(t.name(*r.true_leaf)) : std::string());
    for (double v : r.scores.values) out << ',' << format_double(v);
    out << '\n';
  }
}

ScoreTable table_from_synthetic(std::span<const LabeledScores> data) {
  ScoreTable table;
  table.rows.reserve(data.size());
  for (const auto& d : data) table.rows.push_back(ScoreRow{d.truth, d.scores});
  return table;
}

// ---------------------------------------------------------------------------

Model calibrate_model(const Taxonomy& t, const CoverSpace& space,
                      std::span<const CalibrationRecord> records, bool with_risk_control,
                      unsigned threads) {
  Model m{calibrate_family(t, space, records, threads), std::nullopt};
  if (with_risk_control) m.risk = calibrate_risk_family(t, space, records, threads);
  return m;
}

std::string save_model_string(const Model& model, const Taxonomy& t) {
  const auto& fam = model.family;
  fam.check_taxonomy(t);
  json doc;
  doc["format"] = "hcc-model";
  doc["format_version"] = kModelFormatVersion;
  doc["created_by"] = std::string("hcc ") + kVersion;
  doc["taxonomy_hash"] = t.fingerprint_hex();
  doc["cover_mode"] = cover_mode_name(fam.space().mode());
  doc["n_calibration"] = fam.calibration_size();
  auto covers = json::array();
  for (const auto& p : fam.predictors()) {
    json c;
    c["id"] = p.cover().id;
    c["members"] = t.names_of(p.cover().members);
    c["conformity"] = std::vector<double>(p.sorted_conformity().begin(),
                                          p.sorted_conformity().end());
    covers.push_back(std::move(c));
  }
  doc["covers"] = std::move(covers);
  if (model.risk) {
    json rc;
    rc["grid_steps"] = kRiskGridSteps;
    auto curves = json::array();
    for (const auto& p : model.risk->predictors()) {
      curves.push_back(std::vector<double>(p.mean_loss().begin(), p.mean_loss().end()));
    }
    rc["mean_loss"] = std::move(curves);
    doc["risk_control"] = std::move(rc);
  }
  return doc.dump(1) + "\n";
}

void save_model(const Model& model, const Taxonomy& t, const std::filesystem::path& path) {
  write_file_atomic(path, save_model_string(model, t));
}

Model load_model_string(const std::string& document, const Taxonomy& t) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParse, std::string("model document is not valid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object() || doc.value("format", "") != "hcc-model") {
      fail(ErrorCode::kParse, "not an hcc model document");
    }
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      fail(ErrorCode::kVersionMismatch, "model format_version " + std::to_string(version) +
                                            " is not supported (expected " +
                                            std::to_string(kModelFormatVersion) + ")");
    }
    if (doc.at("taxonomy_hash").get<std::string>() != t.fingerprint_hex()) {
      fail(ErrorCode::kHashMismatch, "model was calibrated on taxonomy " +
                                         doc.at("taxonomy_hash").get<std::string>() +
                                         ", not " + t.fingerprint_hex());
    }
    const std::string mode_name = doc.at("cover_mode").get<std::string>();
    CoverMode mode;
    if (mode_name == cover_mode_name(CoverMode::kExhaustive)) {
      mode = CoverMode::kExhaustive;
    } else if (mode_name == cover_mode_name(CoverMode::kDepthLimited)) {
      mode = CoverMode::kDepthLimited;
    } else {
      fail(ErrorCode::kParse, "unknown cover_mode '" + mode_name + "'");
    }
    const std::size_t n_cal = doc.at("n_calibration").get<std::size_t>();

    const auto& covers = doc.at("covers");
    std::vector<NodeSet> sets;
    std::vector<std::vector<double>> conformity;
    for (std::size_t i = 0; i < covers.size(); ++i) {
      const auto& c = covers[i];
      if (c.at("id").get<std::size_t>() != i) fail(ErrorCode::kParse, "cover ids out of order");
      NodeSet s(t.size());
      for (const auto& nm : c.at("members")) s.insert(t.index_of(nm.get<std::string>()));
      if (!is_nol_cover(t, s)) {
        fail(ErrorCode::kValidation, "model cover " + std::to_string(i) + " is not a NOL-cover");
      }
      sets.push_back(std::move(s));
      conformity.push_back(c.at("conformity").get<std::vector<double>>());
      if (conformity.back().size() != n_cal) {
        fail(ErrorCode::kParse, "cover " + std::to_string(i) + " has " +
                                    std::to_string(conformity.back().size()) +
                                    " conformity scores, expected " + std::to_string(n_cal));
      }
    }
    const std::vector<NodeSet> stored = sets;
    CoverSpace space(std::move(sets), t, mode);
    if (space.size() != stored.size()) fail(ErrorCode::kParse, "duplicate covers in model");
    std::vector<CoverPredictor> predictors;
    for (std::size_t i = 0; i < space.size(); ++i) {
      if (space[i].members != stored[i]) {
        fail(ErrorCode::kParse, "model covers are not in canonical order");
      }
      predictors.emplace_back(space[i], std::move(conformity[i]));
    }
    Model m{PredictorFamily(space, std::move(predictors)), std::nullopt};

    if (doc.contains("risk_control")) {
      const auto& rc = doc["risk_control"];
      if (rc.at("grid_steps").get<std::size_t>() != kRiskGridSteps) {
        fail(ErrorCode::kVersionMismatch, "risk-control grid size differs from this build");
      }
      const auto& curves = rc.at("mean_loss");
      if (curves.size() != space.size()) {
        fail(ErrorCode::kParse, "risk-control curves do not match the cover count");
      }
      std::vector<RiskControlPredictor> risk;
      for (std::size_t i = 0; i < space.size(); ++i) {
        risk.emplace_back(space[i], curves[i].get<std::vector<double>>(), n_cal, 0.1);
      }
      m.risk.emplace(space, std::move(risk));
    }
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("malformed model document: ") + e.what());
  }
}

Model load_model(const std::filesystem::path& path, const Taxonomy& t) {
  return load_model_string(read_file(path, "model file"), t);
}

// ---------------------------------------------------------------------------

std::string describe_taxonomy(const Taxonomy& t) {
  json doc;
  doc["nodes"] = t.size();
  doc["leaves"] = t.leaf_count();
  doc["depth"] = t.depth();
  doc["root"] = t.name(t.root());
  doc["is_tree"] = t.is_tree();
  doc["taxonomy_hash"] = t.fingerprint_hex();
  if (t.leaf_count() < t.size()) {
    doc["default_beta"] = default_beta(t);
  } else {
    doc["default_beta"] = nullptr;
  }
  return doc.dump(2);
}

std::string describe_covers(const Taxonomy& t, const CoverSpace& space, bool include_list) {
  std::ostringstream out;
  out << "covers: " << space.size() << "\n";
  out << "mode: " << cover_mode_name(space.mode()) << "\n";
  std::map<std::size_t, std::size_t> histogram;
  for (const auto& c : space.covers()) ++histogram[c.member_list.size()];
  out << "size histogram:\n";
  for (const auto& [size, count] : histogram) out << "  " << size << ": " << count << "\n";
  for (const auto& w : space.warnings) out << "warning: " << w.message << "\n";
  if (include_list) {
    for (const auto& c : space.covers()) {
      out << c.id << ':';
      const char* sep = " ";
      for (NodeIndex v : c.member_list) {
        out << sep << t.name(v);
        sep = "; ";
      }
      out << '\n';
    }
  }
  return out.str();
}

json prediction_json(const Taxonomy& t, const HccPrediction& p, const std::string& id,
                     Method method, std::optional<NodeIndex> truth) {
  json rec;
  rec["instance_id"] = id;
  rec["method"] = method_name(method);
  rec["selected"] = t.names_of(p.selected);
  rec["cost"] = p.cost;
  rec["covered_leaves"] = p.covered_leaves.count();
  rec["m_effective"] = p.m_effective;
  rec["m_before_collapse"] = p.m_before_collapse;
  rec["alpha_corrected"] = p.alpha_corrected;
  rec["pruned"] = p.pruned;
  rec["candidates_evaluated"] = p.candidates_evaluated;
  rec["selected_cover_id"] = p.selected_cover_id ? json(*p.selected_cover_id) : json(nullptr);
  rec["fallback"] = p.fallback;
  rec["pruning_skipped"] = p.pruning_skipped;
  if (truth) {
    rec["true_leaf"] = t.name(*truth);
    rec["covered"] = p.covered_leaves.contains(*truth);
  }
  return rec;
}

json metrics_json(const Metrics& m) {
  auto s = [](const Summary& x) { return json{{"mean", x.mean}, {"sd", x.sd}}; };
  return json{{"coverage", s(m.coverage)},
              {"cost", s(m.cost)},
              {"ps_size", s(m.ps_size)},
              {"covered_leaves", s(m.covered_leaves)},
              {"n_test", m.n_test}};
}

std::string metrics_csv_header() {
  return "method,alpha,beta,n_test,coverage_mean,coverage_sd,cost_mean,cost_sd,"
         "ps_size_mean,ps_size_sd,covered_leaves_mean,covered_leaves_sd\n";
}

std::string metrics_csv_row(Method method, double alpha, double beta, const Metrics& m) {
  std::ostringstream out;
  out << method_name(method) << ',' << format_double(alpha) << ',' << format_double(beta) << ','
      << m.n_test;
  for (const Summary* s : {&m.coverage, &m.cost, &m.ps_size, &m.covered_leaves}) {
    out << ',' << format_double(s->mean) << ',' << format_double(s->sd);
  }
  out << '\n';
  return out.str();
}

std::string sweep_csv(Method method, double alpha, std::span<const SweepRow> rows) {
  std::string out = metrics_csv_header();
  for (const auto& r : rows) out += metrics_csv_row(method, alpha, r.beta, r.metrics);
  return out;
}

json error_record(const Error& e) {
  return json{{"error",
               {{"kind", is_validation_error(e.code()) ? "validation" : "runtime"},
                {"code", error_code_name(e.code())},
                {"message", e.what()}}}};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) fail(ErrorCode::kIo, "failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorCode::kIo, "cannot move output into place at " + path.string());
  }
}

// ---------------------------------------------------------------------------

CoverSelection parse_cover_selection(std::string_view name) {
  if (name == "exhaustive") return CoverSelection::kExhaustive;
  if (name == "depth-limited") return CoverSelection::kDepthLimited;
  if (name == "auto") return CoverSelection::kAuto;
  fail(ErrorCode::kInvalidArgument, "unknown cover mode '" + std::string(name) +
                                        "' (expected exhaustive, depth-limited or auto)");
}

const char* cover_selection_name(CoverSelection s) {
  switch (s) {
    case CoverSelection::kExhaustive:
      return "exhaustive";
    case CoverSelection::kDepthLimited:
      return "depth-limited";
    case CoverSelection::kAuto:
      return "auto";
  }
  return "unknown";
}

namespace {

std::vector<Method> parse_methods(const json& v) {
  std::vector<std::string> names;
  if (v.is_array()) {
    for (const auto& x : v) names.push_back(x.get<std::string>());
  } else {
    std::stringstream ss(v.get<std::string>());
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) names.push_back(item);
    }
  }
  std::vector<Method> out;
  for (const auto& n : names) {
    if (n == "all") {
      for (Method m : all_methods()) out.push_back(m);
    } else {
      out.push_back(parse_method(n));
    }
  }
  if (out.empty()) fail(ErrorCode::kInvalidArgument, "no method selected");
  return out;
}

}  // namespace

RunConfig run_config_from_json(const json& doc) {
  if (!doc.is_object()) fail(ErrorCode::kInvalidArgument, "run configuration must be an object");
  static const std::vector<std::string> known = {
      "taxonomy", "scores",      "alpha",     "beta",      "methods", "method",
      "split",    "seed",        "max_covers", "cover_mode", "renormalize",
      "pad_empty", "threads",    "output"};
  for (const auto& [key, _] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      fail(ErrorCode::kInvalidArgument, "unknown configuration key '" + key + "'");
    }
  }
  RunConfig cfg;
  try {
    cfg.taxonomy_path = doc.value("taxonomy", "");
    cfg.scores_path = doc.value("scores", "");
    cfg.alpha = doc.value("alpha", cfg.alpha);
    if (doc.contains("beta")) {
      const auto& b = doc["beta"];
      if (b.is_string()) {
        if (b.get<std::string>() != "auto") {
          fail(ErrorCode::kInvalidArgument, "beta must be a number or \"auto\"");
        }
      } else {
        cfg.beta = b.get<double>();
      }
    }
    if (doc.contains("methods")) cfg.methods = parse_methods(doc["methods"]);
    if (doc.contains("method")) cfg.methods = parse_methods(doc["method"]);
    cfg.split_ratio = doc.value("split", cfg.split_ratio);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.max_covers = doc.value("max_covers", cfg.max_covers);
    if (doc.contains("cover_mode")) {
      cfg.cover_mode = parse_cover_selection(doc["cover_mode"].get<std::string>());
    }
    cfg.renormalize = doc.value("renormalize", cfg.renormalize);
    cfg.pad_empty = doc.value("pad_empty", cfg.pad_empty);
    cfg.threads = doc.value("threads", cfg.threads);
    cfg.output_path = doc.value("output", "");
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("bad configuration value: ") + e.what());
  }
  validate_run_config(cfg);
  return cfg;
}

void validate_run_config(const RunConfig& cfg) {
  check_alpha(cfg.alpha);
  if (cfg.beta) check_cost_params(CostParams{*cfg.beta});
  if (!(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "split ratio must lie in (0, 1)");
  }
  if (cfg.taxonomy_path.empty()) fail(ErrorCode::kInvalidArgument, "no taxonomy path given");
  if (cfg.scores_path.empty()) fail(ErrorCode::kInvalidArgument, "no score path given");
  if (cfg.methods.empty()) fail(ErrorCode::kInvalidArgument, "no method selected");
  if (cfg.max_covers == 0) fail(ErrorCode::kInvalidArgument, "max covers must be positive");
}

RunArtifacts run_pipeline(const RunConfig& cfg) {
  validate_run_config(cfg);
  const Taxonomy t = Taxonomy::load(cfg.taxonomy_path);
  const ScoreTable table = ingest_scores(std::filesystem::path(cfg.scores_path), t,
                                         cfg.renormalize);
  if (!table.fully_labeled()) {
    fail(ErrorCode::kValidation, "evaluation needs a true_leaf on every row");
  }
  const CoverSpace space = build_cover_space(t, cfg.cover_mode, cfg.max_covers);

  const auto order = split_permutation(table.rows.size(), cfg.split_ratio, cfg.seed);
  const std::size_t n_cal =
      static_cast<std::size_t>(static_cast<double>(table.rows.size()) * cfg.split_ratio);
  ScoreTable cal_table, test_table;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_cal ? cal_table : test_table).rows.push_back(table.rows[order[i]]);
  }
  const auto cal = cal_table.records(t);
  const auto test = test_table.records(t);

  bool need_risk = false;
  for (Method m : cfg.methods) need_risk = need_risk || m == Method::kHccCrc;
  const Model model = calibrate_model(t, space, cal, need_risk, cfg.threads);

  const double beta = cfg.beta ? *cfg.beta : default_beta(t);
  const CostParams cp{beta};
  const InferenceOptions opts{cfg.pad_empty};

  RunArtifacts art;
  art.model = save_model_string(model, t);
  art.metrics_csv = metrics_csv_header();
  json summary;
  summary["format"] = "hcc-summary";
  summary["format_version"] = kSummaryFormatVersion;
  summary["created_by"] = std::string("hcc ") + kVersion;
  summary["taxonomy_hash"] = t.fingerprint_hex();
  summary["alpha"] = cfg.alpha;
  summary["beta"] = beta;
  summary["beta_source"] = cfg.beta ? "user" : "auto";
  summary["split"] = cfg.split_ratio;
  summary["seed"] = cfg.seed;
  summary["n_calibration"] = cal.size();
  summary["n_test"] = test.size();
  summary["cover_mode"] = cover_mode_name(space.mode());
  summary["cover_selection"] = cover_selection_name(cfg.cover_mode);
  summary["n_covers"] = space.size();
  summary["pad_empty"] = cfg.pad_empty;
  summary["methods"] = json::array();

  std::string predictions;
  for (Method m : cfg.methods) {
    const auto preds = predict_batch(m, model.family, model.risk ? &*model.risk : nullptr, t,
                                     test, cfg.alpha, cp, opts, cfg.threads);
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const auto& row = test_table.rows[i];
      predictions += prediction_json(t, preds[i], row.scores.instance_id, m, row.true_leaf).dump();
      predictions += '\n';
    }
    const Metrics metrics = evaluate_predictions(t, preds, test, beta);
    std::size_t fallbacks = 0;
    for (const auto& p : preds) fallbacks += p.fallback ? 1 : 0;
    json entry = metrics_json(metrics);
    entry["method"] = method_name(m);
    entry["fallbacks"] = fallbacks;
    summary["methods"].push_back(std::move(entry));
    art.metrics_csv += metrics_csv_row(m, cfg.alpha, beta, metrics);
  }
  art.predictions = std::move(predictions);
  art.summary = std::move(summary);

  if (!cfg.output_path.empty()) {
    const std::filesystem::path dir(cfg.output_path);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::kIo, "cannot create output directory " + dir.string());
    write_file_atomic(dir / "model.json", art.model);
    write_file_atomic(dir / "predictions.jsonl", art.predictions);
    write_file_atomic(dir / "metrics.json", art.summary.dump(2) + "\n");
    write_file_atomic(dir / "metrics.csv", art.metrics_csv);
  }
  return art;
}

}  // namespace hcc
