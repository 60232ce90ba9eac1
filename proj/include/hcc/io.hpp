#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hcc/baselines.hpp"
#include "hcc/conformal.hpp"
#include "hcc/covers.hpp"
#include "hcc/evaluation.hpp"
#include "hcc/taxonomy.hpp"

namespace hcc {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kModelFormatVersion = 1;
inline constexpr int kSummaryFormatVersion = 1;

// ---------------------------------------------------------------------------
// Score tables
//
// Comma-separated text with a header row:
//   instance_id,true_leaf,<leaf name>,<leaf name>,...
// Leaf columns may come in any order but must match the taxonomy leaves
// one to one. Fields containing commas or quotes use RFC 4180 quoting.
// An empty true_leaf marks an unlabeled row.
// ---------------------------------------------------------------------------

struct ScoreRow {
  std::optional<NodeIndex> true_leaf;
  LeafScores scores;  // reordered to Taxonomy::leaf_order()
};

struct ScoreTable {
  std::vector<ScoreRow> rows;

  bool fully_labeled() const;
  // Throws kValidation when a row lacks a label.
  std::vector<CalibrationRecord> records(const Taxonomy& t) const;
  std::vector<PropagatedScores> propagated(const Taxonomy& t) const;
};

ScoreTable ingest_scores(std::istream& in, const Taxonomy& t, bool renormalize);
ScoreTable ingest_scores(const std::filesystem::path& path, const Taxonomy& t, bool renormalize);

void write_scores(std::ostream& out, const Taxonomy& t, std::span<const ScoreRow> rows);
ScoreTable table_from_synthetic(std::span<const LabeledScores> data);

// ---------------------------------------------------------------------------
// Model artifacts
// ---------------------------------------------------------------------------

struct Model {
  PredictorFamily family;
  std::optional<RiskControlFamily> risk;
};

Model calibrate_model(const Taxonomy& t, const CoverSpace& space,
                      std::span<const CalibrationRecord> records, bool with_risk_control,
                      unsigned threads = 1);

std::string save_model_string(const Model& model, const Taxonomy& t);
void save_model(const Model& model, const Taxonomy& t, const std::filesystem::path& path);
/// Throws kParse for malformed or truncated documents, kVersionMismatch
/// for an unknown format_version and kHashMismatch for another taxonomy.
Model load_model_string(const std::string& document, const Taxonomy& t);
Model load_model(const std::filesystem::path& path, const Taxonomy& t);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

std::string describe_taxonomy(const Taxonomy& t);
std::string describe_covers(const Taxonomy& t, const CoverSpace& space, bool include_list);

nlohmann::json prediction_json(const Taxonomy& t, const HccPrediction& p, const std::string& id,
                               Method method, std::optional<NodeIndex> truth);
nlohmann::json metrics_json(const Metrics& m);
std::string metrics_csv_header();
std::string metrics_csv_row(Method method, double alpha, double beta, const Metrics& m);
std::string sweep_csv(Method method, double alpha, std::span<const SweepRow> rows);

/// JSON number formatting that round-trips doubles exactly.
std::string format_double(double v);

nlohmann::json error_record(const Error& e);

/// Writes to a sibling temporary file then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// ---------------------------------------------------------------------------
// End-to-end run
// ---------------------------------------------------------------------------

struct RunConfig {
  std::string taxonomy_path;
  std::string scores_path;
  double alpha = 0.1;
  std::optional<double> beta;  // nullopt: default_beta()
  std::vector<Method> methods{Method::kHcc};
  double split_ratio = 0.8;
  std::uint64_t seed = 0;
  std::size_t max_covers = kDefaultMaxCovers;
  CoverSelection cover_mode = CoverSelection::kAuto;
  bool renormalize = false;
  bool pad_empty = false;
  unsigned threads = 1;
  std::string output_path;  // directory; empty writes nothing
};

CoverSelection parse_cover_selection(std::string_view name);
const char* cover_selection_name(CoverSelection s);

/// Reads the keys taxonomy, scores, alpha, beta (number or "auto"), methods
/// (array or comma list, "all" allowed), split, seed, max_covers,
/// cover_mode, renormalize, pad_empty, threads, output. Unknown keys are
/// rejected.
RunConfig run_config_from_json(const nlohmann::json& doc);
void validate_run_config(const RunConfig& cfg);

struct RunArtifacts {
  nlohmann::json summary;
  std::string model;
  std::string predictions;  // JSON lines
  std::string metrics_csv;
};

/// taxonomy -> covers -> split -> calibrate -> predict (each method) ->
/// evaluate. Artifacts are only written after every step succeeded:
/// model.json, predictions.jsonl, metrics.json and metrics.csv under
/// cfg.output_path.
RunArtifacts run_pipeline(const RunConfig& cfg);

}  // namespace hcc
