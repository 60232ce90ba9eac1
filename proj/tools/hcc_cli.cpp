// Command-line front end over the C API.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hcc/hcc.h"

namespace {

using nlohmann::json;

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Failure {
  std::string code;
  std::string message;
  bool validation;
};

[[noreturn]] void raise_status(hcc_status s) {
  throw Failure{hcc_status_name(s), hcc_last_error(), hcc_status_is_validation(s) != 0};
}

void check(hcc_status s) {
  if (s != HCC_OK) raise_status(s);
}

[[noreturn]] void usage_error(const std::string& message) {
  throw Failure{"invalid_argument", message, true};
}

struct CString {
  char* p = nullptr;
  ~CString() { hcc_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
};

using Taxonomy = Handle<hcc_taxonomy, hcc_taxonomy_free>;
using Covers = Handle<hcc_covers, hcc_covers_free>;
using Dataset = Handle<hcc_dataset, hcc_dataset_free>;
using Model = Handle<hcc_model, hcc_model_free>;

struct Options {
  std::string taxonomy;
  std::string scores;
  std::string model;
  double alpha = 0.1;
  std::string beta = "auto";
  std::string method = "hcc";
  double split = 0.8;
  std::uint64_t seed = 0;
  std::size_t max_covers = 200000;
  std::string cover_mode = "auto";
  bool renormalize = false;
  bool pad_empty = false;
  unsigned threads = 1;
  std::string output;
  bool list = false;
  bool with_crc = false;
  std::string betas = "0,0.05,0.1,0.2,0.3,0.5,0.75,1,1.5,2";
  std::size_t n = 1000;
  double signal = 2.0;
  double noise = 1.0;
};

void load_taxonomy(const Options& o, Taxonomy& t) {
  if (o.taxonomy.empty()) usage_error("--taxonomy is required");
  check(hcc_taxonomy_load(o.taxonomy.c_str(), &t.p));
}

void load_scores(const Options& o, const Taxonomy& t, Dataset& d) {
  if (o.scores.empty()) usage_error("--scores is required");
  check(hcc_dataset_load(t.p, o.scores.c_str(), o.renormalize ? 1 : 0, &d.p));
}

void load_model(const Options& o, const Taxonomy& t, Model& m) {
  if (o.model.empty()) usage_error("--model is required");
  check(hcc_model_load(t.p, o.model.c_str(), &m.p));
}

std::optional<double> parse_beta(const std::string& text) {
  if (text == "auto") return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    usage_error("--beta must be a number or 'auto', got '" + text + "'");
  }
  return v;
}

hcc_predict_options predict_options(const Options& o) {
  hcc_predict_options p;
  hcc_predict_options_init(&p);
  p.method = o.method.c_str();
  p.alpha = o.alpha;
  const auto beta = parse_beta(o.beta);
  p.beta_auto = beta ? 0 : 1;
  p.beta = beta.value_or(0.0);
  p.pad_empty = o.pad_empty ? 1 : 0;
  p.threads = o.threads;
  return p;
}

// Writes `text` to --output (atomically) or stdout.
void emit(const Options& o, const std::string& text) {
  if (o.output.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  const std::filesystem::path path(o.output);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw Failure{"io_error", "cannot write " + tmp.string(), false};
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Failure{"io_error", "cannot write " + path.string(), false};
  }
}

void build_covers(const Options& o, const Taxonomy& t, Covers& c) {
  check(hcc_covers_build(t.p, o.cover_mode.c_str(), o.max_covers, &c.p));
}

// ---------------------------------------------------------------------------

void cmd_validate(const Options& o) {
  Taxonomy t;
  load_taxonomy(o, t);
  CString desc;
  check(hcc_taxonomy_describe(t.p, &desc.p));
  json doc = json::parse(desc.str());
  if (!o.scores.empty()) {
    Dataset d;
    load_scores(o, t, d);
    std::size_t n = 0;
    check(hcc_dataset_size(d.p, &n));
    doc["score_rows"] = n;
  }
  emit(o, doc.dump(2));
}

void cmd_covers(const Options& o) {
  Taxonomy t;
  load_taxonomy(o, t);
  Covers c;
  build_covers(o, t, c);
  CString text;
  check(hcc_covers_describe(t.p, c.p, o.list ? 1 : 0, &text.p));
  emit(o, text.str());
}

void cmd_calibrate(const Options& o) {
  if (o.output.empty()) usage_error("--output is required for calibrate");
  Taxonomy t;
  load_taxonomy(o, t);
  Dataset d;
  load_scores(o, t, d);
  Covers c;
  build_covers(o, t, c);
  hcc_calibrate_options co;
  hcc_calibrate_options_init(&co);
  co.threads = o.threads;
  co.with_risk_control = o.with_crc ? 1 : 0;
  Model m;
  check(hcc_model_calibrate(t.p, c.p, d.p, &co, &m.p));
  check(hcc_model_save(m.p, t.p, o.output.c_str()));
}

void cmd_predict(const Options& o) {
  Taxonomy t;
  load_taxonomy(o, t);
  Model m;
  load_model(o, t, m);
  Dataset d;
  load_scores(o, t, d);
  const auto p = predict_options(o);
  CString out;
  check(hcc_predict(m.p, t.p, d.p, &p, &out.p));
  emit(o, out.str());
}

void cmd_evaluate(const Options& o) {
  if (!o.model.empty()) {
    Taxonomy t;
    load_taxonomy(o, t);
    Model m;
    load_model(o, t, m);
    Dataset d;
    load_scores(o, t, d);
    const auto p = predict_options(o);
    CString out;
    check(hcc_evaluate(m.p, t.p, d.p, &p, &out.p));
    emit(o, out.str());
    return;
  }
  json cfg;
  cfg["taxonomy"] = o.taxonomy;
  cfg["scores"] = o.scores;
  cfg["alpha"] = o.alpha;
  const auto beta = parse_beta(o.beta);
  if (beta) {
    cfg["beta"] = *beta;
  } else {
    cfg["beta"] = "auto";
  }
  cfg["methods"] = o.method;
  cfg["split"] = o.split;
  cfg["seed"] = o.seed;
  cfg["max_covers"] = o.max_covers;
  cfg["cover_mode"] = o.cover_mode;
  cfg["renormalize"] = o.renormalize;
  cfg["pad_empty"] = o.pad_empty;
  cfg["threads"] = o.threads;
  cfg["output"] = o.output;
  CString summary;
  check(hcc_run_pipeline(cfg.dump().c_str(), &summary.p));
  std::cout << summary.str() << '\n';
}

std::vector<double> parse_betas(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = parse_beta(item);
    if (!v) usage_error("--betas takes numbers only");
    out.push_back(*v);
  }
  if (out.empty()) usage_error("--betas is empty");
  return out;
}

void cmd_sweep_beta(const Options& o) {
  const auto betas = parse_betas(o.betas);
  Taxonomy t;
  load_taxonomy(o, t);
  Model m;
  load_model(o, t, m);
  Dataset d;
  load_scores(o, t, d);
  const auto p = predict_options(o);
  CString out;
  check(hcc_sweep_beta(m.p, t.p, d.p, &p, betas.data(), betas.size(), &out.p));
  emit(o, out.str());
}

void cmd_synth(const Options& o) {
  Taxonomy t;
  load_taxonomy(o, t);
  Dataset d;
  check(hcc_dataset_synth(t.p, o.n, o.signal, o.noise, o.seed, &d.p));
  CString csv;
  check(hcc_dataset_to_csv(t.p, d.p, &csv.p));
  emit(o, csv.str());
}

void print_error(const Failure& f) {
  const json rec = {{"error",
                     {{"kind", f.validation ? "validation" : "runtime"},
                      {"code", f.code},
                      {"message", f.message}}}};
  std::cerr << rec.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Hierarchical conformal classification"};
  app.set_version_flag("--version", std::string(hcc_version()));
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--taxonomy", o.taxonomy, "taxonomy JSON document")->envname("HCC_TAXONOMY");
    sub->add_option("--threads", o.threads, "worker threads")
        ->envname("HCC_THREADS")
        ->check(CLI::Range(1u, 1024u));
    sub->add_option("--output", o.output, "output path")->envname("HCC_OUTPUT");
  };
  auto add_scores = [&](CLI::App* sub) {
    sub->add_option("--scores", o.scores, "score table (CSV)")->envname("HCC_SCORES");
    sub->add_flag("--renormalize", o.renormalize, "divide rows by their sum")
        ->envname("HCC_RENORMALIZE");
  };
  auto add_covers = [&](CLI::App* sub) {
    sub->add_option("--max-covers", o.max_covers, "cover enumeration cap")
        ->envname("HCC_MAX_COVERS")
        ->check(CLI::PositiveNumber);
    sub->add_option("--cover-mode", o.cover_mode, "exhaustive | depth-limited | auto")
        ->envname("HCC_COVER_MODE")
        ->check(CLI::IsMember({"exhaustive", "depth-limited", "auto"}));
  };
  auto add_predict = [&](CLI::App* sub) {
    sub->add_option("--model", o.model, "calibrated model")->envname("HCC_MODEL");
    sub->add_option("--alpha", o.alpha, "miscoverage level in [0, 1)")->envname("HCC_ALPHA");
    sub->add_option("--beta", o.beta, "cost weight or 'auto'")->envname("HCC_BETA");
    sub->add_option("--method", o.method,
                    "standard | lca | hcc | hcc-no-prune | hcc-no-correction | hcc-crc")
        ->envname("HCC_METHOD");
    sub->add_flag("--pad-empty", o.pad_empty, "never return an empty leaf set")
        ->envname("HCC_PAD_EMPTY");
  };

  auto* validate = app.add_subcommand("validate", "check a taxonomy and optional score file");
  add_common(validate);
  add_scores(validate);

  auto* covers = app.add_subcommand("covers", "enumerate NOL-covers");
  add_common(covers);
  add_covers(covers);
  covers->add_flag("--list", o.list, "print every cover");

  auto* calibrate = app.add_subcommand("calibrate", "calibrate one predictor per cover");
  add_common(calibrate);
  add_scores(calibrate);
  add_covers(calibrate);
  calibrate->add_flag("--with-crc", o.with_crc, "also store recall risk-control curves")
      ->envname("HCC_WITH_CRC");

  auto* predict = app.add_subcommand("predict", "predict sets for a score file");
  add_common(predict);
  add_scores(predict);
  add_predict(predict);

  auto* evaluate = app.add_subcommand(
      "evaluate", "split, calibrate, predict and score (or score an existing --model)");
  add_common(evaluate);
  add_scores(evaluate);
  add_covers(evaluate);
  add_predict(evaluate);
  evaluate->add_option("--split", o.split, "calibration fraction")->envname("HCC_SPLIT");
  evaluate->add_option("--seed", o.seed, "split seed")->envname("HCC_SEED");

  auto* sweep = app.add_subcommand("sweep-beta", "metrics over a list of cost weights");
  add_common(sweep);
  add_scores(sweep);
  add_predict(sweep);
  sweep->add_option("--betas", o.betas, "comma-separated cost weights")->envname("HCC_BETAS");

  auto* synth = app.add_subcommand("synth", "generate a synthetic labeled score file");
  add_common(synth);
  synth->add_option("--n", o.n, "instances")->envname("HCC_N")->check(CLI::PositiveNumber);
  synth->add_option("--signal", o.signal, "logit boost of the true leaf")->envname("HCC_SIGNAL");
  synth->add_option("--noise", o.noise, "logit noise scale")->envname("HCC_NOISE");
  synth->add_option("--seed", o.seed, "generator seed")->envname("HCC_SEED");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error(Failure{"invalid_argument", e.what(), true});
    return kExitValidation;
  }

  try {
    if (*validate) cmd_validate(o);
    else if (*covers) cmd_covers(o);
    else if (*calibrate) cmd_calibrate(o);
    else if (*predict) cmd_predict(o);
    else if (*evaluate) cmd_evaluate(o);
    else if (*sweep) cmd_sweep_beta(o);
    else if (*synth) cmd_synth(o);
  } catch (const Failure& f) {
    print_error(f);
    return f.validation ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    print_error(Failure{"internal_error", e.what(), false});
    return kExitRuntime;
  }
  return 0;
}
