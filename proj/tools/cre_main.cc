// cre: command-line front end for the challenge-set toolkit.

#include <atomic>
#include <csignal>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "cre/annotate.h"
#include "cre/annotation_server.h"
#include "cre/corpus.h"
#include "cre/error.h"
#include "cre/eval.h"
#include "cre/inoculate.h"
#include "cre/miner.h"
#include "cre/parallel.h"
#include "cre/predict.h"
#include "cre/qa.h"
#include "cre/schema.h"
#include "cre/version.h"

namespace {

struct Globals {
  std::string schema;
  std::string profile;
  int workers = 0;
  bool verbose = false;
  bool quiet = false;
};

struct RemoteFlags {
  std::size_t batch_size = 64;
  int max_in_flight = 4;
  int max_attempts = 3;
  int timeout_ms = 30000;

  void add(CLI::App* app) {
    app->add_option("--batch-size", batch_size, "Instances per remote request")
        ->capture_default_str();
    app->add_option("--max-in-flight", max_in_flight,
                    "Concurrent remote requests")->capture_default_str();
    app->add_option("--max-attempts", max_attempts,
                    "Attempts per remote batch")->capture_default_str();
    app->add_option("--timeout-ms", timeout_ms, "Remote request timeout")
        ->capture_default_str();
  }
  cre::RemoteOptions options() const {
    cre::RemoteOptions o;
    o.batch_size = batch_size;
    o.max_in_flight = max_in_flight;
    o.max_attempts = max_attempts;
    o.timeout = std::chrono::milliseconds(timeout_ms);
    return o;
  }
};

// "-" or empty writes to stdout.
void with_output(const std::string& path,
                 const std::function<void(std::ostream&)>& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw cre::Error("io_error", "cannot write " + path);
  fn(out);
  out.close();
  if (!out) throw cre::Error("io_error", "write to " + path + " failed");
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out;
}

int fail(const std::string& code, const std::string& message) {
  std::cerr << "error: code=" << code << " message=\"" << escape(message)
            << "\"\n";
  return code == "usage_error" ? 2 : 1;
}

std::string pct(const std::optional<double>& v) {
  return v ? fmt::format("{:.1f}%", *v * 100.0) : std::string("undefined");
}

std::string num(const std::optional<double>& v) {
  return v ? fmt::format("{:.3f}", *v) : std::string("undefined");
}

cre::HalfCounts total_counts(const cre::SplitManifest& m) {
  return {m.half_a.size(), m.half_b.size()};
}

const std::vector<std::string>& pick_half(const cre::SplitManifest& m,
                                          const std::string& half) {
  if (half == "a") return m.half_a;
  if (half == "b") return m.half_b;
  throw cre::ValidationError("half must be a or b, got '" + half + "'");
}

std::atomic<cre::AnnotationServer*> g_server{nullptr};

void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("cre");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%Y-%m-%dT%H:%M:%S.%e] [%l] %v");

  CLI::App app{"Challenge-set toolkit for relation extraction", "cre"};
  app.set_version_flag("--version", std::string(cre::kVersion));
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; command-line flags win");

  Globals g;
  g.schema = cre::default_schema_path().string();
  app.add_option("--schema", g.schema, "Relation schema file")
      ->envname("CRE_SCHEMA")
      ->capture_default_str();
  app.add_option("--profile", g.profile, "Schema relation profile (e.g. cre)");
  app.add_option("--workers", g.workers,
                 "Worker threads; 0 = available parallelism, 1 = sequential")
      ->capture_default_str();
  app.add_flag("-v,--verbose", g.verbose, "Debug logging");
  app.add_flag("-q,--quiet", g.quiet, "Warnings and errors only");

  std::function<void()> action;
  auto schema = [&] { return cre::load_schema(g.schema, g.profile); };

  // enumerate-pairs ---------------------------------------------------------
  auto* enumerate = app.add_subcommand("enumerate-pairs",
                                       "Candidate instances of a sentence corpus");
  std::string corpus_path, out_path = "-";
  enumerate->add_option("--corpus", corpus_path, "Sentence corpus (JSONL)")->required();
  enumerate->add_option("--out", out_path, "Output CRE-record file")->capture_default_str();
  enumerate->callback([&] {
    action = [&] {
      const auto sch = schema();
      const auto corpus = cre::load_sentences(corpus_path);
      std::vector<std::vector<cre::CandidateInstance>> parts(corpus.size());
      cre::parallel_for(corpus.size(), cre::resolve_workers(g.workers),
                        [&](std::size_t i) { parts[i] = cre::enumerate_pairs(corpus[i], sch); });
      std::vector<cre::CreRecord> records;
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        for (auto& inst : parts[i]) {
          cre::CreRecord r;
          r.instance = std::move(inst);
          r.tokens = corpus[i].tokens;
          r.group = r.instance.relation;
          r.source = corpus[i].source;
          records.push_back(std::move(r));
        }
      }
      with_output(out_path, [&](std::ostream& o) { cre::write_cre_records(records, o); });
      spdlog::info("{} sentences, {} candidate instances", corpus.size(), records.size());
    };
  });

  // expand-confusion --------------------------------------------------------
  auto* expand = app.add_subcommand(
      "expand-confusion", "Other same-typed pairs of an annotated instance");
  std::string instance_id;
  expand->add_option("--corpus", corpus_path, "Sentence corpus (JSONL)")->required();
  expand->add_option("--instance-id", instance_id, "Annotated instance")->required();
  expand->add_option("--out", out_path, "Output CRE-record file")->capture_default_str();
  expand->callback([&] {
    action = [&] {
      const auto sch = schema();
      const auto corpus = cre::load_sentences(corpus_path);
      for (const auto& s : corpus) {
        for (const auto& inst : cre::enumerate_pairs(s, sch)) {
          if (inst.instance_id != instance_id) continue;
          std::vector<cre::CreRecord> records;
          for (auto& x : cre::expand_confusion_set(s, inst, sch)) {
            records.push_back({std::move(x), s.tokens, inst.relation, s.source, {}});
          }
          with_output(out_path, [&](std::ostream& o) { cre::write_cre_records(records, o); });
          spdlog::info("{} confusion-set instances", records.size());
          return;
        }
      }
      throw cre::NotFoundError("instance " + instance_id +
                               " is not a candidate of any corpus sentence");
    };
  });

  // mine --------------------------------------------------------------------
  auto* mine = app.add_subcommand("mine", "Flag suspicious sentences with a seed predictor");
  std::string seed_spec;
  std::size_t chunk_size = 4096;
  RemoteFlags remote;
  mine->add_option("--corpus", corpus_path, "Sentence corpus (JSONL)")->required();
  mine->add_option("--seed", seed_spec, "Seed predictor KIND[:PARAM]")->required();
  mine->add_option("--out", out_path, "Output group file")->capture_default_str();
  mine->add_option("--chunk-size", chunk_size, "Instances per predictor call")
      ->capture_default_str();
  remote.add(mine);
  mine->callback([&] {
    action = [&] {
      const auto sch = schema();
      const auto corpus = cre::load_sentences(corpus_path);
      auto predictor = cre::make_predictor(cre::PredictorSpec::parse(seed_spec), sch,
                                           remote.options());
      cre::MineOptions opts;
      opts.workers = cre::resolve_workers(g.workers);
      opts.chunk_size = chunk_size;
      const auto groups = cre::mine(corpus, *predictor, sch, opts);
      with_output(out_path, [&](std::ostream& o) { cre::write_groups(groups, o); });
      std::set<std::string> sentences;
      for (const auto& gr : groups) sentences.insert(gr.sentence_id);
      spdlog::info("{} suspicious groups in {} of {} sentences", groups.size(),
                   sentences.size(), corpus.size());
    };
  });

  // sample ------------------------------------------------------------------
  auto* sample = app.add_subcommand("sample", "Per-relation random annotation batches");
  std::string groups_path;
  std::size_t per_relation = 100;
  std::uint64_t rng_seed = 0;
  std::vector<std::string> only_relations;
  sample->add_option("--groups", groups_path, "Group file from mine")->required();
  sample->add_option("--per-relation", per_relation, "Sentences per relation")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sample->add_option("--rng-seed", rng_seed, "Sampling seed")->capture_default_str();
  sample->add_option("--relations", only_relations,
                     "Restrict sampling to these relations")->delimiter(',');
  sample->add_option("--out", out_path, "Output sample file")->capture_default_str();
  sample->callback([&] {
    action = [&] {
      std::optional<std::set<std::string>> only;
      if (!only_relations.empty()) {
        only.emplace(only_relations.begin(), only_relations.end());
      }
      const auto s = cre::sample_batches(cre::load_groups(groups_path), per_relation,
                                         rng_seed, only);
      for (const auto& [relation, rs] : s.relations) {
        if (rs.shortfall) {
          spdlog::warn("{}: only {} suspicious sentence(s), wanted {}", relation,
                       rs.available, per_relation);
        }
      }
      with_output(out_path, [&](std::ostream& o) { cre::write_sample(s, o); });
      spdlog::info("sampled {} relation(s)", s.relations.size());
    };
  });

  // export-tasks ------------------------------------------------------------
  auto* export_tasks = app.add_subcommand("export-tasks", "Annotation task file from a sample");
  std::string sample_path;
  export_tasks->add_option("--sample", sample_path, "Sample file")->required();
  export_tasks->add_option("--corpus", corpus_path, "Sentence corpus (JSONL)")->required();
  export_tasks->add_option("--out", out_path, "Output task file")->capture_default_str();
  export_tasks->callback([&] {
    action = [&] {
      const auto tasks = cre::export_tasks(cre::load_sample(sample_path),
                                           cre::load_sentences(corpus_path), schema());
      with_output(out_path, [&](std::ostream& o) { cre::write_cre_records(tasks, o); });
      spdlog::info("{} tasks", tasks.size());
    };
  });

  // serve-annotation --------------------------------------------------------
  auto* serve = app.add_subcommand("serve-annotation", "Run the annotation HTTP service");
  std::string tasks_path, log_path, host = "127.0.0.1", guideline = "1", static_dir;
  int port = 8080;
  serve->add_option("--tasks", tasks_path, "Task file")->required();
  serve->add_option("--log", log_path, "Append-only label log")->required();
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--port", port, "Port; 0 picks a free one")->capture_default_str();
  serve->add_option("--guideline-version", guideline, "Recorded with every label")
      ->capture_default_str();
  serve->add_option("--static", static_dir, "Directory served under /");
  serve->callback([&] {
    action = [&] {
      const auto sch = schema();
      std::map<std::string, std::string> prompts;
      for (const auto& r : sch.relations()) {
        if (!r.gloss.empty()) prompts.emplace(r.relation, r.gloss);
      }
      cre::AnnotationService service(cre::load_cre_records(tasks_path), log_path,
                                     guideline);
      std::optional<std::filesystem::path> mount;
      if (!static_dir.empty()) mount = static_dir;
      cre::AnnotationServer server(service, prompts, mount);
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      spdlog::info("serving {} tasks on http://{}:{}", service.tasks().size(), host, bound);
      server.run();
      g_server = nullptr;
    };
  });

  // adjudicate --------------------------------------------------------------
  auto* adjudicate = app.add_subcommand("adjudicate", "Fold a label log into final labels");
  std::string conflicts_out;
  adjudicate->add_option("--log", log_path, "Label log")->required();
  adjudicate->add_option("--out", out_path, "Output adjudication (JSONL)")
      ->capture_default_str();
  adjudicate->add_option("--tasks", tasks_path, "Task file, for --conflicts-out");
  adjudicate->add_option("--conflicts-out", conflicts_out,
                         "Write conflicted tasks for re-annotation");
  adjudicate->callback([&] {
    action = [&] {
      const auto log = cre::load_log(log_path);
      const auto adj = cre::adjudicate(log);
      with_output(out_path, [&](std::ostream& o) {
        for (const auto& a : adj.labels) {
          nlohmann::ordered_json j;
          j["instance_id"] = a.instance_id;
          j["status"] = cre::status_name(a.status);
          j["label"] = a.label ? nlohmann::ordered_json(*a.label ? 1 : 0)
                               : nlohmann::ordered_json(nullptr);
          nlohmann::ordered_json labels = nlohmann::ordered_json::object();
          for (const auto& [who, l] : a.annotator_labels) labels[who] = l ? 1 : 0;
          j["annotators"] = std::move(labels);
          o << j.dump() << '\n';
        }
      });
      if (!conflicts_out.empty()) {
        if (tasks_path.empty()) {
          throw cre::ValidationError("--conflicts-out needs --tasks");
        }
        std::vector<cre::CreRecord> conflicted;
        for (const auto& t : cre::load_cre_records(tasks_path)) {
          const auto* a = adj.find(t.instance.instance_id);
          if (a && a->status == cre::LabelStatus::kConflicted) conflicted.push_back(t);
        }
        with_output(conflicts_out,
                    [&](std::ostream& o) { cre::write_cre_records(conflicted, o); });
      }
      spdlog::info("agreed {}, conflicted {}, single {}, resolved {}, agreement {}",
                   adj.agreed, adj.conflicted, adj.single, adj.resolved,
                   pct(adj.agreement_rate));
    };
  });

  // build-cre ---------------------------------------------------------------
  auto* build = app.add_subcommand("build-cre", "Assemble the labeled challenge set");
  build->add_option("--log", log_path, "Label log")->required();
  build->add_option("--tasks", tasks_path, "Task file")->required();
  build->add_option("--out", out_path, "Output CRE file")->capture_default_str();
  build->callback([&] {
    action = [&] {
      const auto tasks = cre::load_cre_records(tasks_path);
      const auto report = cre::build_cre(cre::adjudicate(cre::load_log(log_path)), tasks);
      with_output(out_path, [&](std::ostream& o) { cre::write_cre(report.dataset, o); });
      spdlog::info("included {}; excluded conflicted {}, single {}, unlabeled {}",
                   report.included, report.excluded_conflicted, report.excluded_single,
                   report.excluded_unlabeled);
    };
  });

  // stats -------------------------------------------------------------------
  auto* stats = app.add_subcommand("stats", "Dataset statistics");
  std::string cre_path, tacred_path;
  auto* cre_opt = stats->add_option("--cre", cre_path, "CRE file");
  auto* tacred_opt = stats->add_option("--tacred", tacred_path, "TACRED-style file");
  cre_opt->excludes(tacred_opt);
  stats->callback([&] {
    action = [&] {
      if (!cre_path.empty()) {
        const auto st = cre::dataset_stats(cre::load_cre(cre_path));
        std::cout << "groups: " << st.group_count << '\n'
                  << "sentences: " << st.sentence_count << '\n'
                  << "instances: " << st.instance_count << '\n'
                  << "positive: " << st.total.positive << '\n'
                  << "negative: " << st.total.negative << '\n'
                  << "mean_pairs_per_sentence: " << num(st.mean_pairs_per_sentence) << '\n'
                  << "conflicting_label_sentences: " << pct(st.conflicting_label_fraction) << '\n'
                  << "shared_argument_sentences: " << pct(st.shared_argument_fraction) << '\n'
                  << "mean_sentence_tokens: " << num(st.mean_sentence_tokens) << '\n';
        std::cout << fmt::format("{:<36} {:>8} {:>8}\n", "relation", "positive", "negative");
        for (const auto& [relation, c] : st.per_relation) {
          std::cout << fmt::format("{:<36} {:>8} {:>8}\n", relation, c.positive, c.negative);
        }
        return;
      }
      if (!tacred_path.empty()) {
        const auto records = cre::load_tacred(tacred_path);
        const auto cov = cre::annotation_coverage(records, schema());
        std::cout << "records: " << records.size() << '\n'
                  << "sentences: " << cov.sentence_count << '\n'
                  << "sentences_with_multiple_pairs: "
                  << pct(cov.multiple_pair_sentence_fraction) << '\n'
                  << "sentences_with_multiple_labels: "
                  << pct(cov.multiple_label_sentence_fraction) << '\n'
                  << "type_compatible_pairs: " << cov.compatible_pairs << '\n'
                  << "annotated_type_compatible_pairs: " << pct(cov.annotated_pair_fraction)
                  << '\n';
        return;
      }
      throw cre::ValidationError("stats needs --cre or --tacred");
    };
  });

  // eval --------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "Score predictions");
  std::string gold_path, pred_path, plus, manifest_path, train_half, json_out;
  bool binarized = false;
  eval->add_option("--gold", gold_path, "Gold file: CRE, or TACRED with --binarized-tacred")
      ->required();
  eval->add_option("--pred", pred_path, "Prediction file")->required();
  eval->add_flag("--binarized-tacred", binarized, "Per-relation binarized TACRED scoring");
  eval->add_option("--plus", plus, "Add CRE instances of this polarity to TACRED")
      ->check(CLI::IsMember({"positive", "negative"}));
  eval->add_option("--cre", cre_path, "CRE file for --plus");
  eval->add_option("--manifest", manifest_path, "Split manifest, to refuse training ids");
  eval->add_option("--train-half", train_half, "Half of --manifest used for training")
      ->check(CLI::IsMember({"a", "b"}));
  eval->add_option("--json-out", json_out, "Machine-readable report");
  eval->callback([&] {
    action = [&] {
      const auto sch = schema();
      const auto predictions = cre::index_predictions(cre::load_predictions(pred_path));
      std::optional<cre::SplitManifest> manifest;
      if (!manifest_path.empty() != !train_half.empty()) {
        throw cre::ValidationError("--manifest and --train-half go together");
      }
      if (!manifest_path.empty()) manifest = cre::load_manifest(manifest_path);
      cre::EvalReport report;
      if (!binarized && plus.empty()) {
        const auto gold = cre::load_cre(gold_path);
        if (manifest) {
          cre::check_uncontaminated(gold.instances, pick_half(*manifest, train_half));
        }
        report = cre::score_binary(gold.instances, predictions);
      } else {
        const auto records = cre::load_tacred(gold_path);
        if (plus.empty()) {
          report = cre::score_tacred_binarized(records, predictions, sch);
        } else {
          if (cre_path.empty()) throw cre::ValidationError("--plus needs --cre");
          const auto cre_set = cre::load_cre(cre_path);
          if (manifest) {
            cre::check_uncontaminated(cre_set.instances, pick_half(*manifest, train_half));
          }
          const auto polarity =
              plus == "positive" ? cre::Polarity::kPositive : cre::Polarity::kNegative;
          const auto queries = cre::build_tacred_plus(records, cre_set, polarity, sch);
          report = cre::score_queries(queries, predictions);
        }
      }
      std::cout << cre::render_table(report);
      if (!json_out.empty()) {
        with_output(json_out, [&](std::ostream& o) { o << cre::render_json(report); });
      }
    };
  });

  // qa-eval -----------------------------------------------------------------
  auto* qa_eval = app.add_subcommand("qa-eval", "Classify CRE instances through a QA model");
  std::string qa_spec, verdicts_out, questions_out;
  bool strict_span = false;
  RemoteFlags qa_remote;
  qa_eval->add_option("--cre", cre_path, "CRE file")->required();
  qa_eval->add_option("--qa", qa_spec, "QA predictor file:PATH or remote:URL");
  qa_eval->add_option("--questions-out", questions_out,
                      "Write the instantiated questions and stop");
  qa_eval->add_flag("--strict-span", strict_span, "Match by character offsets");
  qa_eval->add_option("--verdicts-out", verdicts_out, "Per-instance verdicts");
  qa_eval->add_option("--json-out", json_out, "Machine-readable report");
  qa_remote.add(qa_eval);
  qa_eval->callback([&] {
    action = [&] {
      const auto sch = schema();
      const auto records = cre::load_cre(cre_path).records();
      if (!questions_out.empty()) {
        std::vector<cre::QaQuery> queries;
        for (const auto& r : records) {
          for (auto& q : cre::make_queries(r, sch)) queries.push_back(std::move(q));
        }
        with_output(questions_out, [&](std::ostream& o) {
          for (const auto& q : queries) {
            nlohmann::ordered_json j;
            j["id"] = q.id;
            j["question"] = q.question;
            j["context"] = q.context;
            o << j.dump() << '\n';
          }
        });
        return;
      }
      if (qa_spec.empty()) throw cre::ValidationError("qa-eval needs --qa");
      auto predictor = cre::make_qa_predictor(qa_spec, qa_remote.options());
      const auto verdicts =
          cre::qa_classify(records, *predictor, sch,
                           strict_span ? cre::MatchMode::kStrictSpan
                                       : cre::MatchMode::kNormalized);
      if (!verdicts_out.empty()) {
        with_output(verdicts_out,
                    [&](std::ostream& o) { cre::write_verdicts(verdicts, o); });
      }
      std::vector<cre::CandidateInstance> gold;
      for (const auto& r : records) gold.push_back(r.instance);
      const auto report = cre::score_binary(
          gold, cre::index_predictions(
                    cre::verdict_predictions(verdicts, records, sch, predictor->id())));
      std::cout << cre::render_table(report);
      if (!json_out.empty()) {
        with_output(json_out, [&](std::ostream& o) { o << cre::render_json(report); });
      }
    };
  });

  // heuristic-predict -------------------------------------------------------
  auto* heuristic = app.add_subcommand("heuristic-predict",
                                       "Predictions of a heuristic oracle");
  std::string input_path, kind;
  heuristic->add_option("--input", input_path, "CRE or task file to predict")->required();
  heuristic->add_option("--kind", kind, "oracle-event | oracle-type | oracle-event-type")
      ->required()
      ->check(CLI::IsMember({"oracle-event", "oracle-type", "oracle-event-type"}));
  heuristic->add_option("--gold", gold_path, "Labeled CRE file (event oracles)");
  heuristic->add_option("--out", out_path, "Output prediction file")->capture_default_str();
  heuristic->callback([&] {
    action = [&] {
      const auto sch = schema();
      const auto spec =
          cre::PredictorSpec::parse(gold_path.empty() ? kind : kind + ":" + gold_path);
      auto predictor = cre::make_predictor(spec, sch);
      const auto records = cre::load_cre_records(input_path);
      std::vector<cre::CandidateInstance> instances;
      for (const auto& r : records) instances.push_back(r.instance);
      const auto predictions =
          cre::predict_batch(*predictor, instances, cre::SentenceIndex{}, sch);
      with_output(out_path, [&](std::ostream& o) { cre::write_predictions(predictions, o); });
      spdlog::info("{} predictions from {}", predictions.size(), predictor->id());
    };
  });

  // inoculate-split ---------------------------------------------------------
  auto* split = app.add_subcommand("inoculate-split", "Stratified halving of a CRE file");
  std::string mode = "instance";
  split->add_option("--cre", cre_path, "CRE file")->required();
  split->add_option("--rng-seed", rng_seed, "Split seed")->capture_default_str();
  split->add_option("--mode", mode, "instance | sentence")
      ->capture_default_str()
      ->check(CLI::IsMember({"instance", "sentence"}));
  split->add_option("--out", out_path, "Output manifest")->capture_default_str();
  split->callback([&] {
    action = [&] {
      const auto m = cre::split_cre(cre::load_cre(cre_path), rng_seed,
                                    cre::parse_split_mode(mode));
      with_output(out_path, [&](std::ostream& o) { cre::write_manifest(m, o); });
      const auto t = total_counts(m);
      spdlog::info("{} split: half a {}, half b {}", mode, t.half_a, t.half_b);
    };
  });

  // export-train ------------------------------------------------------------
  auto* export_train = app.add_subcommand("export-train",
                                          "TACRED training file augmented with a CRE half");
  std::string train_path, half = "a";
  export_train->add_option("--train", train_path, "TACRED training file")->required();
  export_train->add_option("--manifest", manifest_path, "Split manifest")->required();
  export_train->add_option("--half", half, "Half to add")
      ->capture_default_str()
      ->check(CLI::IsMember({"a", "b"}));
  export_train->add_option("--cre", cre_path, "CRE file")->required();
  export_train->add_option("--out", out_path, "Output TACRED file")->capture_default_str();
  export_train->callback([&] {
    action = [&] {
      const auto m = cre::load_manifest(manifest_path);
      const auto& ids = pick_half(m, half);
      auto train = cre::load_tacred(train_path);
      const std::size_t before = train.size();
      const auto out = cre::export_augmented_train(std::move(train), ids,
                                                   cre::load_cre(cre_path), schema());
      with_output(out_path, [&](std::ostream& o) { cre::write_tacred(out, o); });
      spdlog::info("{} training records + {} CRE instances", before, out.size() - before);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("usage_error", e.what());
  }

  spdlog::set_level(g.verbose ? spdlog::level::debug
                              : g.quiet ? spdlog::level::warn : spdlog::level::info);
  const std::string command = app.get_subcommands().front()->get_name();
  std::istringstream dump(app.config_to_str(true, false));
  std::string config, line;
  while (std::getline(dump, line)) {
    const std::string key = line.substr(0, line.find('='));
    if (key.find('.') != std::string::npos && !key.starts_with(command + ".")) continue;
    config += (config.empty() ? "" : ", ") + line;
  }
  spdlog::info("cre {} {}: {}", cre::kVersion, command, config);

  try {
    action();
  } catch (const cre::Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::exception& e) {
    return fail("internal_error", e.what());
  }
  return 0;
}
