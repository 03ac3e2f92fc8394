#include "cre/annotation_server.h"

#include "cre/error.h"
#include "httplib.h"
#include "json_util.h"
#include "wire.h"

namespace cre {

using internal::Json;
using internal::OrderedJson;

namespace {

void send_json(httplib::Response& res, int status, const OrderedJson& body) {
  res.status = status;
  res.set_content(internal::dump_line(body), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message) {
  OrderedJson err;
  err["code"] = code;
  err["message"] = message;
  OrderedJson body;
  body["error"] = std::move(err);
  send_json(res, status, body);
}

int status_for(const Error& e) {
  if (e.code() == "not_found") return 404;
  if (e.code() == "id_collision") return 409;
  if (e.code() == "parse_error" || e.code() == "validation_error") return 400;
  return 500;
}

bool parse_label(const Json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer()) {
    const auto n = v.get<long long>();
    if (n == 0 || n == 1) return n == 1;
  }
  throw ValidationError("label must be 0 or 1");
}

}  // namespace

struct AnnotationServer::Impl {
  AnnotationService& service;
  std::map<std::string, std::string> prompts;
  httplib::Server server;

  explicit Impl(AnnotationService& s) : service(s) {}

  OrderedJson progress_json() const {
    const Adjudication adj = service.adjudication();
    std::size_t labeled_tasks = 0;
    for (const auto& t : service.tasks()) {
      const auto* a = adj.find(t.instance.instance_id);
      if (a && a->status != LabelStatus::kUnlabeled) ++labeled_tasks;
    }
    OrderedJson j;
    j["total_tasks"] = service.tasks().size();
    j["labeled_tasks"] = labeled_tasks;
    j["agreed"] = adj.agreed;
    j["conflicted"] = adj.conflicted;
    j["single"] = adj.single;
    j["resolved"] = adj.resolved;
    j["agreement_rate"] =
        adj.agreement_rate ? OrderedJson(*adj.agreement_rate) : OrderedJson(nullptr);
    OrderedJson per = OrderedJson::object();
    for (const auto& [who, n] : service.labels_per_annotator()) per[who] = n;
    j["per_annotator"] = std::move(per);
    return j;
  }

  OrderedJson task_json(const CreRecord& task) const {
    OrderedJson j;
    j["task"] = internal::cre_record_json(task);
    auto it = prompts.find(task.instance.relation);
    j["prompt"] = it == prompts.end() ? task.instance.relation : it->second;
    return j;
  }

  template <typename Fn>
  void guarded(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      send_error(res, status_for(e), e.code(), e.what());
    } catch (const Json::exception& e) {
      send_error(res, 400, "parse_error", e.what());
    }
  }

  void routes() {
    server.Get("/v1/tasks/next", [this](const httplib::Request& req,
                                        httplib::Response& res) {
      guarded(res, [&] {
        const std::string annotator = req.get_param_value("annotator");
        if (annotator.empty()) {
          throw ValidationError("query parameter 'annotator' is required");
        }
        auto task = service.next_task(annotator);
        if (!task) {
          res.status = 204;
          return;
        }
        OrderedJson body = task_json(*task);
        body["progress"] = progress_json();
        send_json(res, 200, body);
      });
    });

    server.Post("/v1/labels", [this](const httplib::Request& req,
                                     httplib::Response& res) {
      guarded(res, [&] {
        const Json body = internal::parse_json(req.body, "request");
        const auto id = internal::require_string(body, "instance_id", "request");
        const auto who = internal::require_string(body, "annotator_id", "request");
        const bool label = parse_label(internal::require(body, "label", "request"));
        std::optional<std::string> version;
        if (auto v = internal::optional_string(body, "guideline_version"); !v.empty()) {
          version = v;
        }
        const auto result = service.submit_label(id, who, label, version);
        OrderedJson out;
        out["status"] = "ok";
        out["duplicate"] = result.duplicate;
        out["record"] = internal::parse_json(serialize_log_entry(result.entry), "entry");
        send_json(res, 200, out);
      });
    });

    server.Get("/v1/progress", [this](const httplib::Request&,
                                      httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, progress_json()); });
    });

    server.Get("/v1/conflicts", [this](const httplib::Request&,
                                       httplib::Response& res) {
      guarded(res, [&] {
        const Adjudication adj = service.adjudication();
        OrderedJson list = OrderedJson::array();
        for (const auto& task : service.conflicts()) {
          OrderedJson j = task_json(task);
          OrderedJson labels = OrderedJson::object();
          if (const auto* a = adj.find(task.instance.instance_id)) {
            for (const auto& [who, l] : a->annotator_labels) labels[who] = l ? 1 : 0;
          }
          j["labels"] = std::move(labels);
          list.push_back(std::move(j));
        }
        OrderedJson out;
        out["conflicts"] = std::move(list);
        send_json(res, 200, out);
      });
    });

    server.Post("/v1/adjudications", [this](const httplib::Request& req,
                                            httplib::Response& res) {
      guarded(res, [&] {
        const Json body = internal::parse_json(req.body, "request");
        const auto id = internal::require_string(body, "instance_id", "request");
        const auto who = internal::require_string(body, "adjudicator_id", "request");
        std::string action = internal::optional_string(body, "action");
        if (action.empty()) action = "resolve";
        LogEntry entry;
        if (action == "resolve") {
          entry = service.resolve(id, who,
                                  parse_label(internal::require(body, "label", "request")));
        } else if (action == "reopen") {
          entry = service.reopen(id, who);
        } else {
          throw ValidationError("action must be resolve or reopen");
        }
        OrderedJson out;
        out["status"] = "ok";
        out["record"] = internal::parse_json(serialize_log_entry(entry), "entry");
        send_json(res, 200, out);
      });
    });
  }
};

AnnotationServer::AnnotationServer(AnnotationService& service,
                                   std::map<std::string, std::string> prompts,
                                   std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  impl_->prompts = std::move(prompts);
  impl_->routes();
  if (static_dir) {
    if (!impl_->server.set_mount_point("/", static_dir->string())) {
      throw NotFoundError("static directory " + static_dir->string() +
                          " does not exist");
    }
  }
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error("io_error", "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error("io_error", "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void AnnotationServer::run() { impl_->server.listen_after_bind(); }

void AnnotationServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool AnnotationServer::running() const { return impl_->server.is_running(); }

}  // namespace cre
