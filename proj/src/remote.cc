#include <thread>
#include <unordered_map>

#include "cre/error.h"
#include "cre/parallel.h"
#include "cre/predict.h"
#include "httplib.h"
#include "wire.h"

namespace cre {
namespace internal {
namespace {

struct Endpoint {
  std::string base;         // scheme://host:port
  std::string path_prefix;  // no trailing slash
};

Endpoint split_endpoint(const std::string& endpoint) {
  const auto scheme = endpoint.find("://");
  const auto slash = endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  Endpoint e;
  e.base = endpoint.substr(0, slash);
  if (slash != std::string::npos) e.path_prefix = endpoint.substr(slash);
  while (!e.path_prefix.empty() && e.path_prefix.back() == '/') {
    e.path_prefix.pop_back();
  }
  return e;
}

}  // namespace

Json post_json(const std::string& endpoint, const std::string& path,
               const OrderedJson& body, const RemoteOptions& options,
               const std::function<void(const Json&)>& validate) {
  const Endpoint target = split_endpoint(endpoint);
  const std::string payload = dump_line(body);
  std::string last_error = "no attempt made";
  const int attempts = std::max(1, options.max_attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    if (attempt > 1) std::this_thread::sleep_for(options.retry_backoff * (attempt - 1));
    httplib::Client client(target.base);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
        options.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(target.path_prefix + path, payload, "application/json");
    if (!res) {
      last_error = "request failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 400 && res->status < 500) {
      throw TransportError(endpoint + path + " rejected the request with HTTP " +
                           std::to_string(res->status) + ": " + res->body);
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      Json parsed = parse_json(res->body, "response");
      validate(parsed);
      return parsed;
    } catch (const Error& e) {
      last_error = std::string("malformed response: ") + e.what();
    }
  }
  throw TransportError(endpoint + path + " failed after " +
                       std::to_string(attempts) + " attempt(s): " + last_error);
}

}  // namespace internal

RemotePredictor::RemotePredictor(std::string endpoint, RemoteOptions options)
    : endpoint_(std::move(endpoint)),
      options_(options),
      id_("remote:" + endpoint_) {
  if (options_.batch_size == 0) options_.batch_size = 1;
}

std::vector<Prediction> RemotePredictor::predict(
    std::span<const CandidateInstance> instances,
    const SentenceIndex& sentences) const {
  using internal::Json;
  using internal::OrderedJson;
  std::vector<OrderedJson> requests;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t begin = 0; begin < instances.size();
       begin += options_.batch_size) {
    const std::size_t end = std::min(instances.size(), begin + options_.batch_size);
    OrderedJson batch = OrderedJson::array();
    for (std::size_t i = begin; i < end; ++i) {
      const CandidateInstance& inst = instances[i];
      const Sentence* s = sentences.find(inst.sentence_id);
      if (!s) {
        throw NotFoundError("sentence '" + inst.sentence_id + "' of instance " +
                            inst.instance_id + " is unknown");
      }
      CreRecord rec;
      rec.instance = inst;
      rec.instance.gold.reset();
      rec.tokens = s->tokens;
      rec.group = inst.relation;
      rec.source = s->source;
      batch.push_back(internal::cre_record_json(rec));
    }
    OrderedJson body;
    body["version"] = 1;
    body["instances"] = std::move(batch);
    requests.push_back(std::move(body));
    ranges.emplace_back(begin, end);
  }

  std::vector<Prediction> out(instances.size());
  parallel_for(requests.size(), options_.max_in_flight, [&](std::size_t k) {
    const auto [begin, end] = ranges[k];
    auto validate = [&](const Json& response) {
      const Json& list = internal::require(response, "predictions", "response");
      if (!list.is_array() || list.size() != end - begin) {
        throw ParseError("prediction count does not match the batch");
      }
      std::unordered_map<std::string, std::size_t> wanted;
      for (std::size_t i = begin; i < end; ++i) {
        wanted.emplace(instances[i].instance_id, i);
      }
      for (const Json& rec : list) {
        const auto id = internal::require_string(rec, "instance_id", "prediction");
        internal::require_string(rec, "predicted_relation", "prediction");
        if (wanted.erase(id) != 1) {
          throw ParseError("unexpected or repeated instance_id " + id);
        }
      }
    };
    const Json response = internal::post_json(endpoint_, "/v1/predict",
                                              requests[k], options_, validate);
    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = begin; i < end; ++i) {
      position.emplace(instances[i].instance_id, i);
    }
    for (const Json& rec : response["predictions"]) {
      Prediction p;
      p.instance_id = rec["instance_id"].get<std::string>();
      p.predicted_relation = rec["predicted_relation"].get<std::string>();
      p.predictor_id = internal::optional_string(rec, "predictor_id");
      if (p.predictor_id.empty()) p.predictor_id = id_;
      if (auto it = rec.find("score"); it != rec.end() && it->is_number()) {
        p.score = it->get<double>();
      }
      const std::size_t i = position.at(p.instance_id);
      p.queried_relation = instances[i].relation;
      out[i] = std::move(p);
    }
  });
  return out;
}

}  // namespace cre
