#ifndef CRE_ANNOTATION_SERVER_H_
#define CRE_ANNOTATION_SERVER_H_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "cre/annotate.h"

namespace cre {

// HTTP front end of an AnnotationService:
//   GET  /v1/tasks/next?annotator=ID   200 {task, prompt, progress} | 204
//   POST /v1/labels                    {instance_id, annotator_id, label}
//   GET  /v1/progress
//   GET  /v1/conflicts
//   POST /v1/adjudications             {instance_id, adjudicator_id, action, label?}
// Errors are {"error": {"code", "message"}} with a 4xx status.
class AnnotationServer {
 public:
  // `prompts` maps relation -> plain-language question shown with a task.
  // When `static_dir` is set its files are served under "/".
  AnnotationServer(AnnotationService& service,
                   std::map<std::string, std::string> prompts = {},
                   std::optional<std::filesystem::path> static_dir = {});
  ~AnnotationServer();

  // Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void run();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cre

#endif  // CRE_ANNOTATION_SERVER_H_
