#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "retrace/annotation.hpp"

namespace httplib {
class Server;
}

namespace retrace::annotation {

// JSON API for the annotation workbench.
//
//   GET  /api/queue                       unannotated citations
//   GET  /api/citations/{id}              citation, context, latest annotation, history length, tree root
//   PUT  /api/citations/{id}/annotation   {"sentiment", "intent" | "path", "mentions_retraction", "annotator"}
//                                         422 {"errors": {field: message}} on invalid bodies
//   GET  /api/tree                        decision-tree config
//   POST /api/tree/navigate               {"path": [...]} -> next question or leaf
//   GET  /api/bundles                     file listing of the exports directory
//   GET  /bundles/...                     exported visualization files
//   GET  /...                             workbench static assets, when an assets directory is given
class AnnotationServer {
 public:
  AnnotationServer(AnnotationStore& store, CitoDecisionTree tree, std::filesystem::path exports_dir = {},
                   std::filesystem::path assets_dir = {});
  ~AnnotationServer();

  // Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();
  bool running() const;

 private:
  void install_routes();

  AnnotationStore& store_;
  CitoDecisionTree tree_;
  std::filesystem::path exports_dir_;
  std::filesystem::path assets_dir_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace retrace::annotation
