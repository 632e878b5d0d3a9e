#include "retrace/annotation_server.hpp"

#include <httplib.h>

#include <algorithm>

namespace retrace::annotation {

namespace {

void send_json(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, Json{{"error", message}}, status);
}

Json tree_step_json(const TraversalResult& r) {
  Json j{{"guide_sentence", r.guide_sentence}};
  if (r.function) j["function"] = *r.function;
  if (r.next) {
    Json options = Json::array();
    for (const auto& [key, label] : r.next->options) options.push_back({{"key", key}, {"label", label}});
    j["question"] = r.next->question;
    j["options"] = options;
  }
  return j;
}

}  // namespace

AnnotationServer::AnnotationServer(AnnotationStore& store, CitoDecisionTree tree, std::filesystem::path exports_dir,
                                   std::filesystem::path assets_dir)
    : store_(store), tree_(std::move(tree)), exports_dir_(std::move(exports_dir)),
      assets_dir_(std::move(assets_dir)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void AnnotationServer::listen() { server_->listen_after_bind(); }

void AnnotationServer::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

bool AnnotationServer::running() const { return server_->is_running(); }

void AnnotationServer::install_routes() {
  auto& srv = *server_;

  srv.Get("/api/queue", [this](const httplib::Request&, httplib::Response& res) {
    Json items = Json::array();
    for (const auto& c : store_.unannotated())
      items.push_back({{"id", c.id},
                       {"citing_entity_id", c.citing_entity_id},
                       {"cited_item_id", c.cited_item_id},
                       {"section", to_string(c.section)},
                       {"pointer_text", c.pointer_text}});
    send_json(res, items);
  });

  srv.Get(R"(/api/citations/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    auto id = req.matches[1].str();
    auto c = store_.citation(id);
    if (!c) return send_error(res, 404, "unknown citation '" + id + "'");
    Json body = to_json(*c);
    auto state = store_.state();
    if (auto it = state.find(id); it != state.end()) {
      body["annotation"] = to_json(it->second);
    } else {
      body["annotation"] = nullptr;
    }
    body["history_length"] = store_.history(id).size();
    body["tree"] = tree_step_json(tree_.traverse({}));
    send_json(res, body);
  });

  srv.Put(R"(/api/citations/([^/]+)/annotation)", [this](const httplib::Request& req, httplib::Response& res) {
    auto id = req.matches[1].str();
    if (!store_.citation(id)) return send_error(res, 404, "unknown citation '" + id + "'");
    Json body;
    try {
      body = Json::parse(req.body);
    } catch (const Json::parse_error& e) {
      return send_json(res, Json{{"errors", {{"body", std::string("invalid JSON: ") + e.what()}}}}, 422);
    }
    if (!body.is_object()) return send_json(res, Json{{"errors", {{"body", "expected a JSON object"}}}}, 422);

    std::map<std::string, std::string> errors;
    AnnotationInput input;
    input.citation_id = id;
    auto string_field = [&](const char* name, std::string& dst) {
      if (!body.contains(name)) {
        errors[name] = "required";
      } else if (!body.at(name).is_string()) {
        errors[name] = "must be a string";
      } else {
        dst = body.at(name).get<std::string>();
      }
    };
    string_field("sentiment", input.sentiment);
    string_field("annotator", input.annotator);
    if (body.contains("path")) {
      try {
        auto result = tree_.traverse(body.at("path").get<std::vector<std::string>>());
        if (!result.function)
          errors["path"] = "path does not reach a citation function";
        else
          input.intent = *result.function;
      } catch (const NavigationError& e) {
        errors["path"] = e.what();
      } catch (const Json::exception&) {
        errors["path"] = "must be an array of strings";
      }
    } else {
      string_field("intent", input.intent);
    }
    if (!body.contains("mentions_retraction")) {
      errors["mentions_retraction"] = "required";
    } else if (!body.at("mentions_retraction").is_boolean()) {
      errors["mentions_retraction"] = "must be a boolean";
    } else {
      input.mentions_retraction = body.at("mentions_retraction").get<bool>();
    }
    if (!errors.empty()) return send_json(res, Json{{"errors", errors}}, 422);

    try {
      auto event = store_.record(input);
      send_json(res, to_json(event));
    } catch (const ValidationError& e) {
      send_json(res, Json{{"errors", e.fields()}}, 422);
    } catch (const NotFoundError& e) {
      send_error(res, 404, e.what());
    }
  });

  srv.Get("/api/tree", [this](const httplib::Request&, httplib::Response& res) { send_json(res, tree_.to_json()); });

  srv.Post("/api/tree/navigate", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      auto body = Json::parse(req.body.empty() ? "{}" : req.body);
      auto path = body.value("path", std::vector<std::string>{});
      send_json(res, tree_step_json(tree_.traverse(path)));
    } catch (const NavigationError& e) {
      send_json(res, Json{{"error", e.what()}, {"valid_options", e.valid_options()}}, 422);
    } catch (const Json::exception& e) {
      send_json(res, Json{{"errors", {{"path", e.what()}}}}, 422);
    }
  });

  srv.Get("/api/bundles", [this](const httplib::Request&, httplib::Response& res) {
    Json files = Json::array();
    if (!exports_dir_.empty() && std::filesystem::is_directory(exports_dir_)) {
      std::vector<std::string> names;
      for (const auto& entry : std::filesystem::recursive_directory_iterator(exports_dir_))
        if (entry.is_regular_file())
          names.push_back(std::filesystem::relative(entry.path(), exports_dir_).generic_string());
      std::sort(names.begin(), names.end());
      for (auto& n : names) files.push_back("/bundles/" + n);
    }
    send_json(res, files);
  });

  if (!exports_dir_.empty() && std::filesystem::is_directory(exports_dir_))
    srv.set_mount_point("/bundles", exports_dir_.string());
  if (!assets_dir_.empty() && std::filesystem::is_directory(assets_dir_))
    srv.set_mount_point("/", assets_dir_.string());

  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    } catch (...) {
      send_error(res, 500, "unknown error");
    }
  });
}

}  // namespace retrace::annotation
