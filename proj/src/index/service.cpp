#include "tdassist/service.hpp"

#include <httplib.h>

#include "tdassist/error.hpp"

namespace tdassist::index {

using nlohmann::json;

namespace {

Response json_response(int status, const json& j) { return {status, j.dump()}; }

Response error_response(int status, const std::string& code, const std::string& message) {
  return json_response(status, {{"code", code}, {"message", message}});
}

int status_for(const std::string& code) {
  if (code == "not-found") return 404;
  if (code == "conflict") return 409;
  return 400;
}

json parse_body(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw ParseError(std::string("request body is not valid JSON: ") + e.what());
  }
}

struct QueryRequest {
  drawing::Drawing document;
  double alpha = 0.5;
  std::size_t k = 10;
};

QueryRequest parse_query(const std::string& body) {
  const json j = parse_body(body);
  if (!j.is_object() || !j.contains("document"))
    throw ValidationError("query body must be an object with a 'document'");
  QueryRequest q;
  q.document = drawing::load_drawing(j["document"].dump());
  if (j.contains("alpha")) {
    if (!j["alpha"].is_number()) throw ValidationError("alpha must be a number");
    q.alpha = j["alpha"].get<double>();
  }
  if (j.contains("k")) {
    if (!j["k"].is_number_integer() || j["k"].get<long long>() < 1)
      throw ValidationError("k must be a positive integer");
    q.k = j["k"].get<std::size_t>();
  }
  return q;
}

}  // namespace

Service::Service(DesignIndex index, std::optional<std::string> persist_path)
    : current_(std::make_shared<const DesignIndex>(std::move(index))),
      persist_path_(std::move(persist_path)) {}

Service::~Service() { stop(); }

std::shared_ptr<const DesignIndex> Service::snapshot() const {
  std::lock_guard lock(snapshot_mu_);
  return current_;
}

Response Service::add_design(const std::string& body) {
  const auto d = drawing::load_drawing(body);
  std::lock_guard write(write_mu_);
  auto next = std::make_shared<DesignIndex>(*snapshot());
  const auto outcome = next->add_design(d);
  if (outcome == DesignIndex::AddOutcome::Added) {
    if (persist_path_) persist(*next, *persist_path_);
    std::lock_guard lock(snapshot_mu_);
    current_ = std::move(next);
  }
  const bool added = outcome == DesignIndex::AddOutcome::Added;
  return json_response(added ? 201 : 200,
                       {{"id", d.id}, {"status", added ? "added" : "unchanged"}});
}

Response Service::query(const std::string& body, bool partial) const {
  const auto q = parse_query(body);
  const auto index = snapshot();
  if (!partial)
    return json_response(
        200, {{"results", ranking_to_json(index->rank_full(q.document, q.alpha, q.k))}});
  const auto states = index->evaluate_partial(q.document);
  return json_response(
      200, {{"results", ranking_to_json(index->rank_partial(q.document, q.alpha, q.k))},
            {"provenance", provenance_to_json(index->patterns(), states)}});
}

Response Service::handle(const std::string& method, const std::string& path,
                         const std::string& body) {
  try {
    if (method == "GET" && path == "/health") {
      const auto index = snapshot();
      return json_response(200, {{"status", "ok"},
                                 {"designs", index->size()},
                                 {"patterns", index->patterns().size()},
                                 {"revision", index->revision()}});
    }
    if (method == "GET" && path == "/designs") {
      json list = json::array();
      for (const auto& [id, rec] : snapshot()->designs())
        list.push_back({{"id", id}, {"digest", rec.digest}, {"has_visual", rec.visual.has_value()}});
      return json_response(200, list);
    }
    if (method == "GET" && path.rfind("/designs/", 0) == 0) {
      const auto id = path.substr(9);
      const auto index = snapshot();
      const auto* rec = index->find(id);
      if (!rec) return error_response(404, "not-found", "no design '" + id + "'");
      std::string bits;
      for (bool b : rec->features) bits += b ? '1' : '0';
      return json_response(200, {{"id", rec->id},
                                 {"digest", rec->digest},
                                 {"features", bits},
                                 {"facts", rec->facts.size()},
                                 {"visual", rec->visual ? json(*rec->visual) : json(nullptr)}});
    }
    if (method == "GET" && path == "/patterns")
      return json_response(200, patterns_to_json(snapshot()->patterns()));
    if (method == "POST" && path == "/designs") return add_design(body);
    if (method == "POST" && path == "/query") return query(body, false);
    if (method == "POST" && path == "/query/partial") return query(body, true);
    return error_response(404, "not-found", "no route for " + method + " " + path);
  } catch (const Error& e) {
    return error_response(status_for(e.code()), e.code(), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal-error", e.what());
  }
}

int Service::bind(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    const auto r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server_->Get(".*", route);
  server_->Post(".*", route);
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0)
    throw Error("startup-error", "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void Service::run() {
  if (!server_) throw Error("startup-error", "service is not bound");
  server_->listen_after_bind();
}

void Service::stop() {
  if (server_) server_->stop();
}

}  // namespace tdassist::index
