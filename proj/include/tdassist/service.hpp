#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "tdassist/index.hpp"

namespace httplib {
class Server;
}

namespace tdassist::index {

struct Response {
  int status = 200;
  std::string body;
};

// HTTP/JSON front of a DesignIndex. Readers work on an immutable snapshot;
// a write copies the current index, applies the change and installs the
// copy, so a reader never sees a half-applied update.
class Service {
 public:
  // With a persist path, every successful write is saved there.
  explicit Service(DesignIndex index, std::optional<std::string> persist_path = {});
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  std::shared_ptr<const DesignIndex> snapshot() const;

  // Request dispatch without sockets; the HTTP server routes through here.
  Response handle(const std::string& method, const std::string& path, const std::string& body);

  // Binds host:port (port 0 picks a free one) and returns the bound port.
  // Throws Error("startup-error") when binding fails.
  int bind(const std::string& host, int port);
  // Serves until stop() is called. Requires a prior bind().
  void run();
  void stop();

 private:
  Response add_design(const std::string& body);
  Response query(const std::string& body, bool partial) const;

  mutable std::mutex snapshot_mu_;
  std::mutex write_mu_;
  std::shared_ptr<const DesignIndex> current_;
  std::optional<std::string> persist_path_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace tdassist::index
