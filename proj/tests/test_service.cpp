#include <doctest.h>

#include <httplib.h>

#include <filesystem>
#include <thread>

#include "support.hpp"
#include "tdassist/error.hpp"
#include "tdassist/service.hpp"

using namespace tdassist;
using namespace tdassist::index;
using nlohmann::json;

namespace {

DesignIndex small_index() { return support::fixture_index(10, 5, 8); }

std::string query_body(const drawing::Drawing& d, double alpha, int k) {
  return json{{"document", json::parse(drawing::serialize(d))}, {"alpha", alpha}, {"k", k}}.dump();
}

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("read endpoints") {
    Service svc(small_index());
    const auto health = svc.handle("GET", "/health", "");
    CHECK(health.status == 200);
    const auto h = json::parse(health.body);
    CHECK(h["status"] == "ok");
    CHECK(h["designs"] == 15);
    CHECK(h["patterns"] == svc.snapshot()->patterns().size());

    const auto list = json::parse(svc.handle("GET", "/designs", "").body);
    REQUIRE(list.size() == 15);
    const std::string id = list[0]["id"];
    const auto one = svc.handle("GET", "/designs/" + id, "");
    CHECK(one.status == 200);
    CHECK(json::parse(one.body)["features"].get<std::string>().size() ==
          svc.snapshot()->patterns().size());
    CHECK(svc.handle("GET", "/designs/nope", "").status == 404);
    CHECK(json::parse(svc.handle("GET", "/designs/nope", "").body)["code"] == "not-found");
    CHECK(svc.handle("GET", "/elsewhere", "").status == 404);
    CHECK(json::parse(svc.handle("GET", "/patterns", "").body) ==
          patterns_to_json(svc.snapshot()->patterns()));
  }

  TEST_CASE("adding designs over the API") {
    const auto dir = std::filesystem::temp_directory_path() / "tdassist-service-test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "index.json").string();
    Service svc(small_index(), path);
    const auto d = fixtures::parts_list_drawing("api-1", 55);
    const auto body = drawing::serialize(d);
    CHECK(svc.handle("POST", "/designs", body).status == 201);
    CHECK(svc.handle("POST", "/designs", body).status == 200);
    CHECK(load(path) == *svc.snapshot());
    const auto clash = drawing::serialize(fixtures::parts_list_drawing("api-1", 56));
    const auto r = svc.handle("POST", "/designs", clash);
    CHECK(r.status == 409);
    CHECK(json::parse(r.body)["code"] == "conflict");
    CHECK(svc.handle("POST", "/designs", "{not json").status == 400);
    CHECK(svc.handle("POST", "/designs", R"({"id": "x"})").status == 400);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("query responses match the library ranking") {
    Service svc(small_index());
    const auto& idx = *svc.snapshot();
    for (const auto& q : fixtures::parts_list_corpus(5, 77)) {
      const auto r = svc.handle("POST", "/query", query_body(q, 0.3, 4));
      REQUIRE(r.status == 200);
      CHECK(json::parse(r.body)["results"] == ranking_to_json(idx.rank(q, 0.3, 4)));
    }
    auto open = fixtures::parts_list_drawing("open", 3);
    open.cells[3].text.reset();
    const auto rp = json::parse(svc.handle("POST", "/query/partial", query_body(open, 0.5, 3)).body);
    CHECK(rp["results"] == ranking_to_json(idx.rank_partial(open, 0.5, 3)));
    CHECK(rp["provenance"] == provenance_to_json(idx.patterns(), idx.evaluate_partial(open)));
    CHECK(svc.handle("POST", "/query", query_body(open, 0.5, 3)).status == 400);
    CHECK(svc.handle("POST", "/query", R"({"alpha": 0.5})").status == 400);
    CHECK(svc.handle("POST", "/query", query_body(open, 0.5, 0)).status == 400);
  }

  TEST_CASE("readers keep their snapshot across writes") {
    Service svc(small_index());
    const auto before = svc.snapshot();
    const auto size = before->size();
    std::vector<std::thread> writers;
    for (int t = 0; t < 4; ++t)
      writers.emplace_back([&svc, t] {
        for (int i = 0; i < 3; ++i) {
          const auto d = fixtures::parts_list_drawing("w" + std::to_string(t) + "-" + std::to_string(i),
                                                      static_cast<std::uint64_t>(1000 + t * 10 + i));
          svc.handle("POST", "/designs", drawing::serialize(d));
        }
      });
    for (int i = 0; i < 20; ++i) {
      const auto snap = svc.snapshot();
      CHECK(snap->size() >= size);
      CHECK(snap->size() <= size + 12);
      CHECK(snap->revision() - before->revision() == snap->size() - size);
    }
    for (auto& w : writers) w.join();
    CHECK(before->size() == size);
    CHECK(svc.snapshot()->size() == size + 12);
    CHECK(svc.snapshot()->revision() == before->revision() + 12);
  }

  TEST_CASE("over HTTP") {
    Service svc(small_index());
    const int port = svc.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread server([&svc] { svc.run(); });
    httplib::Client client("127.0.0.1", port);
    const auto q = fixtures::parts_list_drawing("http-q", 42);
    httplib::Result res;
    for (int attempt = 0; attempt < 50 && !res; ++attempt) {
      res = client.Post("/query", query_body(q, 0.5, 10), "application/json");
      if (!res) std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body)["results"] ==
          ranking_to_json(svc.snapshot()->rank(q, 0.5, 10)));
    auto health = client.Get("/health");
    REQUIRE(health);
    CHECK(health->status == 200);
    svc.stop();
    server.join();
  }
}
