#include <gtest/gtest.h>

#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "autex/error.hpp"
#include "autex/service.hpp"

using namespace autex;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kAxionTex =
    "\\documentclass{article}\n\\title{Axion decay $a \\to e^+ e^-$ in a strong magnetic field}\n"
    "\\begin{document}\n\\maketitle\n\\begin{abstract}\nThe axion decay via a plasmon and leptogenesis.\n"
    "\\end{abstract}\n\\end{document}\n";

// One store, one service, one loopback server per test.
class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("autex-svc-" + std::to_string(::getpid()) + "-" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(root_);
    seed();
    start();
  }
  void TearDown() override {
    stop();
    fs::remove_all(root_);
  }

  void seed() {
    Store store(root_);
    StoreState state;
    for (const auto& e : parse_apd(slurp(AUTEX_FIXTURES "/apd/example.apd"))) {
      for (const auto& k : e.keychains) state.vocabulary.ingest_keychain(k.render());
      state.apd.insert(e);
    }
    for (auto w : {"lepton", "leptonic decay", "Majorana", "magnetic field", "plasma", "coupling"})
      state.vocabulary.add_keyword(w);
    store.persist(state);
  }

  void start() {
    service_ = std::make_unique<Service>(ServiceConfig{root_, kDefaultGapBound});
    server_ = std::make_unique<httplib::Server>();
    service_->mount(*server_);
    port_ = server_->bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }

  void stop() {
    client_.reset();
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
    server_.reset();
    service_.reset();
  }

  json get(const std::string& path, int expect = 200) {
    auto r = client_->Get(path);
    EXPECT_TRUE(r);
    if (!r) return {};
    EXPECT_EQ(r->status, expect) << path << " " << r->body;
    return r->body.empty() ? json() : json::parse(r->body);
  }
  json send(const std::string& method, const std::string& path, const json& body, int expect) {
    const auto payload = body.is_null() ? std::string() : body.dump();
    httplib::Result r = method == "POST"    ? client_->Post(path, payload, "application/json")
                        : method == "PUT"   ? client_->Put(path, payload, "application/json")
                        : method == "PATCH" ? client_->Patch(path, payload, "application/json")
                                            : client_->Delete(path);
    EXPECT_TRUE(r);
    if (!r) return {};
    EXPECT_EQ(r->status, expect) << method << " " << path << " " << r->body;
    return r->body.empty() ? json() : json::parse(r->body);
  }

  std::vector<std::string> keychains_of(const json& report) {
    std::vector<std::string> out;
    for (const auto& a : report["assigned"]) out.push_back(a["keychain"]);
    return out;
  }

  fs::path root_;
  std::unique_ptr<Service> service_;
  std::unique_ptr<httplib::Server> server_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace

TEST_F(ServiceTest, VocabularyFilters) {
  auto kws = get("/v1/keywords?letter=l")["keywords"];
  EXPECT_EQ(kws, json({"lepton", "leptonic decay"}));
  EXPECT_EQ(get("/v1/keywords?letter=l&prefix=leptoni")["keywords"], json({"leptonic decay"}));
  EXPECT_EQ(get("/v1/keywords?letter=m&prefix=le")["keywords"], json::array());
  EXPECT_EQ(get("/v1/keywords?prefix=x", 400)["error"], "InvalidFilter");
  EXPECT_EQ(get("/v1/keychains?prefix=axion")["keychains"], json({"axion → positron electron", "axion, leptonic decay"}));

  EXPECT_EQ(send("POST", "/v1/keywords", {{"text", "  neutrino   oscillation "}}, 201)["keyword"], "neutrino oscillation");
  EXPECT_EQ(send("POST", "/v1/keychains", {{"keywords", {"Majorana", "neutrino oscillation"}}}, 201)["keychain"],
            "Majorana, neutrino oscillation");
  EXPECT_EQ(send("POST", "/v1/keychains", {{"keychain", "unknown, words"}}, 422)["error"], "UnknownKeyword");
}

TEST_F(ServiceTest, PatternCrud) {
  auto entries = get("/v1/patterns?keychain=lepton,%20production")["entries"];
  ASSERT_EQ(entries.size(), 1u);
  EXPECT_EQ(entries[0]["id"], "e0001");
  EXPECT_EQ(get("/v1/patterns?prefix=axion")["entries"][0]["id"], "e0003");
  EXPECT_EQ(get("/v1/patterns")["entries"].size(), 4u);

  send("POST", "/v1/keychains", {{"keychain", "plasma"}}, 201);
  auto created = send("POST", "/v1/patterns",
                      {{"pattern", "plasmon decay | decay of plasmons?"}, {"keychains", {"plasma"}}, {"note", "new"}}, 201);
  const std::string id = created["id"];
  EXPECT_EQ(created["alternatives"].size(), 2u);
  EXPECT_EQ(get("/v1/patterns/" + id)["note"], "new");
  send("PUT", "/v1/patterns/" + id, {{"patterns", {"plasmon decay"}}, {"keychains", {"plasma"}}}, 200);
  EXPECT_EQ(get("/v1/patterns/" + id)["alternatives"].size(), 1u);
  EXPECT_EQ(send("POST", "/v1/patterns", {{"pattern", "x"}, {"keychains", {"not, there"}}}, 422)["error"],
            "UnknownKeychain");
  EXPECT_EQ(send("POST", "/v1/patterns", {{"pattern", "$x"}, {"keychains", {"plasma"}}}, 422)["error"],
            "UnbalancedMath");
  send("DELETE", "/v1/patterns/" + id, nullptr, 204);
  EXPECT_EQ(get("/v1/patterns/" + id, 404)["error"], "UnknownEntry");
  EXPECT_EQ(client_->Post("/v1/patterns", "{not json", "application/json")->status, 400);
}

TEST_F(ServiceTest, PipelineAndCorrections) {
  auto art = send("POST", "/v1/articles", {{"source_id", "hep-ph/9812408"}, {"tex", kAxionTex}, {"slac_id", "S1"}}, 201);
  EXPECT_EQ(art["revision"], 1);
  art = send("POST", "/v1/articles", {{"source_id", "hep-ph/9812408"}, {"tex", kAxionTex}}, 201);
  EXPECT_EQ(art["revision"], 2);
  EXPECT_EQ(art["slac_id"], "S1");
  EXPECT_EQ(get("/v1/articles/hep-ph/9812408")["tex"], kAxionTex);
  EXPECT_EQ(send("PATCH", "/v1/articles/hep-ph/9812408", {{"prefix", "ax"}}, 200)["prefix"], "ax");
  send("POST", "/v1/articles", {{"source_id", "broken"}, {"tex", "\\title{open"}}, 201);

  EXPECT_EQ(send("POST", "/v1/queue/hep-ph/9812408", nullptr, 202)["queued"], true);
  EXPECT_EQ(send("POST", "/v1/queue/hep-ph/9812408", nullptr, 200)["queued"], false);
  send("POST", "/v1/queue/broken?pointers=title", nullptr, 202);
  EXPECT_EQ(send("POST", "/v1/queue/nope", nullptr, 404)["error"], "UnknownArticle");
  EXPECT_EQ(send("POST", "/v1/queue/broken?pointers=titel", nullptr, 400)["error"], "ParseError");
  EXPECT_EQ(get("/v1/queue")["pending"].size(), 2u);

  const auto job = send("POST", "/v1/queue/run?wait=true", nullptr, 200);
  EXPECT_EQ(job["status"], "done");
  ASSERT_EQ(job["results"].size(), 2u);
  EXPECT_EQ(job["results"][0]["ok"], true);
  EXPECT_EQ(job["results"][1]["ok"], false);
  EXPECT_EQ(job["results"][1]["error"], "MalformedTex");
  EXPECT_EQ(get("/v1/jobs/" + std::to_string(job["job"].get<int>()))["status"], "done");
  EXPECT_EQ(get("/v1/queue")["pending"].size(), 0u);

  auto report = get("/v1/reports/hep-ph/9812408");
  EXPECT_EQ(keychains_of(report), (std::vector<std::string>{"axion, leptonic decay", "electron, pair production",
                                                            "axion → positron electron", "lepton, production"}));
  EXPECT_EQ(get("/v1/reports")["reports"], json({"hep-ph/9812408"}));

  report = send("PATCH", "/v1/reports/hep-ph/9812408", {{"keychain", "lepton, production"}, {"status", "rejected"}}, 200);
  send("PATCH", "/v1/reports/hep-ph/9812408", {{"keychain", "coupling"}, {"status", "confirmed"}}, 200);
  EXPECT_EQ(send("PATCH", "/v1/reports/hep-ph/9812408", {{"keychain", "plasma"}, {"status", "rejected"}}, 422)["error"],
            "UnknownKeychainInReport");
  auto text = client_->Get("/v1/reports/hep-ph/9812408?format=text")->body;
  EXPECT_EQ(text.find("lepton, production"), std::string::npos);
  EXPECT_NE(text.find("coupling\tmanual\tconfirmed"), std::string::npos);

  // reference evaluation against the stored report
  const auto eval = send("POST", "/v1/evaluate",
                         {{"source_id", "hep-ph/9812408"},
                          {"reference", "source: hep-ph/9812408\naxion, leptonic decay\nplasma\n(0) coupling\n"}},
                         200);
  EXPECT_EQ(eval["reference_only"], json({"plasma"}));
  EXPECT_DOUBLE_EQ(eval["precision"].get<double>(), 1.0 / 3);
  EXPECT_DOUBLE_EQ(eval["recall"].get<double>(), 0.5);

  // everything survives a restart
  const auto before = service_->state();
  stop();
  start();
  EXPECT_EQ(service_->state(), before);
  const auto again = get("/v1/reports/hep-ph/9812408");
  EXPECT_EQ(client_->Get("/v1/reports/hep-ph/9812408?format=text")->body, text);
  EXPECT_EQ(again["assigned"].size(), 5u);
}

TEST_F(ServiceTest, BackgroundJob) {
  send("POST", "/v1/articles", {{"source_id", "a"}, {"tex", kAxionTex}}, 201);
  send("POST", "/v1/queue/a", {{"pointers", {"title"}}, {"gap_bound", 10}}, 202);
  EXPECT_EQ(get("/v1/queue")["pending"][0]["gap_bound"], 10);
  const auto job = send("POST", "/v1/queue/run", nullptr, 202);
  service_->wait_for_jobs();
  const auto done = get("/v1/jobs/" + std::to_string(job["job"].get<int>()));
  EXPECT_EQ(done["status"], "done");
  EXPECT_EQ(get("/v1/reports/a")["config"]["gap_bound"], 10);
  EXPECT_EQ(get("/v1/reports/a")["config"]["pointers"], json({"title"}));
  EXPECT_EQ(get("/v1/jobs/999", 404)["error"], "NotFound");
}

TEST_F(ServiceTest, OneShotIndexMatchesLibrary) {
  const auto res = client_->Post("/v1/index?format=text", json{{"tex", kAxionTex}, {"source_id", "x"}}.dump(),
                                 "application/json");
  ASSERT_TRUE(res);
  IndexRequest req{"x", kAxionTex, {Pointer::Title, Pointer::Abstract},
                   ApdSnapshot::build(parse_apd(slurp(AUTEX_FIXTURES "/apd/example.apd")))};
  EXPECT_EQ(res->body, render_report(index_document(req)));
  EXPECT_TRUE(get("/v1/reports")["reports"].empty());
  EXPECT_EQ(send("POST", "/v1/index", {{"tex", "\\title{x"}}, 422)["error"], "MalformedTex");
}

TEST_F(ServiceTest, SecondInstanceIsLocked) {
  try {
    Service other(ServiceConfig{root_, kDefaultGapBound});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::StoreLocked);
  }
}
