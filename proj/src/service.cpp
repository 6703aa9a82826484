#include "autex/service.hpp"

#include <httplib.h>

#include <chrono>

#include "autex/error.hpp"
#include "autex/text.hpp"

using nlohmann::json;

namespace autex {

json to_json(const ApdEntry& entry) {
  json chains = json::array();
  for (const auto& k : entry.keychains) chains.push_back(k.render());
  json out = {{"id", entry.id}, {"alternatives", entry.alternatives}, {"keychains", chains}};
  out["note"] = entry.note ? json(*entry.note) : json(nullptr);
  return out;
}

namespace {

json pointer_array(const PointerSet& set) {
  json out = json::array();
  for (auto p : set) out.push_back(std::string(to_string(p)));
  return out;
}

json chain_array(const std::vector<Keychain>& chains) {
  json out = json::array();
  for (const auto& k : chains) out.push_back(k.render());
  return out;
}

json pair_array(const std::vector<KeychainPair>& pairs) {
  json out = json::array();
  for (const auto& p : pairs) out.push_back({{"engine", p.engine.render()}, {"reference", p.reference.render()}});
  return out;
}

}  // namespace

json to_json(const IndexReport& report) {
  json assigned = json::array();
  for (const auto& a : report.assigned) {
    json hits = json::array();
    for (const auto& h : a.hits)
      hits.push_back({{"entry", h.entry_id},
                      {"alternative", h.alternative_index},
                      {"origin", std::string(to_string(h.origin))},
                      {"slice", h.slice_ordinal},
                      {"start", h.span.start},
                      {"end", h.span.end}});
    assigned.push_back({{"keychain", a.keychain.render()},
                        {"sources", pointer_array(a.sources)},
                        {"status", std::string(to_string(a.status))},
                        {"manual", a.manual},
                        {"hits", hits}});
  }
  return {{"source_id", report.source_id},
          {"generated_at", report.generated_at},
          {"config",
           {{"pointers", pointer_array(report.config.pointers)},
            {"gap_bound", report.config.gap_bound},
            {"apd", report.config.apd_hash}}},
          {"assigned", assigned}};
}

json to_json(const ComparisonResult& r) {
  return {{"matched", pair_array(r.matched)},
          {"engine_only", chain_array(r.engine_only)},
          {"reference_only", chain_array(r.reference_only)},
          {"partial_overlaps", pair_array(r.partial_overlaps)},
          {"precision", r.precision},
          {"recall", r.recall},
          {"mode", std::string(to_string(r.mode))}};
}

json to_json(const CorpusMetrics& m) {
  return {{"documents", m.documents},
          {"micro", {{"precision", m.micro_precision}, {"recall", m.micro_recall}}},
          {"macro", {{"precision", m.macro_precision}, {"recall", m.macro_recall}}}};
}

json to_json(const BatchResult& result) {
  if (const auto* report = std::get_if<IndexReport>(&result))
    return {{"source_id", report->source_id}, {"ok", true}, {"keychains", report->assigned.size()}};
  const auto& err = std::get<BatchError>(result);
  return {{"source_id", err.source_id}, {"ok", false}, {"error", err.kind}, {"message", err.message}};
}

Service::Service(ServiceConfig config) : config_(std::move(config)), store_(config_.store_root) {
  state_ = store_.load();
}

Service::~Service() { wait_for_jobs(); }

void Service::wait_for_jobs() {
  std::vector<std::thread> workers;
  {
    std::scoped_lock lock(jobs_mutex_);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
}

StoreState Service::state() const {
  std::shared_lock lock(state_mutex_);
  return state_;
}

std::optional<JobStatus> Service::job(int id) const {
  std::scoped_lock lock(jobs_mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

int Service::start_batch(std::optional<std::size_t> gap_bound, bool wait) {
  std::vector<IndexRequest> requests;
  std::vector<BatchResult> early;
  {
    std::unique_lock lock(state_mutex_);
    std::shared_ptr<const ApdSnapshot> snapshot;
    std::optional<Error> apd_error;
    try {
      snapshot = ApdSnapshot::build(state_.apd.entries());
    } catch (const Error& e) {
      apd_error = e;
    }
    for (const auto& item : state_.queue) {
      auto art = state_.articles.find(item.source_id);
      if (apd_error) {
        early.push_back(BatchError{item.source_id, std::string(to_string(apd_error->kind())), apd_error->what()});
      } else if (art == state_.articles.end()) {
        early.push_back(BatchError{item.source_id, "UnknownArticle", "no article '" + item.source_id + "'"});
      } else {
        requests.push_back({item.source_id, art->second.tex_source, item.pointers, snapshot,
                            gap_bound.value_or(item.gap_bound.value_or(config_.default_gap_bound))});
      }
    }
    state_.queue.clear();
    store_.save_queue(state_.queue);
  }

  int id;
  {
    std::scoped_lock lock(jobs_mutex_);
    id = next_job_++;
    jobs_[id] = JobStatus{id, false, {}};
  }
  if (wait) {
    run_job(id, std::move(requests), std::move(early));
  } else {
    std::scoped_lock lock(jobs_mutex_);
    workers_.emplace_back(&Service::run_job, this, id, std::move(requests), std::move(early));
  }
  return id;
}

void Service::run_job(int id, std::vector<IndexRequest> requests, std::vector<BatchResult> early) {
  auto results = index_batch(requests);
  std::vector<json> summary;
  {
    std::unique_lock lock(state_mutex_);
    for (auto& r : results) {
      if (auto* report = std::get_if<IndexReport>(&r)) {
        store_.save_report(*report);
        state_.reports[report->source_id] = *report;
      }
    }
  }
  for (const auto& r : early) summary.push_back(to_json(r));
  for (const auto& r : results) summary.push_back(to_json(r));
  std::scoped_lock lock(jobs_mutex_);
  jobs_[id].results = std::move(summary);
  jobs_[id].done = true;
}

namespace {

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnknownEntry:
    case ErrorKind::UnknownArticle:
      return 404;
    case ErrorKind::StoreLocked:
      return 409;
    case ErrorKind::Io:
    case ErrorKind::CorruptStore:
      return 500;
    case ErrorKind::ParseError:
    case ErrorKind::InvalidFilter:
      return 400;
    default:
      return 422;
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view kind, const std::string& message) {
  send_json(res, status, {{"error", kind}, {"message", message}});
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler guarded(Handler inner) {
  return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
    try {
      inner(req, res);
    } catch (const Error& e) {
      send_error(res, status_for(e.kind()), to_string(e.kind()), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "ParseError", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "Internal", e.what());
    }
  };
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  auto j = json::parse(req.body);
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "request body must be a JSON object");
  return j;
}

VocabularyFilter filter_from(const httplib::Request& req) {
  VocabularyFilter f;
  if (req.has_param("letter")) {
    const auto letter = text::decode_utf8(req.get_param_value("letter"));
    if (letter.size() != 1) throw Error(ErrorKind::InvalidFilter, "letter must be a single character");
    f.letter = letter[0];
  }
  if (req.has_param("prefix")) f.prefix = req.get_param_value("prefix");
  if (req.has_param("keychain")) {
    std::vector<Keychain> chains;
    for (std::size_t i = 0; i < req.get_param_value_count("keychain"); ++i)
      chains.push_back(parse_keychain(req.get_param_value("keychain", i)));
    f.keychain_selector = std::move(chains);
  }
  return f;
}

std::optional<std::size_t> gap_bound_from(const httplib::Request& req, const json& body) {
  if (req.has_param("gap_bound")) {
    try {
      return std::stoull(req.get_param_value("gap_bound"));
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, "gap_bound must be a non-negative integer");
    }
  }
  if (body.contains("gap_bound")) return body.at("gap_bound").get<std::size_t>();
  return std::nullopt;
}

PointerSet pointers_from(const json& value) {
  if (value.is_string()) return parse_pointer_list(value.get<std::string>());
  PointerSet out;
  for (const auto& p : value) {
    const auto name = p.get<std::string>();
    const auto parsed = parse_pointer(name);
    if (!parsed) return parse_pointer_list(name);  // throws with the legal names
    out.insert(*parsed);
  }
  if (out.empty()) throw Error(ErrorKind::ParseError, "pointer list is empty");
  return out;
}

std::vector<std::string> patterns_from(const json& body) {
  std::vector<std::string> out;
  if (body.contains("pattern")) out.push_back(body.at("pattern").get<std::string>());
  if (body.contains("patterns"))
    for (const auto& p : body.at("patterns")) out.push_back(p.get<std::string>());
  return out;
}

std::vector<Keychain> keychains_from(const json& body) {
  std::vector<Keychain> out;
  if (body.contains("keychains"))
    for (const auto& k : body.at("keychains")) out.push_back(parse_keychain(k.get<std::string>()));
  return out;
}

std::optional<std::string> note_from(const json& body) {
  if (body.contains("note") && body.at("note").is_string()) return body.at("note").get<std::string>();
  return std::nullopt;
}

json article_json(const ArticleRecord& a, bool with_source) {
  json out = {{"source_id", a.source_id},
              {"revision", a.revision},
              {"uploaded_at", a.uploaded_at},
              {"slac_id", a.profile.slac_id ? json(*a.profile.slac_id) : json(nullptr)},
              {"prefix", a.profile.prefix ? json(*a.profile.prefix) : json(nullptr)}};
  if (with_source) out["tex"] = a.tex_source;
  return out;
}

json queue_json(const std::vector<QueueItem>& queue) {
  json items = json::array();
  for (const auto& q : queue) {
    json item = {{"source_id", q.source_id}, {"pointers", pointer_array(q.pointers)}};
    if (q.gap_bound) item["gap_bound"] = *q.gap_bound;
    items.push_back(item);
  }
  return {{"pending", items}};
}

json job_json(const JobStatus& job) {
  return {{"job", job.id}, {"status", job.done ? "done" : "running"}, {"results", job.results}};
}

std::int64_t now_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

void Service::mount(httplib::Server& server) {
  // vocabulary
  server.Get("/v1/keywords", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto filter = filter_from(req);
    std::shared_lock lock(state_mutex_);
    json items = json::array();
    for (const auto& k : state_.vocabulary.filter_keywords(filter)) items.push_back(k.text());
    send_json(res, 200, {{"keywords", items}});
  }));
  server.Post("/v1/keywords", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    std::unique_lock lock(state_mutex_);
    const auto kw = state_.vocabulary.add_keyword(body.at("text").get<std::string>());
    store_.save_vocabulary(state_.vocabulary);
    send_json(res, 201, {{"keyword", kw.text()}});
  }));
  server.Get("/v1/keychains", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto filter = filter_from(req);
    std::shared_lock lock(state_mutex_);
    send_json(res, 200, {{"keychains", chain_array(state_.vocabulary.filter_keychains(filter))}});
  }));
  server.Post("/v1/keychains", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    std::vector<std::string> words;
    if (body.contains("keywords")) {
      words = body.at("keywords").get<std::vector<std::string>>();
    } else {
      const auto parsed = parse_keychain(body.at("keychain").get<std::string>());
      for (const auto& k : parsed.keywords()) words.push_back(k.text());
    }
    std::unique_lock lock(state_mutex_);
    const auto chain = state_.vocabulary.make_keychain(words);
    store_.save_vocabulary(state_.vocabulary);
    send_json(res, 201, {{"keychain", chain.render()}});
  }));

  // APD
  server.Get("/v1/patterns", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto filter = filter_from(req);
    std::shared_lock lock(state_mutex_);
    json items = json::array();
    for (const auto& e : state_.apd.filter_entries(filter)) items.push_back(to_json(e));
    send_json(res, 200, {{"entries", items}});
  }));
  server.Get(R"(/v1/patterns/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::shared_lock lock(state_mutex_);
    const auto entry = state_.apd.find(req.matches[1]);
    if (!entry) throw Error(ErrorKind::UnknownEntry, "no entry '" + std::string(req.matches[1]) + "'");
    send_json(res, 200, to_json(*entry));
  }));
  server.Post("/v1/patterns", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    std::unique_lock lock(state_mutex_);
    const auto entry =
        state_.apd.add_entry(patterns_from(body), keychains_from(body), state_.vocabulary, note_from(body));
    store_.save_apd(state_.apd);
    send_json(res, 201, to_json(entry));
  }));
  server.Put(R"(/v1/patterns/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    std::unique_lock lock(state_mutex_);
    const auto entry = state_.apd.replace(req.matches[1], patterns_from(body), keychains_from(body),
                                          state_.vocabulary, note_from(body));
    store_.save_apd(state_.apd);
    send_json(res, 200, to_json(entry));
  }));
  server.Delete(R"(/v1/patterns/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::unique_lock lock(state_mutex_);
    state_.apd.remove(req.matches[1]);
    store_.save_apd(state_.apd);
    res.status = 204;
  }));

  // articles
  server.Post("/v1/articles", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    ArticleRecord rec;
    rec.source_id = body.at("source_id").get<std::string>();
    if (text::trim(rec.source_id).empty()) throw Error(ErrorKind::ParseError, "source_id is empty");
    rec.tex_source = body.at("tex").get<std::string>();
    rec.uploaded_at = now_seconds();
    if (body.contains("slac_id") && body["slac_id"].is_string()) rec.profile.slac_id = body["slac_id"];
    if (body.contains("prefix") && body["prefix"].is_string()) rec.profile.prefix = body["prefix"];
    std::unique_lock lock(state_mutex_);
    if (auto it = state_.articles.find(rec.source_id); it != state_.articles.end()) {
      rec.revision = it->second.revision + 1;
      if (!body.contains("slac_id")) rec.profile.slac_id = it->second.profile.slac_id;
      if (!body.contains("prefix")) rec.profile.prefix = it->second.profile.prefix;
    }
    store_.save_article(rec);
    state_.articles[rec.source_id] = rec;
    send_json(res, 201, article_json(rec, false));
  }));
  server.Get("/v1/articles", guarded([this](const httplib::Request&, httplib::Response& res) {
    std::shared_lock lock(state_mutex_);
    json items = json::array();
    for (const auto& [id, a] : state_.articles) items.push_back(article_json(a, false));
    send_json(res, 200, {{"articles", items}});
  }));
  server.Get(R"(/v1/articles/(.+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::shared_lock lock(state_mutex_);
    auto it = state_.articles.find(req.matches[1]);
    if (it == state_.articles.end())
      throw Error(ErrorKind::UnknownArticle, "no article '" + std::string(req.matches[1]) + "'");
    send_json(res, 200, article_json(it->second, true));
  }));
  server.Patch(R"(/v1/articles/(.+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    std::unique_lock lock(state_mutex_);
    auto it = state_.articles.find(req.matches[1]);
    if (it == state_.articles.end())
      throw Error(ErrorKind::UnknownArticle, "no article '" + std::string(req.matches[1]) + "'");
    auto& profile = it->second.profile;
    if (body.contains("slac_id"))
      profile.slac_id = body["slac_id"].is_string() ? std::optional<std::string>(body["slac_id"]) : std::nullopt;
    if (body.contains("prefix"))
      profile.prefix = body["prefix"].is_string() ? std::optional<std::string>(body["prefix"]) : std::nullopt;
    store_.save_profile(it->second);
    send_json(res, 200, article_json(it->second, false));
  }));

  // queue and jobs
  server.Get("/v1/queue", guarded([this](const httplib::Request&, httplib::Response& res) {
    std::shared_lock lock(state_mutex_);
    send_json(res, 200, queue_json(state_.queue));
  }));
  server.Post("/v1/queue/run", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    const bool wait = req.has_param("wait") && req.get_param_value("wait") == "true";
    const int id = start_batch(gap_bound_from(req, body), wait);
    const auto status = job(id);
    send_json(res, wait ? 200 : 202, job_json(*status));
  }));
  server.Post(R"(/v1/queue/(.+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    QueueItem item{req.matches[1], {Pointer::Title, Pointer::Abstract}, gap_bound_from(req, body)};
    if (req.has_param("pointers")) item.pointers = parse_pointer_list(req.get_param_value("pointers"));
    if (body.contains("pointers")) item.pointers = pointers_from(body.at("pointers"));
    std::unique_lock lock(state_mutex_);
    if (!state_.articles.count(item.source_id))
      throw Error(ErrorKind::UnknownArticle, "no article '" + item.source_id + "'");
    bool queued = std::none_of(state_.queue.begin(), state_.queue.end(),
                               [&](const QueueItem& q) { return q.source_id == item.source_id; });
    if (queued) {
      state_.queue.push_back(item);
      store_.save_queue(state_.queue);
    }
    auto out = queue_json(state_.queue);
    out["queued"] = queued;
    send_json(res, queued ? 202 : 200, out);
  }));
  server.Get(R"(/v1/jobs/(\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto status = job(std::stoi(req.matches[1]));
    if (!status) return send_error(res, 404, "NotFound", "no such job");
    send_json(res, 200, job_json(*status));
  }));

  // reports
  server.Get("/v1/reports", guarded([this](const httplib::Request&, httplib::Response& res) {
    std::shared_lock lock(state_mutex_);
    json ids = json::array();
    for (const auto& [id, r] : state_.reports) ids.push_back(id);
    send_json(res, 200, {{"reports", ids}});
  }));
  server.Get(R"(/v1/reports/(.+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::shared_lock lock(state_mutex_);
    auto it = state_.reports.find(req.matches[1]);
    if (it == state_.reports.end())
      return send_error(res, 404, "NotFound", "no report for '" + std::string(req.matches[1]) + "'");
    if (req.has_param("format") && req.get_param_value("format") == "text") {
      res.set_content(render_report(it->second), "text/plain; charset=utf-8");
    } else {
      send_json(res, 200, to_json(it->second));
    }
  }));
  server.Patch(R"(/v1/reports/(.+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    const auto chain = parse_keychain(body.at("keychain").get<std::string>());
    const auto status_name = body.at("status").get<std::string>();
    const auto status = parse_status(status_name);
    if (!status) throw Error(ErrorKind::ParseError, "unknown status '" + status_name + "'");
    std::unique_lock lock(state_mutex_);
    auto it = state_.reports.find(req.matches[1]);
    if (it == state_.reports.end())
      return send_error(res, 404, "NotFound", "no report for '" + std::string(req.matches[1]) + "'");
    auto updated = *status == CurationStatus::Auto ? reset_correction(it->second, chain)
                                                   : apply_correction(it->second, chain, *status);
    store_.save_report(updated);
    it->second = std::move(updated);
    send_json(res, 200, to_json(it->second));
  }));

  // one-shot indexing, nothing stored
  server.Post("/v1/index", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    IndexRequest request;
    request.source_id = body.value("source_id", std::string("document"));
    request.tex_source = body.at("tex").get<std::string>();
    request.pointers =
        body.contains("pointers") ? pointers_from(body.at("pointers")) : PointerSet{Pointer::Title, Pointer::Abstract};
    request.gap_bound = gap_bound_from(req, body).value_or(config_.default_gap_bound);
    {
      std::shared_lock lock(state_mutex_);
      request.apd = ApdSnapshot::build(state_.apd.entries());
    }
    const auto report = index_document(request);
    if (req.has_param("format") && req.get_param_value("format") == "text") {
      res.set_content(render_report(report), "text/plain; charset=utf-8");
    } else {
      send_json(res, 200, to_json(report));
    }
  }));

  server.Post("/v1/evaluate", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    CompareOptions options;
    if (body.contains("mode")) options.mode = parse_mode(body.at("mode").get<std::string>());
    options.include_manual = body.value("include_manual", false);
    const auto reference = parse_reference(body.at("reference").get<std::string>());
    ComparisonResult result;
    if (body.contains("report")) {
      result = compare(parse_report(body.at("report").get<std::string>()), reference, options);
    } else {
      const auto id = body.at("source_id").get<std::string>();
      std::shared_lock lock(state_mutex_);
      auto it = state_.reports.find(id);
      if (it == state_.reports.end()) return send_error(res, 404, "NotFound", "no report for '" + id + "'");
      result = compare(it->second, reference, options);
    }
    auto out = to_json(result);
    out["summary"] = summary_line(result);
    send_json(res, 200, out);
  }));
}

void serve(Service& service, const std::string& host, int port) {
  httplib::Server server;
  service.mount(server);
  if (!server.listen(host, port)) throw Error(ErrorKind::Io, "cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace autex
