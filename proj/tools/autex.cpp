#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>

#include "autex/error.hpp"
#include "autex/evaluation.hpp"
#include "autex/indexer.hpp"
#include "autex/service.hpp"
#include "autex/store.hpp"
#include "autex/text.hpp"

namespace fs = std::filesystem;
using namespace autex;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInput = 2, kApd = 3, kIo = 4 };

struct Failure {
  int code;
  std::string message;
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyApd:
    case ErrorKind::UnsupportedConstruct:
    case ErrorKind::UnbalancedMath:
    case ErrorKind::EmptyPattern:
    case ErrorKind::UnknownKeychain:
    case ErrorKind::DuplicateAlternative:
    case ErrorKind::UnknownEntry:
      return kApd;
    case ErrorKind::Io:
    case ErrorKind::StoreLocked:
    case ErrorKind::CorruptStore:
      return kIo;
    default:
      return kInput;
  }
}

struct Globals {
  std::string store;
  std::size_t gap_bound = kDefaultGapBound;
  std::string format = "text";
  bool json() const { return format == "json"; }
};

std::string store_root(const Globals& g) {
  if (!g.store.empty()) return g.store;
  if (const char* env = std::getenv("AUTEX_STORE")) return env;
  return {};
}

std::string read_input(const std::string& path) {
  try {
    return read_file(path);
  } catch (const Error& e) {
    throw Failure{kIo, e.what()};
  }
}

PointerSet parse_parts(const std::string& parts) {
  try {
    return parse_pointer_list(parts);
  } catch (const Error& e) {
    throw Failure{kUsage, std::string("--parts: ") + e.what()};
  }
}

/// APD from an explicit file, else from the store.
std::vector<ApdEntry> load_apd_entries(const std::string& apd_path, const Globals& g, int parse_code) {
  if (!apd_path.empty()) {
    const auto content = read_input(apd_path);
    try {
      return parse_apd(content);
    } catch (const Error& e) {
      throw Failure{parse_code, apd_path + ": " + e.what()};
    }
  }
  const auto root = store_root(g);
  if (root.empty()) throw Failure{kUsage, "no APD given: pass --apd or --store"};
  Store store(root);
  return store.load().apd.entries();
}

std::shared_ptr<const ApdSnapshot> snapshot_of(std::vector<ApdEntry> entries) {
  try {
    auto snap = ApdSnapshot::build(std::move(entries));
    for (const auto& d : snap->diagnostics()) std::cerr << "warning: " << d << "\n";
    return snap;
  } catch (const Error& e) {
    throw Failure{kApd, e.what()};
  }
}

std::string report_summary(const IndexReport& report) {
  std::string out;
  for (const auto& a : report.assigned) {
    if (a.status == CurationStatus::Rejected) continue;
    out += a.keychain.render() + "  [" + (a.manual ? std::string("manual") : render_pointer_list(a.sources)) + "]\n";
  }
  if (report.assigned.empty()) out += "(no keychains assigned)\n";
  return out;
}

VocabularyFilter make_filter(const std::string& letter, const std::string& prefix,
                             const std::vector<std::string>& chains) {
  VocabularyFilter f;
  if (!letter.empty()) {
    const auto cps = text::decode_utf8(letter);
    if (cps.size() != 1) throw Failure{kUsage, "--letter takes a single character"};
    f.letter = cps[0];
  }
  if (!prefix.empty()) f.prefix = prefix;
  if (!chains.empty()) {
    std::vector<Keychain> sel;
    for (const auto& c : chains) sel.push_back(parse_keychain(c));
    f.keychain_selector = std::move(sel);
  }
  try {
    f.validate();
  } catch (const Error& e) {
    throw Failure{kUsage, e.what()};
  }
  return f;
}

bool looks_like_report(std::string_view content) { return content.rfind("# autex-report v1", 0) == 0; }

/// Engine side for eval: a canonical report or a plain keychain list.
ComparisonResult compare_files(const std::string& engine_path, const std::string& ref_path,
                               const CompareOptions& options) {
  const auto engine_text = read_input(engine_path);
  const auto ref_text = read_input(ref_path);
  auto located = [](const std::string& path, const Error& e) { return Failure{kInput, path + ": " + e.what()}; };
  ReferenceReport reference;
  try {
    reference = parse_reference(ref_text);
  } catch (const Error& e) {
    throw located(ref_path, e);
  }
  try {
    if (looks_like_report(engine_text)) return compare(parse_report(engine_text), reference, options);
    return compare(parse_reference(engine_text), reference, options);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SourceMismatch) throw Failure{kInput, e.what()};
    throw located(engine_path, e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"autex: automatic keyword indexing of TeX documents"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--store", g.store, "store root (default: $AUTEX_STORE)");
  app.add_option("--gap-bound", g.gap_bound, "maximum characters consumed by an open-ended pattern class");
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"text", "json"}));

  // index
  auto* index = app.add_subcommand("index", "index one TeX document");
  std::string apd_path, parts = "title,abstract", out_path, source_id, doc_path;
  index->add_option("--apd", apd_path, "APD file (default: the store's)");
  index->add_option("--parts", parts, "comma-separated pointers");
  index->add_option("-o,--output", out_path, "report file (default: <doc>.report)");
  index->add_option("--source-id", source_id, "source id (default: file stem)");
  index->add_option("doc", doc_path, "TeX file")->required();

  // batch
  auto* batch = app.add_subcommand("batch", "index several documents, or drain the store queue");
  std::string batch_dir;
  std::vector<std::string> batch_docs;
  batch->add_option("--apd", apd_path, "APD file");
  batch->add_option("--parts", parts, "comma-separated pointers");
  batch->add_option("-o,--output-dir", batch_dir, "directory for report files");
  batch->add_option("docs", batch_docs, "TeX files (none: run the store queue)");

  // eval
  auto* eval = app.add_subcommand("eval", "compare an engine report with a reference report");
  std::string mode_name = "exact", corpus_dir, engine_path, ref_path;
  bool include_manual = false;
  eval->add_option("--mode", mode_name, "exact or order-insensitive");
  eval->add_flag("--include-manual", include_manual, "count manual keychains on the engine side");
  eval->add_option("--corpus", corpus_dir, "directory of <name>.report / <name>.ref pairs");
  eval->add_option("engine", engine_path, "engine report or keychain list");
  eval->add_option("reference", ref_path, "reference report");

  // apd
  auto* apd = app.add_subcommand("apd", "dictionary maintenance");
  apd->require_subcommand(1);
  auto* lint = apd->add_subcommand("lint", "check the dictionary");
  std::string apd_file;
  lint->add_option("file,--apd", apd_file, "APD file (default: the store's)");
  auto* list = apd->add_subcommand("list", "list entries");
  std::string letter, prefix;
  std::vector<std::string> chain_filter;
  list->add_option("file,--apd", apd_file, "APD file (default: the store's)");
  list->add_option("--letter", letter);
  list->add_option("--prefix", prefix);
  list->add_option("--keychain", chain_filter, "keep entries carrying this keychain (repeatable)");
  auto* add = apd->add_subcommand("add", "append an entry");
  std::vector<std::string> add_patterns, add_keys;
  std::string add_note;
  add->add_option("--apd", apd_file, "APD file (default: the store's)");
  add->add_option("--pattern", add_patterns, "alternatives, `|`-separated (repeatable)")->required();
  add->add_option("--keys", add_keys, "keychain (repeatable)");
  add->add_option("--note", add_note);

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP API");
  std::string listen = "127.0.0.1:8080";
  serve_cmd->add_option("--listen", listen, "host:port");

  // vocab
  auto* vocab = app.add_subcommand("vocab", "vocabulary in the store");
  vocab->require_subcommand(1);
  auto* vlist = vocab->add_subcommand("list", "list keywords or keychains");
  bool list_chains = false;
  vlist->add_option("--letter", letter);
  vlist->add_option("--prefix", prefix);
  vlist->add_flag("--keychains", list_chains, "list keychains instead of keywords");
  auto* vadd = vocab->add_subcommand("add", "add keywords or a keychain");
  std::vector<std::string> vadd_words;
  std::string vadd_chain;
  vadd->add_option("keywords", vadd_words);
  vadd->add_option("--keychain", vadd_chain, "compose a keychain from known keywords");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*index) {
      const auto pointers = parse_parts(parts);
      auto snap = snapshot_of(load_apd_entries(apd_path, g, kApd));
      IndexRequest req{source_id.empty() ? fs::path(doc_path).stem().string() : source_id, read_input(doc_path),
                       pointers, snap, g.gap_bound};
      const auto report = index_document(req);
      if (out_path.empty()) out_path = fs::path(doc_path).replace_extension(".report").string();
      write_atomic(out_path, render_report(report));
      if (g.json()) {
        std::cout << to_json(report).dump(2) << "\n";
      } else {
        std::cout << report_summary(report);
      }
      return kOk;
    }

    if (*batch) {
      const auto pointers = parse_parts(parts);
      if (batch_docs.empty()) {
        const auto root = store_root(g);
        if (root.empty()) throw Failure{kUsage, "batch: give documents or --store"};
        Service service({root, g.gap_bound});
        const auto id = service.start_batch(g.gap_bound, true);
        const auto status = *service.job(id);
        int code = kOk;
        for (const auto& r : status.results) {
          if (g.json()) continue;
          std::cout << r["source_id"].get<std::string>() << "\t"
                    << (r["ok"].get<bool>() ? "ok" : r["error"].get<std::string>()) << "\n";
        }
        for (const auto& r : status.results)
          if (!r["ok"].get<bool>()) code = kInput;
        if (g.json()) std::cout << json(status.results).dump(2) << "\n";
        return code;
      }
      auto snap = snapshot_of(load_apd_entries(apd_path, g, kApd));
      std::vector<IndexRequest> requests;
      for (const auto& doc : batch_docs)
        requests.push_back({fs::path(doc).stem().string(), read_input(doc), pointers, snap, g.gap_bound});
      const auto results = index_batch(requests);
      int code = kOk;
      json summary = json::array();
      for (std::size_t i = 0; i < results.size(); ++i) {
        summary.push_back(to_json(results[i]));
        if (const auto* report = std::get_if<IndexReport>(&results[i])) {
          const auto dir = batch_dir.empty() ? fs::path(batch_docs[i]).parent_path() : fs::path(batch_dir);
          write_atomic(dir / (fs::path(batch_docs[i]).stem().string() + ".report"), render_report(*report));
          if (!g.json()) std::cout << report->source_id << "\tok\t" << report->assigned.size() << "\n";
        } else {
          const auto& err = std::get<BatchError>(results[i]);
          std::cerr << batch_docs[i] << ": " << err.kind << ": " << err.message << "\n";
          if (!g.json()) std::cout << err.source_id << "\t" << err.kind << "\n";
          code = kInput;
        }
      }
      if (g.json()) std::cout << summary.dump(2) << "\n";
      return code;
    }

    if (*eval) {
      CompareOptions options;
      try {
        options.mode = parse_mode(mode_name);
      } catch (const Error& e) {
        throw Failure{kUsage, e.what()};
      }
      options.include_manual = include_manual;
      if (!corpus_dir.empty()) {
        std::vector<std::string> names;
        for (const auto& f : fs::directory_iterator(corpus_dir))
          if (f.path().extension() == ".ref") names.push_back(f.path().stem().string());
        std::sort(names.begin(), names.end());
        std::vector<ComparisonResult> results;
        json docs = json::array();
        for (const auto& name : names) {
          const auto engine = (fs::path(corpus_dir) / (name + ".report")).string();
          if (!fs::exists(engine)) throw Failure{kIo, "missing engine report " + engine};
          results.push_back(compare_files(engine, (fs::path(corpus_dir) / (name + ".ref")).string(), options));
          if (g.json()) {
            auto j = to_json(results.back());
            j["name"] = name;
            docs.push_back(j);
          } else {
            std::cout << name << "\t" << summary_line(results.back()) << "\n";
          }
        }
        const auto m = corpus_metrics(results);
        if (g.json()) {
          std::cout << json{{"documents", docs}, {"aggregate", to_json(m)}}.dump(2) << "\n";
        } else {
          char buf[160];
          std::snprintf(buf, sizeof buf, "micro P=%.6f R=%.6f\nmacro P=%.6f R=%.6f\n", m.micro_precision,
                        m.micro_recall, m.macro_precision, m.macro_recall);
          std::cout << buf;
        }
        return kOk;
      }
      if (engine_path.empty() || ref_path.empty()) throw Failure{kUsage, "eval: need ENGINE and REFERENCE files"};
      const auto result = compare_files(engine_path, ref_path, options);
      if (g.json()) {
        std::cout << to_json(result).dump(2) << "\n";
      } else {
        std::cout << render_comparison(result);
      }
      return kOk;
    }

    if (*lint) {
      const auto entries = load_apd_entries(apd_file, g, kInput);
      const auto findings = lint_apd(entries);
      bool fatal = false;
      for (const auto& f : findings) {
        fatal = fatal || f.fatal();
        std::string ids;
        for (const auto& id : f.entry_ids) ids += (ids.empty() ? "" : ",") + id;
        std::cout << (f.fatal() ? "error" : "warning") << "\t" << to_string(f.kind) << "\t" << ids << "\t"
                  << f.message << "\n";
      }
      if (!g.json() && findings.empty()) std::cout << entries.size() << " entries, no findings\n";
      return fatal ? kApd : kOk;
    }

    if (*list) {
      const auto filter = make_filter(letter, prefix, chain_filter);
      Apd apd_db;
      for (auto e : load_apd_entries(apd_file, g, kInput)) apd_db.insert(std::move(e));
      const auto entries = apd_db.filter_entries(filter);
      if (g.json()) {
        json items = json::array();
        for (const auto& e : entries) items.push_back(to_json(e));
        std::cout << items.dump(2) << "\n";
      } else {
        for (const auto& e : entries) std::cout << render_entry(e) << "\n";
      }
      return kOk;
    }

    if (*add) {
      if (add_keys.empty()) throw Failure{kUsage, "apd add: --keys is required and must not be empty"};
      std::vector<Keychain> chains;
      for (const auto& k : add_keys) {
        try {
          chains.push_back(parse_keychain(k));
        } catch (const Error& e) {
          throw Failure{kUsage, std::string("apd add: ") + e.what()};
        }
      }
      std::optional<std::string> note;
      if (!add_note.empty()) note = add_note;
      if (!apd_file.empty()) {
        Apd apd_db;
        std::string existing;
        if (fs::exists(apd_file)) {
          existing = read_input(apd_file);
          try {
            for (auto e : parse_apd(existing)) apd_db.insert(std::move(e));
          } catch (const Error& e) {
            throw Failure{kInput, apd_file + ": " + e.what()};
          }
        }
        Vocabulary open_vocab;
        for (const auto& c : chains) open_vocab.ingest_keychain(c.render());
        const auto entry = apd_db.add_entry(add_patterns, chains, open_vocab, note);
        if (!existing.empty() && existing.back() != '\n') existing += "\n";
        write_atomic(apd_file, existing + render_entry(entry));
        std::cout << entry.id << "\n";
        return kOk;
      }
      const auto root = store_root(g);
      if (root.empty()) throw Failure{kUsage, "apd add: pass --apd or --store"};
      Store store(root);
      auto state = store.load();
      const auto entry = state.apd.add_entry(add_patterns, chains, state.vocabulary, note);
      store.save_apd(state.apd);
      std::cout << entry.id << "\n";
      return kOk;
    }

    if (*serve_cmd) {
      const auto root = store_root(g);
      if (root.empty()) throw Failure{kUsage, "serve: pass --store or set AUTEX_STORE"};
      const auto colon = listen.rfind(':');
      if (colon == std::string::npos) throw Failure{kUsage, "--listen expects host:port"};
      int port = 0;
      try {
        port = std::stoi(listen.substr(colon + 1));
      } catch (const std::exception&) {
        throw Failure{kUsage, "--listen expects host:port"};
      }
      Service service({root, g.gap_bound});
      std::cerr << "listening on " << listen << "\n";
      serve(service, listen.substr(0, colon), port);
      return kOk;
    }

    if (*vlist || *vadd) {
      const auto root = store_root(g);
      if (root.empty()) throw Failure{kUsage, "vocab: pass --store or set AUTEX_STORE"};
      Store store(root);
      auto state = store.load();
      if (*vlist) {
        const auto filter = make_filter(letter, prefix, {});
        std::vector<std::string> items;
        if (list_chains) {
          for (const auto& k : state.vocabulary.filter_keychains(filter)) items.push_back(k.render());
        } else {
          for (const auto& k : state.vocabulary.filter_keywords(filter)) items.push_back(k.text());
        }
        if (g.json()) {
          std::cout << json(items).dump(2) << "\n";
        } else {
          for (const auto& i : items) std::cout << i << "\n";
        }
        return kOk;
      }
      if (vadd_words.empty() && vadd_chain.empty()) throw Failure{kUsage, "vocab add: nothing to add"};
      for (const auto& w : vadd_words) std::cout << state.vocabulary.add_keyword(w).text() << "\n";
      if (!vadd_chain.empty()) {
        std::vector<std::string> words;
        const auto parsed = parse_keychain(vadd_chain);
        for (const auto& k : parsed.keywords()) words.push_back(k.text());
        std::cout << state.vocabulary.make_keychain(words).render() << "\n";
      }
      store.save_vocabulary(state.vocabulary);
      return kOk;
    }
  } catch (const Failure& f) {
    std::cerr << "autex: " << f.message << "\n";
    if (f.code == kUsage) std::cerr << "run 'autex --help' for usage\n";
    return f.code;
  } catch (const Error& e) {
    std::cerr << "autex: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "autex: " << e.what() << "\n";
    return kIo;
  }
  return kOk;
}
