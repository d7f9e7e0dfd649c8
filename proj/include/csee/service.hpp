#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "csee/compiler.hpp"
#include "csee/session.hpp"
#include "csee/workbook.hpp"

namespace csee::service {

using Json = nlohmann::ordered_json;

inline Json report_json(const SolveReport& r) {
  Json j;
  j["status"] = std::string(to_string(r.status));
  j["count"] = r.count;
  j["exhausted"] = r.exhausted;
  if (r.objective) j["objective"] = *r.objective;
  j["elapsed_ms"] = static_cast<std::int64_t>(r.elapsed.count());
  j["nodes"] = r.nodes;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

inline Json errors_json(const std::vector<CompileError>& errors) {
  Json list = Json::array();
  for (const auto& e : errors) {
    list.push_back(Json{{"cell", format_cell_ref(e.cell)},
                        {"kind", std::string(to_string(e.kind))},
                        {"message", e.message}});
  }
  return Json{{"errors", std::move(list)}};
}

inline Json workbook_error_json(const WorkbookError& e) {
  Json list = Json::array();
  for (const auto& m : e.messages()) {
    list.push_back(Json{{"cell", nullptr}, {"kind", "InvalidWorkbook"}, {"message", m}});
  }
  for (const auto& c : e.cell_errors()) {
    list.push_back(Json{{"cell", format_cell_ref(c.cell())},
                        {"kind", "ParseError"},
                        {"message", c.detail()},
                        {"position", c.position()}});
  }
  return Json{{"errors", std::move(list)}};
}

inline std::string_view content_kind(const CellContent& c) {
  switch (c.index()) {
    case 0: return "empty";
    case 1: return "value";
    case 2: return "domain";
    default: return "formula";
  }
}

/// Workbook JSON plus role annotations for the grid view.
inline Json view_json(const SolveSession& s) {
  Json j = to_json(s.display());
  Json roles = Json::object();
  try {
    DeclaredRanges ranges = collect_ranges(s.workbook());
    j["var_range"] = format_range_list(ranges.var_range);
    j["constraint_range"] = format_range_list(ranges.constraint_range);
    for (CellRef c : var_list(ranges.var_range)) roles[format_cell_ref(c)] = "variable";
    for (CellRef c : var_list(ranges.constraint_range)) {
      if (std::holds_alternative<Formula>(s.workbook().content(c))) {
        roles[format_cell_ref(c)] = "constraint";
      }
    }
  } catch (const CompileFailure&) {
  }
  j["roles"] = std::move(roles);
  if (s.index()) j["solution_index"] = *s.index();
  if (s.report()) j["report"] = report_json(*s.report());
  return j;
}

/// Session registry and route handlers. Each session serializes its own
/// operations; a request that finds the session busy gets 409.
class Service {
 public:
  struct Entry {
    std::mutex mu;
    SolveSession session;
    explicit Entry(Workbook wb) : session(std::move(wb)) {}
  };

  Service() : rng_(std::random_device{}()) {}

  void register_routes(httplib::Server& server) {
    server.Post("/api/workbook", [this](const httplib::Request& req, httplib::Response& res) {
      create(req, res);
    });
    server.Get("/api/workbook", [this](const httplib::Request& req, httplib::Response& res) {
      with_session(req, res, [&](SolveSession& s) { send(res, 200, view_json(s)); });
    });
    server.Put(R"(/api/cells/([A-Za-z]+[0-9]+))",
               [this](const httplib::Request& req, httplib::Response& res) { edit(req, res); });
    server.Post("/api/solve", [this](const httplib::Request& req, httplib::Response& res) {
      solve(req, res);
    });
    server.Get(R"(/api/solutions/(\d+))",
               [this](const httplib::Request& req, httplib::Response& res) { solution(req, res); });
    server.Post("/api/reset", [this](const httplib::Request& req, httplib::Response& res) {
      with_session(req, res, [&](SolveSession& s) {
        s.reset();
        send(res, 200, to_json(s.display()));
      });
    });
  }

  std::size_t session_count() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
  }

 private:
  static void send(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, int status, const std::string& message) {
    send(res, status, Json{{"error", message}});
  }

  std::shared_ptr<Entry> find(const httplib::Request& req) {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(req.get_param_value("session"));
    return it == sessions_.end() ? nullptr : it->second;
  }

  template <class F>
  void with_session(const httplib::Request& req, httplib::Response& res, F&& f) {
    auto entry = find(req);
    if (!entry) return send_error(res, 404, "unknown session");
    std::unique_lock lock(entry->mu, std::try_to_lock);
    if (!lock.owns_lock()) return send_error(res, 409, "session is busy");
    f(entry->session);
  }

  std::string new_token() {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string token;
    for (int i = 0; i < 32; ++i) token += kHex[rng_() & 15];
    return token;
  }

  void create(const httplib::Request& req, httplib::Response& res) {
    Workbook wb;
    try {
      wb = parse_workbook(req.body);
    } catch (const WorkbookError& e) {
      return send(res, 400, workbook_error_json(e));
    }
    std::lock_guard lock(mu_);
    std::string token = new_token();
    while (sessions_.count(token)) token = new_token();
    sessions_.emplace(token, std::make_shared<Entry>(std::move(wb)));
    send(res, 200, Json{{"session", token}});
  }

  void edit(const httplib::Request& req, httplib::Response& res) {
    CellRef ref;
    try {
      ref = parse_cell_ref(req.matches[1].str());
    } catch (const ParseError& e) {
      return send_error(res, 400, e.what());
    }
    Json body;
    try {
      body = Json::parse(req.body);
    } catch (const Json::parse_error&) {
      return send_error(res, 400, "malformed JSON body");
    }
    if (!body.is_object() || !body.contains("input") || !body["input"].is_string()) {
      return send_error(res, 400, "body must be {\"input\": <text>}");
    }
    const std::string input = body["input"].get<std::string>();
    with_session(req, res, [&](SolveSession& s) {
      try {
        s.set_cell(ref, input);
      } catch (const CellError& e) {
        return send(res, 400,
                    Json{{"errors", Json::array({Json{{"cell", format_cell_ref(e.cell())},
                                                      {"kind", "ParseError"},
                                                      {"message", e.detail()},
                                                      {"position", e.position()}}})}});
      }
      const CellContent& content = s.workbook().content(ref);
      Json out{{"cell", format_cell_ref(ref)},
               {"input", s.workbook().input(ref)},
               {"kind", std::string(content_kind(content))}};
      if (const auto* f = std::get_if<Formula>(&content)) out["canonical"] = sscl::render(f->ast);
      send(res, 200, out);
    });
  }

  void solve(const httplib::Request& req, httplib::Response& res) {
    SolveOptions opts;
    if (!req.body.empty()) {
      Json body;
      try {
        body = Json::parse(req.body);
      } catch (const Json::parse_error&) {
        return send_error(res, 400, "malformed JSON body");
      }
      if (!body.is_object()) return send_error(res, 400, "body must be a JSON object");
      if (body.contains("limit")) {
        if (!body["limit"].is_number_unsigned()) return send_error(res, 400, "limit must be a non-negative integer");
        opts.limit = body["limit"].get<std::uint64_t>();
      }
      if (body.contains("budget")) {
        if (!body["budget"].is_number_unsigned()) return send_error(res, 400, "budget must be a non-negative integer");
        opts.node_budget = body["budget"].get<std::uint64_t>();
      }
    }
    if (!opts.limit) opts.limit = kDefaultSolutionCap;
    with_session(req, res, [&](SolveSession& s) {
      SolveReport r = s.solve(opts);
      if (r.status == SolveStatus::Error) {
        Json body = r.errors.empty() ? Json{{"error", r.error}} : errors_json(r.errors);
        body["report"] = report_json(r);
        return send(res, 400, body);
      }
      send(res, 200, report_json(r));
    });
  }

  void solution(const httplib::Request& req, httplib::Response& res) {
    std::size_t i = 0;
    try {
      i = std::stoull(req.matches[1].str());
    } catch (const std::exception&) {
      return send_error(res, 404, "solution index out of range");
    }
    with_session(req, res, [&](SolveSession& s) {
      try {
        s.goto_solution(i);
      } catch (const SolutionIndexError& e) {
        return send_error(res, 404, e.what());
      } catch (const fd::BudgetExceeded& e) {
        return send_error(res, 404, e.what());
      }
      send(res, 200, view_json(s));
    });
  }

  static constexpr std::uint64_t kDefaultSolutionCap = 10'000;

  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::mt19937_64 rng_;
};

/// Blocks serving the API on `port`.
inline bool serve(const std::string& host, int port) {
  httplib::Server server;
  Service service;
  service.register_routes(server);
  return server.listen(host, port);
}

}  // namespace csee::service
