#include "lectern/service.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "lectern/error.hpp"
#include "lectern/io.hpp"
#include "lectern/query_format.hpp"

namespace lectern {

using nlohmann::json;

void ServiceConfig::apply_environment() {
  auto env = [](const char* name) -> const char* {
    const char* v = std::getenv(name);
    return v && *v ? v : nullptr;
  };
  if (index_path.empty()) {
    if (auto v = env("LECTERN_INDEX")) index_path = v;
  }
  if (port == ServiceConfig{}.port) {
    if (auto v = env("LECTERN_PORT")) port = std::atoi(v);
  }
  if (host == ServiceConfig{}.host) {
    if (auto v = env("LECTERN_HOST")) host = v;
  }
  if (textbooks_dir.empty()) {
    if (auto v = env("LECTERN_TEXTBOOKS")) textbooks_dir = v;
  }
  if (media_base.empty()) {
    if (auto v = env("LECTERN_MEDIA")) media_base = v;
  }
}

HttpResponse error_response(int status, std::string_view code, std::string_view message) {
  return {status, "application/json", json{{"code", code}, {"message", message}}.dump()};
}

std::map<std::string, std::vector<std::string>> load_textbooks(const std::string& dir) {
  namespace fs = std::filesystem;
  std::map<std::string, std::vector<std::string>> out;
  if (dir.empty()) return out;
  if (!fs::is_directory(dir)) throw IoError("textbook directory not found: " + dir);
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    auto& paras = out[entry.path().stem().string()];
    io::for_each_line(io::read_file(entry.path().string()), [&](std::size_t, std::string_view line) {
      if (!line.empty()) paras.emplace_back(line);
    });
  }
  return out;
}

Service::Service(InvertedIndex index, std::map<std::string, std::vector<std::string>> textbooks,
                 ServiceConfig config)
    : index_(std::move(index)), textbooks_(std::move(textbooks)), config_(std::move(config)) {}

Service Service::from_config(const ServiceConfig& config) {
  if (config.index_path.empty()) throw ValidationError("no index path configured (--index or LECTERN_INDEX)");
  return Service(load_index(config.index_path), load_textbooks(config.textbooks_dir), config);
}

HttpResponse Service::health() const { return {200, "text/plain", "ok"}; }

HttpResponse Service::lectures() const {
  json list = json::array();
  for (std::uint32_t i = 0; i < index_.lectures().size(); ++i) {
    const auto& name = index_.lectures()[i];
    const auto units = index_.units(i);
    std::size_t passages = 0;
    for (const auto& p : index_.passages()) passages += p.lecture == i;
    auto tb = textbooks_.find(name);
    json item = {{"id", name},
                 {"units", units.size()},
                 {"passages", passages},
                 {"paragraphs", tb == textbooks_.end() ? 0 : tb->second.size()}};
    if (!units.empty()) {
      item["start_ms"] = units.front().start_ms;
      item["end_ms"] = units.back().end_ms;
    }
    list.push_back(std::move(item));
  }
  return {200, "application/json", json{{"lectures", list}}.dump()};
}

HttpResponse Service::textbook(std::string_view lecture_id) const {
  if (!index_.lecture_index(lecture_id)) return error_response(404, "not_found", "unknown lecture");
  auto tb = textbooks_.find(std::string(lecture_id));
  if (tb == textbooks_.end()) return error_response(404, "not_found", "no textbook for lecture");
  json paras = json::array();
  for (std::size_t i = 0; i < tb->second.size(); ++i) {
    paras.push_back({{"id", "p" + std::to_string(i + 1)}, {"text", tb->second[i]}});
  }
  return {200, "application/json", json{{"lecture_id", lecture_id}, {"paragraphs", paras}}.dump()};
}

namespace {

std::optional<std::uint32_t> parse_bound(std::string_view s) {
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

HttpResponse Service::units(std::string_view lecture_id, std::string_view from, std::string_view to) const {
  auto lecture = index_.lecture_index(lecture_id);
  if (!lecture) return error_response(404, "not_found", "unknown lecture");
  std::uint32_t lo = 0;
  std::uint32_t hi = std::numeric_limits<std::uint32_t>::max();
  if (!from.empty()) {
    auto v = parse_bound(from);
    if (!v) return error_response(400, "bad_request", "from must be a unit id");
    lo = *v;
  }
  if (!to.empty()) {
    auto v = parse_bound(to);
    if (!v) return error_response(400, "bad_request", "to must be a unit id");
    hi = *v;
  }
  json list = json::array();
  for (const auto& u : index_.units(*lecture)) {
    if (u.unit_id < lo || u.unit_id >= hi) continue;
    list.push_back({{"unit_id", u.unit_id}, {"start_ms", u.start_ms}, {"end_ms", u.end_ms}, {"text", u.text}});
  }
  return {200, "application/json", json{{"lecture_id", lecture_id}, {"units", list}}.dump()};
}

HttpResponse Service::query(std::string_view body) const {
  json request;
  try {
    request = json::parse(body);
  } catch (const json::parse_error& e) {
    return error_response(400, "bad_request", std::string("invalid JSON: ") + e.what());
  }
  if (!request.is_object() || !request.contains("text") || !request["text"].is_string()) {
    return error_response(400, "bad_request", "body must be an object with a string 'text'");
  }
  auto positive = [&](const char* key, std::size_t fallback) -> std::optional<std::size_t> {
    if (!request.contains(key)) return fallback;
    const auto& v = request[key];
    if (!v.is_number_unsigned() || v.get<std::size_t>() == 0) return std::nullopt;
    return v.get<std::size_t>();
  };
  const auto top_n = positive("top_n", config_.top_n);
  const auto pool = positive("pool_size", config_.pool_size);
  if (!top_n || !pool) return error_response(400, "bad_request", "top_n and pool_size must be positive integers");
  LectureFilter filter;
  if (request.contains("lectures")) {
    const auto& l = request["lectures"];
    if (!l.is_array()) return error_response(400, "bad_request", "lectures must be an array of ids");
    for (const auto& id : l) {
      if (!id.is_string()) return error_response(400, "bad_request", "lectures must be an array of ids");
      filter.insert(id.get<std::string>());
    }
  }
  const auto format = request.value("format", std::string("json"));
  if (format != "json" && format != "tsv") return error_response(400, "bad_request", "format must be json or tsv");

  const auto groups = query_top_n(index_, request["text"].get<std::string>(), *top_n, *pool, filter);
  if (format == "tsv") return {200, "text/tab-separated-values", format_groups_tsv(groups)};
  return {200, "application/json", groups_to_json(index_, groups, config_.media_base).dump()};
}

void Service::mount(httplib::Server& server) const {
  auto send = [](httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get("/health", [this, send](const httplib::Request&, httplib::Response& res) { send(res, health()); });
  server.Get("/lectures", [this, send](const httplib::Request&, httplib::Response& res) { send(res, lectures()); });
  server.Get(R"(/lectures/([^/]+)/textbook)", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, textbook(req.matches[1].str()));
  });
  server.Get(R"(/lectures/([^/]+)/units)", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, units(req.matches[1].str(), req.get_param_value("from"), req.get_param_value("to")));
  });
  server.Get(R"(/lectures/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    const auto id = req.matches[1].str();
    if (!index_.lecture_index(id)) return send(res, error_response(404, "not_found", "unknown lecture"));
    auto all = json::parse(lectures().body);
    for (const auto& item : all["lectures"]) {
      if (item["id"] == id) return send(res, {200, "application/json", item.dump()});
    }
  });
  server.Post("/query", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, query(req.body));
  });
  if (!config_.static_dir.empty()) server.set_mount_point("/", config_.static_dir);
  server.set_error_handler([send](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) send(res, error_response(res.status, "http_error", httplib::status_message(res.status)));
  });
  server.set_exception_handler([send](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    send(res, error_response(500, "internal", what));
  });
}

void run_service(const ServiceConfig& config) {
  const auto service = Service::from_config(config);
  httplib::Server server;
  service.mount(server);
  std::cerr << "lectern: serving " << service.index().corpus_size() << " passages on " << config.host << ':'
            << config.port << '\n';
  if (!server.listen(config.host, config.port)) {
    throw IoError("cannot listen on " + config.host + ":" + std::to_string(config.port));
  }
}

}  // namespace lectern
