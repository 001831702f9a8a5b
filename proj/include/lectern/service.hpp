#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lectern/index.hpp"

namespace httplib {
class Server;
}

namespace lectern {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string index_path;
  /// Directory of <lecture_id>.txt textbooks, one paragraph per line.
  std::string textbooks_dir;
  std::string media_base;
  std::string static_dir;
  std::size_t top_n = 3;
  std::size_t pool_size = kDefaultPoolSize;

  /// LECTERN_INDEX, LECTERN_PORT, LECTERN_HOST, LECTERN_TEXTBOOKS, LECTERN_MEDIA
  /// fill fields that are still at their defaults.
  void apply_environment();
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Read-only request handlers over an immutable index. Handlers are const and
/// safe to call concurrently.
class Service {
 public:
  Service(InvertedIndex index, std::map<std::string, std::vector<std::string>> textbooks,
          ServiceConfig config);

  /// Loads the index and textbooks named by the config; throws on failure.
  static Service from_config(const ServiceConfig& config);

  HttpResponse health() const;
  HttpResponse lectures() const;
  HttpResponse textbook(std::string_view lecture_id) const;
  HttpResponse units(std::string_view lecture_id, std::string_view from, std::string_view to) const;
  /// Body: {"text", "top_n"?, "pool_size"?, "lectures"?: [...], "format"?: "json"|"tsv"}.
  /// "tsv" returns the same bytes as the CLI query command.
  HttpResponse query(std::string_view body) const;

  void mount(httplib::Server& server) const;

  const InvertedIndex& index() const { return index_; }
  const ServiceConfig& config() const { return config_; }

 private:
  InvertedIndex index_;
  std::map<std::string, std::vector<std::string>> textbooks_;
  ServiceConfig config_;
};

HttpResponse error_response(int status, std::string_view code, std::string_view message);

std::map<std::string, std::vector<std::string>> load_textbooks(const std::string& dir);

/// Blocks until the server stops.
void run_service(const ServiceConfig& config);

}  // namespace lectern
