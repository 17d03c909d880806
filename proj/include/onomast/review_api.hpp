#pragma once

#include <functional>
#include <map>
#include <string>

#include <json.hpp>

#include "onomast/namestore.hpp"

namespace httplib {
class Server;
}

namespace onomast {

struct ApiRequest {
  std::string method;  // "GET" or "POST"
  std::string path;    // without query string
  std::map<std::string, std::string> query;
  std::string body;
  std::string reviewer;  // X-Reviewer header, may be empty
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

/// Review workflow endpoints over a NameStore:
///   GET  /queue?limit&offset
///   POST /queue/{id}/decision   {"confirm": bool}
///   GET  /person/{id}
///   POST /person/{id}/split     {"variant_subset": [surface, ...]}
/// Every mutation is exactly one store transaction.
class ReviewApi {
 public:
  using Clock = std::function<std::string()>;

  explicit ReviewApi(NameStore& store, Clock clock = {});

  ApiResponse handle(const ApiRequest& request);

  /// Registers the endpoints on `server`.
  void mount(httplib::Server& server);

  static constexpr int kDefaultLimit = 100;
  static constexpr int kMaxLimit = 1000;

 private:
  ApiResponse get_queue(const ApiRequest& request);
  ApiResponse post_decision(std::int64_t candidate_id, const ApiRequest& request);
  ApiResponse get_person(PersonId id);
  ApiResponse post_split(PersonId id, const ApiRequest& request);

  NameStore& store_;
  Clock clock_;
};

/// Wire form of a queued merge candidate.
nlohmann::json queue_item_json(const MergeCandidate& c, const StoreState& state);

/// Current UTC time as `YYYY-MM-DDTHH:MM:SSZ`.
std::string utc_now();

}  // namespace onomast
