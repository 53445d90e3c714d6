#pragma once

#include "t2c/api.hpp"

#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

namespace httplib {
class Server;
}

namespace t2c {

/// Least-recently-used table cache keyed by table id.
class TableCache {
public:
    explicit TableCache(std::size_t capacity);
    void put(const std::string& id, TablePtr table);
    TablePtr get(const std::string& id);  // nullptr when absent
    std::size_t size() const;

private:
    mutable std::mutex mu_;
    std::size_t capacity_;
    std::list<std::pair<std::string, TablePtr>> order_;  // front = most recent
    std::unordered_map<std::string, decltype(order_)::iterator> index_;
};

struct ServiceOptions {
    std::size_t cache_capacity = 256;
    std::string allow_origin = "*";
    std::string model_path;  // used by POST /reload
};

/// HTTP front end over an immutable model snapshot.
///   GET  /health     {status, modelVersion}
///   POST /tables     CSV or table JSON -> {tableId, fields}
///   POST /recommend  {tableId | table, constraints?, top?} -> {recommendations}
///   POST /embed      {tableId | table} -> {tableId, fields:[{index,name,type,vector}]}
///   POST /reload     reloads the model file given at startup
class Service {
public:
    Service(ModelPtr model, std::string version, ServiceOptions options = {});
    ~Service();

    /// Swaps the model; requests already running finish on the old snapshot.
    void set_model(ModelPtr model, std::string version);
    std::pair<ModelPtr, std::string> snapshot() const;

    bool listen(const std::string& host, int port);
    /// Binds an ephemeral port and returns it (or -1); serve with `listen_after_bind`.
    int bind_any_port(const std::string& host);
    bool listen_after_bind();
    void stop();
    bool running() const;

    TableCache& tables() { return cache_; }

private:
    void routes();

    mutable std::mutex model_mu_;
    ModelPtr model_;
    std::string version_;
    ServiceOptions options_;
    TableCache cache_;
    std::unique_ptr<httplib::Server> server_;
};

/// Version label of a model file: its size and content hash.
std::string model_version(const std::string& path);

}  // namespace t2c
