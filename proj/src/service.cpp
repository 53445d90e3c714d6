#include "t2c/service.hpp"

#include "t2c/error.hpp"
#include "t2c/model_io.hpp"

#include <httplib.h>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace t2c {

using nlohmann::json;

TableCache::TableCache(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw Error(ErrorCode::InvalidArgument, "table cache capacity must be >= 1");
}

void TableCache::put(const std::string& id, TablePtr table) {
    std::lock_guard lock(mu_);
    if (auto it = index_.find(id); it != index_.end()) {
        it->second->second = std::move(table);
        order_.splice(order_.begin(), order_, it->second);
        return;
    }
    order_.emplace_front(id, std::move(table));
    index_[id] = order_.begin();
    if (order_.size() > capacity_) {
        index_.erase(order_.back().first);
        order_.pop_back();
    }
}

TablePtr TableCache::get(const std::string& id) {
    std::lock_guard lock(mu_);
    auto it = index_.find(id);
    if (it == index_.end()) return nullptr;
    order_.splice(order_.begin(), order_, it->second);
    return it->second->second;
}

std::size_t TableCache::size() const {
    std::lock_guard lock(mu_);
    return order_.size();
}

std::string model_version(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open model '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    char out[40];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return out;
}

namespace {

int status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotFound: return 404;
        case ErrorCode::UnsatisfiableConstraints:
        case ErrorCode::NoLegalSeed: return 422;
        case ErrorCode::IoError: return 500;
        default: return 400;
    }
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
    send_json(res, status, {{"error", {{"code", code}, {"message", message}}}});
}

json parse_body(const httplib::Request& req) {
    try {
        json j = json::parse(req.body);
        if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("invalid JSON body: ") + e.what());
    }
}

std::string table_id_for(const std::string& body) {
    char out[24];
    std::snprintf(out, sizeof out, "t%016llx", static_cast<unsigned long long>(fnv1a64(body)));
    return out;
}

}  // namespace

Service::Service(ModelPtr model, std::string version, ServiceOptions options)
    : model_(std::move(model)), version_(std::move(version)), options_(std::move(options)),
      cache_(options_.cache_capacity), server_(std::make_unique<httplib::Server>()) {
    if (!model_) throw Error(ErrorCode::InvalidArgument, "service needs a model");
    routes();
}

Service::~Service() { stop(); }

void Service::set_model(ModelPtr model, std::string version) {
    if (!model) throw Error(ErrorCode::InvalidArgument, "service needs a model");
    std::lock_guard lock(model_mu_);
    model_ = std::move(model);
    version_ = std::move(version);
}

std::pair<ModelPtr, std::string> Service::snapshot() const {
    std::lock_guard lock(model_mu_);
    return {model_, version_};
}

bool Service::listen(const std::string& host, int port) { return server_->listen(host, port); }
int Service::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }
bool Service::listen_after_bind() { return server_->listen_after_bind(); }
void Service::stop() {
    if (server_) server_->stop();
}
bool Service::running() const { return server_->is_running(); }

void Service::routes() {
    auto& s = *server_;
    s.set_default_headers({{"Access-Control-Allow-Origin", options_.allow_origin},
                           {"Access-Control-Allow-Headers", "Content-Type"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    s.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    // Wraps a handler so module errors map to status codes and nothing else leaks.
    auto guarded = [](auto fn) {
        return [fn](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const Error& e) {
                const int status = status_for(e.code());
                send_error(res, status, error_code_name(e.code()), status == 500 ? "internal error" : e.what());
            } catch (...) {
                send_error(res, 500, "Internal", "internal error");
            }
        };
    };

    // Resolves {tableId} from the cache or an inline {table}.
    auto resolve = [this](const json& body) -> TablePtr {
        if (const auto id = body.find("tableId"); id != body.end() && !id->is_null()) {
            if (!id->is_string()) throw Error(ErrorCode::InvalidArgument, "tableId must be a string");
            TablePtr t = cache_.get(id->get<std::string>());
            if (!t) throw Error(ErrorCode::NotFound, "unknown tableId '" + id->get<std::string>() + "'");
            return t;
        }
        if (const auto t = body.find("table"); t != body.end()) {
            const std::string text = t->is_string() ? t->get<std::string>() : t->dump();
            return std::make_shared<const Table>(parse_table_body(text, table_id_for(text)));
        }
        throw Error(ErrorCode::InvalidArgument, "request needs 'tableId' or 'table'");
    };

    s.Get("/health", guarded([this](const httplib::Request&, httplib::Response& res) {
              send_json(res, 200, {{"status", "ok"}, {"modelVersion", snapshot().second}});
          }));

    s.Post("/tables", guarded([this](const httplib::Request& req, httplib::Response& res) {
               const std::string id = table_id_for(req.body);
               auto table = std::make_shared<const Table>(parse_table_body(req.body, id));
               cache_.put(id, table);
               send_json(res, 201, table_summary_json(id, *table));
           }));

    s.Post("/recommend", guarded([this, resolve](const httplib::Request& req, httplib::Response& res) {
               const json body = parse_body(req);
               RecommendQuery q;
               if (const auto c = body.find("constraints"); c != body.end()) parse_constraints(*c, q);
               if (const auto top = body.find("top"); top != body.end() && !top->is_null()) {
                   if (!top->is_number_integer() || top->get<long long>() < 1)
                       throw Error(ErrorCode::InvalidArgument, "top must be a positive integer");
                   q.top = top->get<std::size_t>();
               }
               const TablePtr table = resolve(body);
               const ModelPtr model = snapshot().first;
               send_json(res, 200, recommend_json(*model, *table, q));
           }));

    s.Post("/embed", guarded([this, resolve](const httplib::Request& req, httplib::Response& res) {
               const TablePtr table = resolve(parse_body(req));
               const auto vectors = field_embeddings(*snapshot().first, *table);
               json out = table_summary_json(table->id(), *table);
               for (std::size_t i = 0; i < vectors.size(); ++i) out["fields"][i]["vector"] = vectors[i];
               send_json(res, 200, out);
           }));

    s.Post("/reload", guarded([this](const httplib::Request&, httplib::Response& res) {
               if (options_.model_path.empty())
                   throw Error(ErrorCode::InvalidArgument, "service was started without a model path");
               ModelPtr m = load_model_file(options_.model_path);
               set_model(std::move(m), model_version(options_.model_path));
               send_json(res, 200, {{"status", "reloaded"}, {"modelVersion", snapshot().second}});
           }));
}

}  // namespace t2c
