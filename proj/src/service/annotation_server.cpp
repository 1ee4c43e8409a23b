/// @file annotation_server.cpp

#include "medtrap/service/annotation_server.hpp"

#include <httplib.h>

#include "medtrap/core/types.hpp"

namespace medtrap::service {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
    auto j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ValidationError("body: expected a JSON object");
    return j;
}

std::string annotator_of(const json& body) {
    if (!body.contains("annotator") || !body.at("annotator").is_string()) {
        throw ValidationError("annotator: required string field");
    }
    return body.at("annotator").get<std::string>();
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const UnknownTaskError& e) {
        send_json(res, 404, {{"error", e.what()}});
    } catch (const ValidationError& e) {
        send_json(res, 400, {{"error", e.what()}});
    } catch (const std::exception& e) {
        send_json(res, 500, {{"error", e.what()}});
    }
}

}  // namespace

struct AnnotationServer::Impl {
    explicit Impl(AnnotationStore& s) : store(s) {}
    AnnotationStore& store;
    httplib::Server server;
};

AnnotationServer::AnnotationServer(AnnotationStore& store) : impl_(std::make_unique<Impl>(store)) {
    auto& svr = impl_->server;
    auto& st = impl_->store;
    svr.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                             {"Access-Control-Allow-Headers", "Content-Type"},
                             {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    svr.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    svr.Get("/tasks/next", [&st](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto n = st.next_task(req.get_param_value("annotator"));
            send_json(res, 200,
                      {{"task", n.task ? to_json(*n.task) : json(nullptr)}, {"done", n.done}, {"total", n.total}});
        });
    });

    svr.Post(R"(/tasks/([^/]+)/rating)", [&st](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto body = parse_body(req);
            const auto annotator = annotator_of(body);
            if (!body.contains("value") || !body.at("value").is_number_integer()) {
                throw ValidationError("value: rating must be an integer from 1 to 5");
            }
            const auto v = body.at("value").get<long long>();
            if (v < 1 || v > 5) throw ValidationError("value: rating must be an integer from 1 to 5");
            const auto e = st.submit_rating(req.matches[1].str(), annotator, static_cast<int>(v));
            send_json(res, 200, {{"stored", to_json(e)}});
        });
    });

    svr.Post(R"(/tasks/([^/]+)/preference)", [&st](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto body = parse_body(req);
            const auto annotator = annotator_of(body);
            if (!body.contains("choice") || !body.at("choice").is_string()) {
                throw ValidationError("choice: must be \"A\" or \"B\"");
            }
            const auto e = st.submit_preference(req.matches[1].str(), annotator, body.at("choice").get<std::string>());
            send_json(res, 200, {{"stored", to_json(e)}});
        });
    });

    svr.Get("/export", [&st](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] {
            res.status = 200;
            res.set_content(st.export_csv(), "text/csv");
        });
    });
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int p = impl_->server.bind_to_any_port(host);
        if (p <= 0) throw std::runtime_error("annotation server: cannot bind " + host);
        return p;
    }
    if (!impl_->server.bind_to_port(host, port)) {
        throw std::runtime_error("annotation server: cannot bind " + host + ":" + std::to_string(port));
    }
    return port;
}

void AnnotationServer::listen() { impl_->server.listen_after_bind(); }

void AnnotationServer::stop() {
    if (impl_) impl_->server.stop();
}

void AnnotationServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace medtrap::service
