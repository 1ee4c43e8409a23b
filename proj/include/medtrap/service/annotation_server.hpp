/// @file annotation_server.hpp
/// @brief HTTP JSON API over an AnnotationStore.
///
///     GET  /tasks/next?annotator=ID   -> {"task": {...}|null, "done": n, "total": n}
///     POST /tasks/{id}/rating         {"annotator": ID, "value": 1..5}
///     POST /tasks/{id}/preference     {"annotator": ID, "choice": "A"|"B"}
///     GET  /export                    -> text/csv item_id,annotator_id,task_kind,value
///
/// Bad input answers 400 with {"error": "..."}; unknown task ids answer 404.

#pragma once

#include <memory>
#include <string>

#include "medtrap/service/annotation.hpp"

namespace medtrap::service {

class AnnotationServer {
public:
    explicit AnnotationServer(AnnotationStore& store);
    ~AnnotationServer();

    AnnotationServer(const AnnotationServer&) = delete;
    AnnotationServer& operator=(const AnnotationServer&) = delete;

    /// Binds to host:port (port 0 picks a free one) and returns the bound port.
    /// Throws std::runtime_error when binding fails.
    int bind(const std::string& host, int port);
    /// Serves until stop() is called.
    void listen();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace medtrap::service
