#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "dlo/pipeline.hpp"

namespace dlo {

// HTTP API for interactive labeling sessions. Every JSON payload carries "version": 1.
//
//   POST /session               image bytes (or {"image_base64": ...}) -> id, boundary overlay, graph
//   POST /session/{id}/seeds    seed list -> stored seeds
//   POST /session/{id}/run      -> walks, splines, overlay
//   POST /session/{id}/accept   writes the result under <dataset_root>/<id>
//   GET  /session/{id}/export   -> seeds, walks, splines and masks
class AnnotationServer {
 public:
  AnnotationServer(PipelineConfig config, std::filesystem::path dataset_root);
  ~AnnotationServer();
  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  // Returns the bound port, or -1.
  int bind(const std::string& host, int port = 0);
  // Blocks until stop().
  bool serve();
  void stop();
  bool running() const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

}  // namespace dlo
