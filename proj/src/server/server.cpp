#include "dlo/server.hpp"

#include <atomic>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>

#include <httplib.h>

#include "dlo/image_io.hpp"

namespace dlo {
namespace {

struct Session {
  std::mutex mutex;
  Image image;
  Oversegmentation stages;
  std::vector<Point2> seed_points;
  std::optional<PipelineOutput> output;
};

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::insufficient_seeds:
    case ErrorCode::no_walk_closed: return 422;
    case ErrorCode::io: return 500;
    default: return 400;
  }
}

void reply(httplib::Response& res, int status, nlohmann::json body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  reply(res, status, {{"version", 1}, {"error", {{"code", code}, {"message", message}}}});
}

std::string error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::bad_image: return "bad_image";
    case ErrorCode::insufficient_seeds: return "insufficient_seeds";
    case ErrorCode::no_walk_closed: return "no_walk_closed";
    case ErrorCode::invalid_config: return "invalid_config";
    case ErrorCode::invalid_seed: return "invalid_seed";
    case ErrorCode::io: return "io";
  }
  return "error";
}

std::string png_base64(const Image& image) {
  const std::vector<std::uint8_t> png = encode_png(image);
  return base64_encode(png);
}

std::string png_base64(const Mask& mask) {
  const std::vector<std::uint8_t> png = encode_mask_png(mask);
  return base64_encode(png);
}

}  // namespace

struct AnnotationServer::State {
  PipelineConfig config;
  std::filesystem::path dataset_root;
  httplib::Server http;
  std::mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::mt19937_64 id_source{std::random_device{}()};
  std::atomic<bool> bound{false};

  std::string new_id() {
    std::ostringstream out;
    out << std::hex << id_source();
    return out.str();
  }

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard lock(sessions_mutex);
    auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }
};

AnnotationServer::AnnotationServer(PipelineConfig config, std::filesystem::path dataset_root)
    : state_(std::make_unique<State>()) {
  config.validate();
  state_->config = std::move(config);
  state_->dataset_root = std::move(dataset_root);
  State& st = *state_;

  // Wraps a handler so library errors become JSON error replies.
  const auto guarded = [](auto handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(req, res);
      } catch (const Error& e) {
        reply_error(res, http_status(e.code()), error_name(e.code()), e.what());
      } catch (const nlohmann::json::exception& e) {
        reply_error(res, 400, "invalid_argument", e.what());
      }
    };
  };
  // Wraps a per-session handler: 404 for unknown ids, session lock held during the call.
  const auto with_session = [&st, guarded](auto handler) {
    return guarded([&st, handler](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      std::shared_ptr<Session> session = st.find(id);
      if (!session) return reply_error(res, 404, "not_found", "unknown session " + id);
      std::lock_guard lock(session->mutex);
      handler(req, res, id, *session);
    });
  };

  st.http.Post("/session", guarded([&st](const httplib::Request& req, httplib::Response& res) {
    auto session = std::make_shared<Session>();
    if (req.get_header_value("Content-Type").starts_with("application/json")) {
      const nlohmann::json doc = nlohmann::json::parse(req.body);
      const std::vector<std::uint8_t> bytes = base64_decode(doc.at("image_base64").get<std::string>());
      session->image = decode_image(bytes);
    } else {
      const auto* data = reinterpret_cast<const std::uint8_t*>(req.body.data());
      session->image = decode_image({data, req.body.size()});
    }
    session->stages = oversegment(session->image, st.config);
    nlohmann::json body = {
        {"version", 1},
        {"width", session->image.width()},
        {"height", session->image.height()},
        {"boundary_overlay_png_base64", png_base64(render_boundaries(session->image, session->stages.superpixels))},
        {"graph", graph_to_json(session->stages.graph)},
    };
    std::string id;
    {
      std::lock_guard lock(st.sessions_mutex);
      do id = st.new_id();
      while (st.sessions.contains(id));
      st.sessions.emplace(id, session);
    }
    body["session_id"] = id;
    reply(res, 201, std::move(body));
  }));

  st.http.Post(R"(/session/([0-9a-f]+)/seeds)",
               with_session([](const httplib::Request& req, httplib::Response& res, const std::string&, Session& s) {
                 std::vector<Point2> points = seed_points_from_json(nlohmann::json::parse(req.body));
                 std::vector<Seed> seeds;
                 for (std::size_t i = 0; i < points.size(); ++i) {
                   seeds.push_back(make_seed(static_cast<int>(i), s.stages.superpixels, points[i]));
                 }
                 s.seed_points = std::move(points);
                 s.output.reset();
                 reply(res, 200, seeds_to_json(seeds));
               }));

  st.http.Post(R"(/session/([0-9a-f]+)/run)",
               with_session([&st](const httplib::Request&, httplib::Response& res, const std::string&, Session& s) {
                 s.output = run_walk_stage(s.image, s.stages, s.seed_points, st.config);
                 const PipelineOutput& out = *s.output;
                 reply(res, 200,
                       {{"version", 1},
                        {"walks", walks_to_json(out.walks.surviving, out.graph, st.config.walker)},
                        {"splines", splines_to_json(out.segmentation.splines, st.config.spline.sample_gap_px)},
                        {"seeds_without_closed_walk", out.walks.seeds_without_closed_walk},
                        {"overlay_png_base64", png_base64(render_overlay(s.image, out))}});
               }));

  st.http.Post(R"(/session/([0-9a-f]+)/accept)",
               with_session([&st](const httplib::Request&, httplib::Response& res, const std::string& id, Session& s) {
                 if (!s.output) return reply_error(res, 409, "not_run", "run the session before accepting");
                 const std::filesystem::path dir = st.dataset_root / id;
                 write_dataset_sample(dir, s.image, *s.output, st.config);
                 reply(res, 200, {{"version", 1}, {"path", dir.string()}});
               }));

  st.http.Get(R"(/session/([0-9a-f]+)/export)",
              with_session([&st](const httplib::Request&, httplib::Response& res, const std::string&, Session& s) {
                if (!s.output) return reply_error(res, 409, "not_run", "run the session before exporting");
                const PipelineOutput& out = *s.output;
                nlohmann::json masks = nlohmann::json::array();
                for (const Mask& m : out.segmentation.object_masks) masks.push_back(png_base64(m));
                reply(res, 200,
                      {{"version", 1},
                       {"seeds", seeds_to_json(out.seeds)},
                       {"walks", walks_to_json(out.walks.surviving, out.graph, st.config.walker)},
                       {"splines", splines_to_json(out.segmentation.splines, st.config.spline.sample_gap_px)},
                       {"masks_png_base64", std::move(masks)},
                       {"union_mask_png_base64", png_base64(out.segmentation.union_mask)}});
              }));
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? state_->http.bind_to_any_port(host) : (state_->http.bind_to_port(host, port) ? port : -1);
  state_->bound = bound > 0;
  return bound;
}

bool AnnotationServer::serve() { return state_->bound && state_->http.listen_after_bind(); }

void AnnotationServer::stop() { state_->http.stop(); }

bool AnnotationServer::running() const { return state_->http.is_running(); }

}  // namespace dlo
