// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/rtserve/server.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <functional>
#include <list>
#include <map>
#include <mutex>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/write.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "flakelens/core/image_io.hpp"
#include "flakelens/quantify/morphology.hpp"

namespace flakelens::rtserve {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace fs = std::filesystem;
using tcp = asio::ip::tcp;
using nlohmann::json;

namespace {

constexpr const char* kBoundary = "flakelensframe";
constexpr std::size_t kSubscriberBacklog = 64;
constexpr auto kPollInterval = std::chrono::milliseconds(100);

/// One WebSocket client's ordered message queue.
struct Subscriber {
    std::mutex mutex;
    std::deque<std::shared_ptr<const std::string>> messages;
    bool overflowed = false;
    /// Called after every push; set before subscribing.
    std::function<void()> wake;
};

/// Latest published frame plus fan-out to WebSocket subscribers.
class FrameHub : public FrameSink {
public:
    explicit FrameHub(int jpeg_quality) : jpeg_quality_(jpeg_quality) {}

    void on_frame(const PublishedFrame& frame) override {
        auto f = std::make_shared<const PublishedFrame>(frame);
        std::vector<std::shared_ptr<Subscriber>> subs;
        {
            std::lock_guard lock(mutex_);
            latest_ = f;
            jpeg_.reset();
            subs = subscribers_;
        }
        cv_.notify_all();
        if (subs.empty()) return;
        auto msg = std::make_shared<const std::string>(message(*f).dump());
        for (const auto& s : subs) {
            {
                std::lock_guard lock(s->mutex);
                if (s->messages.size() >= kSubscriberBacklog) {
                    s->overflowed = true;
                } else {
                    s->messages.push_back(msg);
                }
            }
            s->wake();
        }
    }

    static json message(const PublishedFrame& f) {
        json j = frame_message(f, false);
        if (f.classes) {
            const auto m = quantify::area_fractions(f.detections, f.width, f.height, *f.classes);
            j["morphology"] = quantify::to_json(m);
        }
        return j;
    }

    std::shared_ptr<const PublishedFrame> latest() const {
        std::lock_guard lock(mutex_);
        return latest_;
    }

    /// Waits for a frame newer than `after`; nullptr on timeout.
    std::shared_ptr<const PublishedFrame> wait_newer(std::uint64_t after, std::chrono::milliseconds timeout) {
        std::unique_lock lock(mutex_);
        cv_.wait_for(lock, timeout, [&] { return latest_ && latest_->frame_id > after; });
        return latest_ && latest_->frame_id > after ? latest_ : nullptr;
    }

    /// JPEG of the latest frame, encoded once per frame.
    std::pair<std::shared_ptr<const PublishedFrame>, std::shared_ptr<const std::vector<std::uint8_t>>> latest_jpeg() {
        std::lock_guard lock(mutex_);
        if (!latest_) return {};
        if (!jpeg_) {
            jpeg_ = std::make_shared<const std::vector<std::uint8_t>>(core::encode_jpeg(*latest_->annotated, jpeg_quality_));
        }
        return {latest_, jpeg_};
    }

    void subscribe(std::shared_ptr<Subscriber> s) {
        std::lock_guard lock(mutex_);
        subscribers_.push_back(std::move(s));
    }

    void unsubscribe(const std::shared_ptr<Subscriber>& s) {
        std::lock_guard lock(mutex_);
        std::erase(subscribers_, s);
    }

    void wake_waiters() { cv_.notify_all(); }

private:
    int jpeg_quality_;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::shared_ptr<const PublishedFrame> latest_;
    std::shared_ptr<const std::vector<std::uint8_t>> jpeg_;
    std::vector<std::shared_ptr<Subscriber>> subscribers_;
};

using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

Response make_response(const Request& req, http::status status, std::string body,
                       std::string content_type = "application/json") {
    Response res{status, req.version()};
    res.set(http::field::server, "flakelens");
    res.set(http::field::content_type, content_type);
    res.set(http::field::access_control_allow_origin, "*");
    res.keep_alive(req.keep_alive());
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
}

Response json_response(const Request& req, http::status status, const json& j) {
    return make_response(req, status, j.dump());
}

Response error_response(const Request& req, http::status status, const std::string& message) {
    return json_response(req, status, {{"error", message}});
}

}  // namespace

struct Server::Impl {
    Impl(ServerOptions o, Pipeline& p, ConfigStore& c, const ModelRegistry& m)
        : options(std::move(o)), pipeline(p), config(c), models(m), hub(std::make_shared<FrameHub>(options.jpeg_quality)) {}

    ServerOptions options;
    Pipeline& pipeline;
    ConfigStore& config;
    const ModelRegistry& models;
    std::shared_ptr<FrameHub> hub;

    asio::io_context ioc;
    std::unique_ptr<tcp::acceptor> acceptor;
    std::thread accept_thread;
    std::atomic<bool> stopping{false};
    unsigned short bound_port = 0;

    std::mutex conn_mutex;
    std::uint64_t next_closer = 0;
    std::map<std::uint64_t, std::function<void()>> closers;
    struct Conn {
        std::thread thread;
        std::shared_ptr<std::atomic<bool>> done;
    };
    std::list<Conn> conns;

    std::mutex snapshot_mutex;

    void accept_loop() {
        while (!stopping) {
            // Each connection gets its own context so WebSocket sessions can run async I/O.
            auto conn_ioc = std::make_shared<asio::io_context>(1);
            tcp::socket socket(*conn_ioc);
            beast::error_code ec;
            acceptor->accept(socket, ec);
            if (ec || stopping) break;
            auto done = std::make_shared<std::atomic<bool>>(false);
            std::lock_guard lock(conn_mutex);
            reap_locked();
            conns.push_back({std::thread([this, conn_ioc, s = std::move(socket), done]() mutable {
                                 session(conn_ioc, std::move(s));
                                 *done = true;
                             }),
                             done});
        }
    }

    void reap_locked() {
        for (auto it = conns.begin(); it != conns.end();) {
            if (*it->done) {
                it->thread.join();
                it = conns.erase(it);
            } else {
                ++it;
            }
        }
    }

    /// Makes a connection interruptible by stop() while it lives.
    struct Registered {
        Impl& impl;
        std::uint64_t id;
        Registered(Impl& i, std::function<void()> closer) : impl(i) {
            std::lock_guard lock(impl.conn_mutex);
            id = impl.next_closer++;
            impl.closers.emplace(id, std::move(closer));
        }
        ~Registered() {
            std::lock_guard lock(impl.conn_mutex);
            impl.closers.erase(id);
        }
        Registered(const Registered&) = delete;
        Registered& operator=(const Registered&) = delete;
    };

    void session(const std::shared_ptr<asio::io_context>& conn_ioc, tcp::socket socket) {
        std::optional<Registered> reg;
        reg.emplace(*this, [&socket] {
            beast::error_code ec;
            socket.shutdown(tcp::socket::shutdown_both, ec);
        });
        beast::flat_buffer buffer;
        beast::error_code ec;
        while (!stopping) {
            Request req;
            http::read(socket, buffer, req, ec);
            if (ec) break;
            const std::string target(req.target());
            const std::string path = target.substr(0, target.find('?'));
            if (websocket::is_upgrade(req)) {
                if (path == "/detections") {
                    reg.reset();
                    ws_session(conn_ioc, std::move(socket), req);
                    return;
                }
                http::write(socket, error_response(req, http::status::not_found, "no WebSocket endpoint at " + path), ec);
                break;
            }
            if (path == "/stream" && req.method() == http::verb::get) {
                stream_session(socket, req);
                break;
            }
            Response res = handle(req, path);
            http::write(socket, res, ec);
            if (ec || !res.keep_alive()) break;
        }
        socket.shutdown(tcp::socket::shutdown_both, ec);
        socket.close(ec);
    }

    Response handle(const Request& req, const std::string& path) {
        const auto method = req.method();
        if (method == http::verb::options) {
            Response res = make_response(req, http::status::no_content, "");
            res.set(http::field::access_control_allow_methods, "GET, PUT, POST, OPTIONS");
            res.set(http::field::access_control_allow_headers, "Content-Type");
            return res;
        }
        auto allow = [&](const char* methods) {
            Response res = error_response(req, http::status::method_not_allowed, "method not allowed");
            res.set(http::field::allow, methods);
            return res;
        };
        try {
            if (path == "/stats") {
                if (method != http::verb::get) return allow("GET");
                return json_response(req, http::status::ok, stats_json());
            }
            if (path == "/config") {
                if (method == http::verb::get) return json_response(req, http::status::ok, to_json(*config.current()));
                if (method == http::verb::put) return put_config(req);
                return allow("GET, PUT");
            }
            if (path == "/snapshot") {
                if (method != http::verb::post) return allow("POST");
                return snapshot(req);
            }
            if (path == "/models") {
                if (method != http::verb::get) return allow("GET");
                return json_response(req, http::status::ok,
                                     {{"models", models.to_json()}, {"active", config.current()->model_id}});
            }
            if (path == "/stream" || path == "/detections") return allow("GET");
            if (path == "/") {
                return json_response(req, http::status::ok,
                                     {{"service", "flakelens"},
                                      {"endpoints", {"/stream", "/detections", "/stats", "/config", "/snapshot", "/models"}}});
            }
            return error_response(req, http::status::not_found, "no endpoint at " + path);
        } catch (const std::exception& e) {
            return error_response(req, http::status::internal_server_error, e.what());
        }
    }

    json stats_json() {
        json j = to_json(pipeline.stats());
        const auto f = hub->latest();
        if (f && f->classes) {
            const auto m = quantify::area_fractions(f->detections, f->width, f->height, *f->classes);
            j["morphology"] = quantify::to_json(m);
            j["frame_id"] = f->frame_id;
            j["detections"] = f->detections.size();
        } else {
            j["morphology"] = nullptr;
            j["detections"] = 0;
        }
        return j;
    }

    Response put_config(const Request& req) {
        json patch;
        try {
            patch = json::parse(req.body());
        } catch (const json::parse_error& e) {
            return error_response(req, http::status::bad_request, std::string("invalid JSON: ") + e.what());
        }
        auto result = config.update(patch);
        if (auto* errors = std::get_if<std::vector<FieldError>>(&result)) {
            json list = json::array();
            for (const auto& e : *errors) list.push_back({{"field", e.field}, {"message", e.message}});
            return json_response(req, http::status::unprocessable_entity, {{"errors", list}});
        }
        return json_response(req, http::status::ok, to_json(*std::get<std::shared_ptr<const LiveConfig>>(result)));
    }

    Response snapshot(const Request& req) {
        auto [frame, jpeg] = hub->latest_jpeg();
        if (!frame) return error_response(req, http::status::conflict, "no frame has been published yet");
        std::lock_guard lock(snapshot_mutex);
        fs::create_directories(options.snapshot_dir);
        const std::string stem = std::to_string(frame->frame_id);
        const fs::path jpg = options.snapshot_dir / (stem + ".jpg");
        const fs::path meta = options.snapshot_dir / (stem + ".json");
        {
            std::ofstream out(jpg, std::ios::binary);
            out.write(reinterpret_cast<const char*>(jpeg->data()), static_cast<std::streamsize>(jpeg->size()));
            if (!out) return error_response(req, http::status::internal_server_error, "cannot write " + jpg.string());
        }
        {
            std::ofstream out(meta);
            json j = frame_message(*frame, true);
            out << j.dump(2) << '\n';
            if (!out) return error_response(req, http::status::internal_server_error, "cannot write " + meta.string());
        }
        return json_response(req, http::status::ok,
                             {{"frame_id", frame->frame_id}, {"files", {jpg.filename().string(), meta.filename().string()}}});
    }

    void stream_session(tcp::socket& socket, const Request& req) {
        beast::error_code ec;
        std::string head = "HTTP/1.1 200 OK\r\nServer: flakelens\r\nAccess-Control-Allow-Origin: *\r\n"
                           "Cache-Control: no-cache\r\nConnection: close\r\n"
                           "Content-Type: multipart/x-mixed-replace; boundary=" +
                           std::string(kBoundary) + "\r\n\r\n";
        (void)req;
        asio::write(socket, asio::buffer(head), ec);
        std::uint64_t last = 0;
        while (!ec && !stopping) {
            if (!hub->wait_newer(last, kPollInterval)) continue;
            auto [frame, jpeg] = hub->latest_jpeg();
            if (!frame || frame->frame_id <= last) continue;
            last = frame->frame_id;
            const std::string part = "--" + std::string(kBoundary) +
                                     "\r\nContent-Type: image/jpeg\r\nContent-Length: " + std::to_string(jpeg->size()) +
                                     "\r\nX-Frame-Id: " + std::to_string(frame->frame_id) + "\r\n\r\n";
            const std::array<asio::const_buffer, 3> bufs{asio::buffer(part), asio::buffer(*jpeg), asio::buffer("\r\n", 2)};
            asio::write(socket, bufs, ec);
        }
    }

    void ws_session(const std::shared_ptr<asio::io_context>& conn_ioc, tcp::socket socket, const Request& req) {
        websocket::stream<tcp::socket> ws(std::move(socket));
        beast::error_code ec;
        ws.accept(req, ec);
        if (ec) return;
        ws.text(true);

        // Single-threaded on conn_ioc: one pending read (which answers the
        // client's close), at most one pending write, then our own close.
        bool writing = false, closing = false, finished = false;
        std::optional<websocket::close_reason> want_close;
        std::shared_ptr<const std::string> current;
        beast::flat_buffer inbox;
        std::function<void()> pump, read_next;
        auto sub = std::make_shared<Subscriber>();

        pump = [&] {
            if (writing || closing || finished) return;
            if (!want_close) {
                std::lock_guard lock(sub->mutex);
                if (sub->overflowed) {
                    want_close = websocket::close_reason(websocket::close_code::policy_error, "consumer too slow");
                } else if (!sub->messages.empty()) {
                    current = sub->messages.front();
                    sub->messages.pop_front();
                } else {
                    return;
                }
            }
            if (want_close) {
                closing = true;
                ws.async_close(*want_close, [](beast::error_code) {});
                return;
            }
            writing = true;
            ws.async_write(asio::buffer(*current), [&](beast::error_code e, std::size_t) {
                writing = false;
                if (!e) pump();
            });
        };
        read_next = [&] {
            ws.async_read(inbox, [&](beast::error_code e, std::size_t) {
                if (e) {
                    finished = true;
                    beast::error_code ignored;
                    ws.next_layer().close(ignored);
                    return;
                }
                inbox.consume(inbox.size());
                read_next();
            });
        };

        std::weak_ptr<asio::io_context> weak_ioc = conn_ioc;
        sub->wake = [weak_ioc, &pump] {
            if (auto c = weak_ioc.lock()) asio::post(*c, [&pump] { pump(); });
        };
        {
            Registered reg(*this, [weak_ioc, &ws, &want_close, &pump] {
                if (auto c = weak_ioc.lock()) {
                    asio::post(*c, [&] {
                        want_close = websocket::close_reason(websocket::close_code::going_away);
                        pump();
                        // Do not wait on an unresponsive peer.
                        beast::error_code ignored;
                        ws.next_layer().shutdown(tcp::socket::shutdown_both, ignored);
                    });
                }
            });
            hub->subscribe(sub);
            read_next();
            conn_ioc->run();
            hub->unsubscribe(sub);
        }
        // Frames published after unsubscribe may still post; drop those handlers.
        conn_ioc->stop();
    }
};

Server::Server(ServerOptions options, Pipeline& pipeline, ConfigStore& config, const ModelRegistry& models)
    : impl_(std::make_unique<Impl>(std::move(options), pipeline, config, models)) {
    pipeline.add_sink(impl_->hub);
}

Server::~Server() {
    stop();
    impl_->pipeline.remove_sink(impl_->hub);
}

void Server::start() {
    auto& im = *impl_;
    if (im.acceptor) throw std::logic_error("server already started");
    beast::error_code ec;
    const auto addr = asio::ip::make_address(im.options.address, ec);
    if (ec) throw std::runtime_error("invalid bind address '" + im.options.address + "'");
    auto acceptor = std::make_unique<tcp::acceptor>(im.ioc);
    const tcp::endpoint ep(addr, im.options.port);
    acceptor->open(ep.protocol(), ec);
    if (!ec) acceptor->set_option(asio::socket_base::reuse_address(true), ec);
    if (!ec) acceptor->bind(ep, ec);
    if (!ec) acceptor->listen(asio::socket_base::max_listen_connections, ec);
    if (ec) {
        throw std::runtime_error("cannot listen on " + im.options.address + ":" + std::to_string(im.options.port) +
                                 ": " + ec.message());
    }
    im.bound_port = acceptor->local_endpoint().port();
    im.acceptor = std::move(acceptor);
    im.accept_thread = std::thread([&im] { im.accept_loop(); });
}

void Server::stop() {
    auto& im = *impl_;
    if (!im.acceptor || im.stopping.exchange(true)) return;
    beast::error_code ec;
    // Unblock accept() with a throwaway connection, then close the listener.
    {
        tcp::socket poke(im.ioc);
        poke.connect(tcp::endpoint(asio::ip::make_address("127.0.0.1"), im.bound_port), ec);
    }
    im.accept_thread.join();
    im.acceptor->close(ec);
    {
        std::lock_guard lock(im.conn_mutex);
        for (auto& [id, close] : im.closers) close();
    }
    im.hub->wake_waiters();
    std::list<Impl::Conn> conns;
    {
        std::lock_guard lock(im.conn_mutex);
        conns.swap(im.conns);
    }
    for (auto& c : conns) c.thread.join();
}

unsigned short Server::port() const noexcept { return impl_->bound_port; }

}  // namespace flakelens::rtserve
