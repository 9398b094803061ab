#include "sff/bridge/endpoint.hpp"

#include <algorithm>
#include <cmath>

namespace sff::bridge {

using Clock = std::chrono::steady_clock;
using std::chrono::milliseconds;

void BridgeEndpointConfig::validate() const {
  if (rx_port == tx_port || rx_port == heartbeat_port ||
      tx_port == heartbeat_port) {
    throw BridgeError("rx, tx and heartbeat ports must be distinct");
  }
  if (liveness_timeout_ms <= heartbeat_period_ms) {
    throw BridgeError("liveness timeout must exceed the heartbeat period");
  }
  if (heartbeat_period_ms <= 0 || queue_depth == 0) {
    throw BridgeError("heartbeat period and queue depth must be positive");
  }
}

const char* to_string(LinkState s) {
  switch (s) {
    case LinkState::Connected: return "connected";
    case LinkState::Degraded: return "degraded";
    case LinkState::Lost: return "lost";
  }
  return "?";
}

const TopicCounters& BridgeStats::at(const std::string& path) const {
  static const TopicCounters kZero{};
  auto it = topics.find(path);
  return it == topics.end() ? kZero : it->second;
}

namespace detail {

std::string make_envelope(const std::string& path, std::int64_t stamp_ns,
                          std::string_view payload_json) {
  std::string s;
  s.reserve(payload_json.size() + path.size() + 48);
  s += "{\"topic\":\"";
  s += path;
  s += "\",\"stamp_ns\":";
  s += std::to_string(stamp_ns);
  s += ",\"payload\":";
  s += payload_json;
  s += '}';
  return s;
}

EndpointCore::EndpointCore(const BridgeEndpointConfig& config,
                           msgs::SchemaRegistry reg)
    : cfg(config), registry(std::move(reg)), delivery_queue_(config.queue_depth) {
  cfg.validate();
}

EndpointCore::~EndpointCore() { stop_delivery(); }

void EndpointCore::start_delivery() {
  delivery_thread_ = std::thread([this] { delivery_loop(); });
}

void EndpointCore::stop_delivery() {
  delivery_queue_.close();
  if (delivery_thread_.joinable()) delivery_thread_.join();
}

TopicCell* EndpointCore::cell(const std::string& path) {
  std::lock_guard lk(cells_m_);
  auto& c = cells_[path];
  if (!c) c = std::make_unique<TopicCell>();
  return c.get();
}

BridgeStats EndpointCore::stats_snapshot() const {
  BridgeStats out;
  std::lock_guard lk(cells_m_);
  for (const auto& [path, c] : cells_) {
    TopicCounters t;
    t.sent = c->sent.load();
    t.received = c->received.load();
    t.dropped_overflow = c->dropped_overflow.load();
    t.dropped_unknown = c->dropped_unknown.load();
    t.dropped_malformed = c->dropped_malformed.load();
    t.interarrival_count = c->n;
    t.interarrival_mean_ms = c->mean_ms;
    t.interarrival_std_ms = c->n > 1 ? std::sqrt(c->m2_ms / (c->n - 1)) : 0.0;
    out.topics.emplace(path, t);
  }
  return out;
}

PublisherHandle EndpointCore::add_publisher(const TopicRegistration& reg,
                                            Direction expected) {
  const std::string path = render_topic_path(reg);
  if (path != kClockPath && reg.direction != expected) {
    throw TopicError("publisher direction mismatch for " + path);
  }
  const msgs::MessageSchema& schema = registry.at(reg.schema);
  std::lock_guard lk(tables_m_);
  if (publishers_.count(path)) {
    throw DuplicateRegistrationError("publisher already registered: " + path);
  }
  PublisherHandle h;
  h.path = path;
  h.schema = &schema;
  h.cell = cell(path);
  publishers_.emplace(path, h);
  return h;
}

Subscription* EndpointCore::add_subscription(const TopicRegistration& reg,
                                             DeliveryCallback cb) {
  const std::string path = render_topic_path(reg);
  const msgs::MessageSchema& schema = registry.at(reg.schema);
  std::lock_guard lk(tables_m_);
  if (subscriptions_.count(path)) {
    throw DuplicateRegistrationError("subscription already registered: " + path);
  }
  auto sub = std::make_unique<Subscription>();
  sub->path = path;
  sub->schema = &schema;
  sub->callback = std::move(cb);
  sub->cell = cell(path);
  Subscription* raw = sub.get();
  subscriptions_.emplace(path, std::move(sub));
  return raw;
}

Subscription* EndpointCore::find_subscription(const std::string& path) {
  std::lock_guard lk(tables_m_);
  auto it = subscriptions_.find(path);
  return it == subscriptions_.end() ? nullptr : it->second.get();
}

std::shared_ptr<const std::string> EndpointCore::make_frame(
    const PublisherHandle& h, const msgs::MessageValue& value,
    std::int64_t stamp_ns) {
  const std::string payload = msgs::encode_json(value, *h.schema).dump();
  auto frame = std::make_shared<const std::string>(
      frame_encode(make_envelope(h.path, stamp_ns, payload)));
  static_cast<TopicCell*>(h.cell)->sent.fetch_add(1, std::memory_order_relaxed);
  return frame;
}

void EndpointCore::deliver_local(Subscription* sub, nlohmann::json payload,
                                 std::int64_t stamp_ns,
                                 Clock::time_point recv_time) {
  DeliveryItem item{sub, std::move(payload), stamp_ns, recv_time};
  const int dropped = delivery_queue_.push(sub->path, std::move(item));
  if (dropped > 0) {
    sub->cell->dropped_overflow.fetch_add(dropped, std::memory_order_relaxed);
  }
}

void EndpointCore::count_unknown(const std::string& path) {
  cell(path)->dropped_unknown.fetch_add(1, std::memory_order_relaxed);
}

void EndpointCore::count_malformed(const std::string& path) {
  cell(path)->dropped_malformed.fetch_add(1, std::memory_order_relaxed);
}

void EndpointCore::delivery_loop() {
  std::vector<DeliveryItem> batch;
  for (;;) {
    batch.clear();
    if (!delivery_queue_.pop_batch(batch, 64)) return;
    for (auto& item : batch) {
      Subscription* sub = item.sub;
      msgs::MessageValue value;
      try {
        value = msgs::decode_json(item.payload, *sub->schema, cfg.decode_mode);
      } catch (const std::exception&) {
        sub->cell->dropped_malformed.fetch_add(1, std::memory_order_relaxed);
        continue;
      }
      TopicCell* c = sub->cell;
      c->received.fetch_add(1, std::memory_order_relaxed);
      if (c->have_last) {
        const double dt_ms =
            std::chrono::duration<double, std::milli>(item.recv_time -
                                                      c->last_arrival)
                .count();
        // Welford accumulation of inter-arrival statistics.
        c->n += 1;
        const double delta = dt_ms - c->mean_ms;
        c->mean_ms += delta / static_cast<double>(c->n);
        c->m2_ms += delta * (dt_ms - c->mean_ms);
      }
      c->have_last = true;
      c->last_arrival = item.recv_time;
      if (sub->callback) sub->callback(value, item.stamp_ns, item.recv_time);
    }
  }
}

}  // namespace detail

namespace {

struct Envelope {
  std::string topic;
  std::int64_t stamp_ns{0};
  nlohmann::json payload;
};

bool parse_envelope(const std::string& body, Envelope* out) {
  try {
    nlohmann::json doc = nlohmann::json::parse(body);
    if (!doc.is_object()) return false;
    auto t = doc.find("topic");
    auto s = doc.find("stamp_ns");
    auto p = doc.find("payload");
    if (t == doc.end() || !t->is_string() || s == doc.end() ||
        !s->is_number_integer() || p == doc.end()) {
      return false;
    }
    out->topic = t->get<std::string>();
    out->stamp_ns = s->get<std::int64_t>();
    out->payload = std::move(*p);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// BridgeServer

BridgeServer::BridgeServer(const BridgeEndpointConfig& cfg,
                           msgs::SchemaRegistry registry, std::string server_id)
    : core_(cfg, std::move(registry)), server_id_(std::move(server_id)) {
  const std::uint16_t ports[3] = {cfg.rx_port, cfg.tx_port, cfg.heartbeat_port};
  try {
    for (int i = 0; i < 3; ++i) listen_fds_[i] = tcp_listen(cfg.host, ports[i]);
  } catch (...) {
    for (int fd : listen_fds_) close_fd(fd);
    throw;
  }
  for (int i = 0; i < 3; ++i) {
    accept_threads_[i] = std::thread([this, i] { accept_loop(listen_fds_[i], i); });
  }
  clock_pub_ = core_.add_publisher(
      TopicRegistration{"", Direction::Out, "clock", "Clock", "clock"},
      Direction::Out);
  core_.start_delivery();
  hb_thread_ = std::thread([this] { heartbeat_loop(); });
  monitor_thread_ = std::thread([this] { monitor_loop(); });
}

BridgeServer::~BridgeServer() { close(); }

void BridgeServer::accept_loop(int listen_fd, int channel) {
  for (;;) {
    const int fd = tcp_accept(listen_fd);
    if (fd < 0) return;
    if (closed_) {
      close_fd(fd);
      return;
    }
    auto conn = std::make_unique<detail::Conn>();
    conn->fd = fd;
    detail::Conn* raw = conn.get();
    if (channel != 0) {
      conn->out = std::make_unique<
          detail::TopicQueue<std::shared_ptr<const std::string>>>(
          core_.cfg.queue_depth);
      conn->writer = std::thread([this, raw] { writer_loop(raw); });
    }
    if (channel == 0) {
      conn->reader = std::thread([this, raw] { rx_reader_loop(raw); });
    } else {
      conn->reader = std::thread([this, raw, channel] {
        ctl_reader_loop(raw, channel);
      });
    }
    std::lock_guard lk(conns_m_);
    conns_.push_back(std::move(conn));
  }
}

void BridgeServer::writer_loop(detail::Conn* conn) {
  std::vector<std::shared_ptr<const std::string>> batch;
  std::string buf;
  for (;;) {
    batch.clear();
    if (!conn->out->pop_batch(batch, 64)) return;
    buf.clear();
    for (const auto& f : batch) buf += *f;
    if (!send_all(conn->fd, buf.data(), buf.size())) {
      conn->open = false;
      return;
    }
  }
}

void BridgeServer::rx_reader_loop(detail::Conn* conn) {
  FrameReader reader;
  std::vector<std::string> frames;
  while (conn->open && !closed_) {
    frames.clear();
    if (!reader.poll(conn->fd, frames)) break;
    const auto recv_time = Clock::now();
    for (const auto& body : frames) {
      Envelope env;
      if (!parse_envelope(body, &env)) {
        core_.count_malformed("");
        continue;
      }
      if (env.topic.size() > 2 && env.topic[1] == '_' && env.topic[2] == '_') {
        handle_control(env.topic, env.payload, conn, 0);
        continue;
      }
      route_inbound(env.topic, env.stamp_ns, env.payload, body, recv_time);
    }
  }
  conn->open = false;
}

void BridgeServer::ctl_reader_loop(detail::Conn* conn, int channel) {
  FrameReader reader;
  std::vector<std::string> frames;
  while (conn->open && !closed_) {
    frames.clear();
    if (!reader.poll(conn->fd, frames)) break;
    for (const auto& body : frames) {
      Envelope env;
      if (!parse_envelope(body, &env)) continue;
      if (env.topic == detail::kHeartbeatPath) {
        const auto sid = env.payload.value("sender_id", std::string());
        const auto counter = env.payload.value("counter", std::int64_t{-1});
        if (!sid.empty()) {
          std::lock_guard lk(clients_m_);
          ClientRecord* rec = record_for(sid);
          rec->last_counter = counter;
          rec->last_seen = Clock::now();
          rec->seen_heartbeat = true;
          clients_cv_.notify_all();
        }
        continue;
      }
      if (env.topic.size() > 2 && env.topic[1] == '_' && env.topic[2] == '_') {
        handle_control(env.topic, env.payload, conn, channel);
      }
    }
  }
  conn->open = false;
}

BridgeServer::ClientRecord* BridgeServer::record_for(const std::string& id) {
  auto& rec = clients_[id];
  if (!rec) {
    rec = std::make_unique<ClientRecord>();
    rec->id = id;
  }
  return rec.get();
}

void BridgeServer::handle_control(const std::string& topic,
                                  const nlohmann::json& payload,
                                  detail::Conn* conn, int channel) {
  const auto id = payload.value("client_id", std::string());
  if (id.empty()) return;
  std::lock_guard lk(clients_m_);
  ClientRecord* rec = record_for(id);
  if (topic == detail::kHelloTopic) {
    if (channel == 1) rec->tx = conn;
    if (channel == 2) rec->hb = conn;
  } else if (topic == detail::kSubscribeTopic) {
    const auto path = payload.value("path", std::string());
    if (!path.empty()) rec->subscribed.insert(path);
  }
  clients_cv_.notify_all();
}

void BridgeServer::route_inbound(const std::string& path, std::int64_t stamp_ns,
                                 const nlohmann::json& envelope,
                                 const std::string& raw,
                                 Clock::time_point recv_time) {
  int recipients = 0;
  // Relay to clients that announced a subscription (controller-to-controller
  // sharing rides the same path as any other topic).
  {
    std::shared_ptr<const std::string> frame;
    std::lock_guard lk(clients_m_);
    for (auto& [id, rec] : clients_) {
      if (rec->tx && rec->tx->open && rec->subscribed.count(path)) {
        if (!frame) {
          frame = std::make_shared<const std::string>(frame_encode(raw));
        }
        const int dropped = rec->tx->out->push(path, frame);
        if (dropped > 0) {
          core_.cell(path)->dropped_overflow.fetch_add(
              dropped, std::memory_order_relaxed);
        }
        ++recipients;
      }
    }
  }
  if (detail::Subscription* sub = core_.find_subscription(path)) {
    core_.deliver_local(sub, envelope, stamp_ns, recv_time);
    ++recipients;
  }
  if (recipients == 0) core_.count_unknown(path);
}

void BridgeServer::fanout(const std::string& path,
                          const std::shared_ptr<const std::string>& frame) {
  std::lock_guard lk(clients_m_);
  for (auto& [id, rec] : clients_) {
    if (rec->tx && rec->tx->open && rec->subscribed.count(path)) {
      const int dropped = rec->tx->out->push(path, frame);
      if (dropped > 0) {
        core_.cell(path)->dropped_overflow.fetch_add(dropped,
                                                     std::memory_order_relaxed);
      }
    }
  }
}

PublisherHandle BridgeServer::register_publisher(const TopicRegistration& reg) {
  return core_.add_publisher(reg, Direction::Out);
}

void BridgeServer::publish(const PublisherHandle& handle,
                           const msgs::MessageValue& value,
                           std::int64_t stamp_ns) {
  if (closed_) throw TransportClosedError("bridge server closed");
  fanout(handle.path, core_.make_frame(handle, value, stamp_ns));
}

void BridgeServer::subscribe(const TopicRegistration& reg, DeliveryCallback cb) {
  core_.add_subscription(reg, std::move(cb));
}

void BridgeServer::publish_clock(std::int64_t sim_time_ns) {
  if (closed_) throw TransportClosedError("bridge server closed");
  const std::int64_t prev = last_clock_ns_.load();
  if (sim_time_ns < prev) {
    throw NonMonotonicClockError(
        "clock regression: " + std::to_string(sim_time_ns) + " after " +
        std::to_string(prev));
  }
  last_clock_ns_.store(sim_time_ns);
  msgs::MessageValue v("Clock");
  v.set("sim_time_ns", sim_time_ns);
  fanout(kClockPath, core_.make_frame(clock_pub_, v, sim_time_ns));
}

BridgeStats BridgeServer::stats() const { return core_.stats_snapshot(); }

std::vector<PeerHealth> BridgeServer::peers() const {
  std::vector<PeerHealth> out;
  std::lock_guard lk(clients_m_);
  for (const auto& [id, rec] : clients_) {
    PeerHealth h;
    h.id = id;
    h.last_counter = rec->last_counter;
    h.last_seen = rec->last_seen;
    if (!rec->seen_heartbeat) {
      h.state = LinkState::Lost;
    } else {
      const auto elapsed = std::chrono::duration_cast<milliseconds>(
                               Clock::now() - rec->last_seen)
                               .count();
      h.state = elapsed > core_.cfg.liveness_timeout_ms ? LinkState::Lost
                : elapsed > 2 * core_.cfg.heartbeat_period_ms
                    ? LinkState::Degraded
                    : LinkState::Connected;
    }
    out.push_back(std::move(h));
  }
  return out;
}

LinkState BridgeServer::peer_state(const std::string& id) const {
  for (const auto& p : peers()) {
    if (p.id == id) return p.state;
  }
  return LinkState::Lost;
}

void BridgeServer::on_peer_state(PeerStateCallback cb) {
  std::lock_guard lk(cb_m_);
  state_cb_ = std::move(cb);
}

bool BridgeServer::wait_for_peers(const std::vector<std::string>& ids,
                                  milliseconds timeout) {
  std::unique_lock lk(clients_m_);
  return clients_cv_.wait_for(lk, timeout, [&] {
    for (const auto& id : ids) {
      auto it = clients_.find(id);
      if (it == clients_.end() || !it->second->seen_heartbeat ||
          it->second->tx == nullptr) {
        return false;
      }
    }
    return true;
  });
}

void BridgeServer::heartbeat_loop() {
  while (!closed_) {
    {
      std::unique_lock lk(stop_m_);
      stop_cv_.wait_for(lk, milliseconds(core_.cfg.heartbeat_period_ms),
                        [&] { return closed_.load(); });
    }
    if (closed_) return;
    nlohmann::ordered_json hb;
    hb["sender_id"] = server_id_;
    hb["counter"] = hb_counter_.fetch_add(1);
    auto frame = std::make_shared<const std::string>(frame_encode(
        detail::make_envelope(detail::kHeartbeatPath, 0, hb.dump())));
    std::lock_guard lk(clients_m_);
    for (auto& [id, rec] : clients_) {
      if (rec->hb && rec->hb->open) rec->hb->out->push(detail::kHeartbeatPath, frame);
    }
  }
}

void BridgeServer::monitor_loop() {
  const auto poll = milliseconds(std::max(10, core_.cfg.heartbeat_period_ms / 2));
  while (!closed_) {
    {
      std::unique_lock lk(stop_m_);
      stop_cv_.wait_for(lk, poll, [&] { return closed_.load(); });
    }
    if (closed_) return;
    std::vector<std::pair<std::string, LinkState>> transitions;
    {
      std::lock_guard lk(clients_m_);
      for (auto& [id, rec] : clients_) {
        if (!rec->seen_heartbeat) continue;
        const auto elapsed = std::chrono::duration_cast<milliseconds>(
                                 Clock::now() - rec->last_seen)
                                 .count();
        const LinkState s = elapsed > core_.cfg.liveness_timeout_ms
                                ? LinkState::Lost
                            : elapsed > 2 * core_.cfg.heartbeat_period_ms
                                ? LinkState::Degraded
                                : LinkState::Connected;
        if (s != rec->reported) {
          rec->reported = s;
          transitions.emplace_back(id, s);
        }
      }
    }
    PeerStateCallback cb;
    {
      std::lock_guard lk(cb_m_);
      cb = state_cb_;
    }
    if (cb) {
      for (const auto& [id, s] : transitions) cb(id, s);
    }
  }
}

void BridgeServer::flush(milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    bool empty = true;
    {
      std::lock_guard lk(conns_m_);
      for (const auto& c : conns_) {
        if (c->out && !c->out->empty()) empty = false;
      }
    }
    if (empty || Clock::now() >= deadline) break;
    std::this_thread::sleep_for(milliseconds(2));
  }
  std::this_thread::sleep_for(milliseconds(5));
}

void BridgeServer::close() {
  bool expected = false;
  if (!closed_.compare_exchange_strong(expected, true)) return;
  {
    std::lock_guard lk(stop_m_);
    stop_cv_.notify_all();
  }
  for (int fd : listen_fds_) shutdown_fd(fd);
  for (auto& t : accept_threads_) {
    if (t.joinable()) t.join();
  }
  for (int fd : listen_fds_) close_fd(fd);
  if (hb_thread_.joinable()) hb_thread_.join();
  if (monitor_thread_.joinable()) monitor_thread_.join();
  {
    std::lock_guard lk(conns_m_);
    for (auto& c : conns_) {
      if (c->out) c->out->close();
      shutdown_fd(c->fd);
    }
  }
  for (auto& c : conns_) {
    if (c->reader.joinable()) c->reader.join();
    if (c->writer.joinable()) c->writer.join();
    close_fd(c->fd);
  }
  core_.stop_delivery();
}

// ---------------------------------------------------------------------------
// BridgeClient

BridgeClient::BridgeClient(const BridgeEndpointConfig& cfg,
                           msgs::SchemaRegistry registry, std::string client_id,
                           int connect_timeout_ms)
    : core_(cfg, std::move(registry)), client_id_(std::move(client_id)) {
  auto hello = [&](int fd, const char* channel) {
    nlohmann::ordered_json p;
    p["client_id"] = client_id_;
    p["channel"] = channel;
    const std::string f =
        frame_encode(detail::make_envelope(detail::kHelloTopic, 0, p.dump()));
    if (!send_all(fd, f.data(), f.size())) {
      throw ConnectError("hello failed on " + std::string(channel));
    }
  };

  rx_conn_ = std::make_unique<detail::Conn>();
  tx_conn_ = std::make_unique<detail::Conn>();
  hb_conn_ = std::make_unique<detail::Conn>();
  try {
    rx_conn_->fd = tcp_connect(cfg.host, cfg.rx_port, connect_timeout_ms);
    hello(rx_conn_->fd, "rx");
    tx_conn_->fd = tcp_connect(cfg.host, cfg.tx_port, connect_timeout_ms);
    hello(tx_conn_->fd, "tx");
    hb_conn_->fd = tcp_connect(cfg.host, cfg.heartbeat_port, connect_timeout_ms);
    hello(hb_conn_->fd, "hb");
  } catch (...) {
    close_fd(rx_conn_->fd);
    close_fd(tx_conn_->fd);
    close_fd(hb_conn_->fd);
    throw;
  }

  rx_conn_->out = std::make_unique<
      detail::TopicQueue<std::shared_ptr<const std::string>>>(cfg.queue_depth);
  rx_conn_->writer = std::thread([this] {
    std::vector<std::shared_ptr<const std::string>> batch;
    std::string buf;
    for (;;) {
      batch.clear();
      if (!rx_conn_->out->pop_batch(batch, 64)) return;
      buf.clear();
      for (const auto& f : batch) buf += *f;
      if (!send_all(rx_conn_->fd, buf.data(), buf.size())) {
        rx_conn_->open = false;
        return;
      }
    }
  });
  tx_conn_->reader = std::thread([this] { tx_reader_loop(); });
  hb_conn_->reader = std::thread([this] { hb_reader_loop(); });

  core_.start_delivery();
  hb_thread_ = std::thread([this] { heartbeat_loop(); });
  monitor_thread_ = std::thread([this] { monitor_loop(); });
}

BridgeClient::~BridgeClient() { close(); }

void BridgeClient::tx_reader_loop() {
  FrameReader reader;
  std::vector<std::string> frames;
  while (tx_conn_->open && !closed_) {
    frames.clear();
    if (!reader.poll(tx_conn_->fd, frames)) break;
    const auto recv_time = Clock::now();
    for (const auto& body : frames) {
      Envelope env;
      if (!parse_envelope(body, &env)) {
        core_.count_malformed("");
        continue;
      }
      if (detail::Subscription* sub = core_.find_subscription(env.topic)) {
        core_.deliver_local(sub, std::move(env.payload), env.stamp_ns, recv_time);
      } else {
        core_.count_unknown(env.topic);
      }
    }
  }
  tx_conn_->open = false;
}

void BridgeClient::hb_reader_loop() {
  FrameReader reader;
  std::vector<std::string> frames;
  while (hb_conn_->open && !closed_) {
    frames.clear();
    if (!reader.poll(hb_conn_->fd, frames)) break;
    for (const auto& body : frames) {
      Envelope env;
      if (!parse_envelope(body, &env)) continue;
      if (env.topic == detail::kHeartbeatPath) {
        std::lock_guard lk(server_m_);
        server_counter_ = env.payload.value("counter", std::int64_t{-1});
        server_seen_ = Clock::now();
        seen_server_ = true;
      }
    }
  }
  hb_conn_->open = false;
}

void BridgeClient::heartbeat_loop() {
  while (!closed_) {
    {
      std::unique_lock lk(stop_m_);
      stop_cv_.wait_for(lk, milliseconds(core_.cfg.heartbeat_period_ms),
                        [&] { return closed_.load(); });
    }
    if (closed_) return;
    nlohmann::ordered_json hb;
    hb["sender_id"] = client_id_;
    hb["counter"] = hb_counter_.fetch_add(1);
    const std::string f = frame_encode(
        detail::make_envelope(detail::kHeartbeatPath, 0, hb.dump()));
    if (hb_conn_->open && !send_all(hb_conn_->fd, f.data(), f.size())) {
      hb_conn_->open = false;
    }
  }
}

void BridgeClient::monitor_loop() {
  const auto poll = milliseconds(std::max(10, core_.cfg.heartbeat_period_ms / 2));
  while (!closed_) {
    {
      std::unique_lock lk(stop_m_);
      stop_cv_.wait_for(lk, poll, [&] { return closed_.load(); });
    }
    if (closed_) return;
    LinkState s = server_state();
    bool changed = false;
    {
      std::lock_guard lk(server_m_);
      if (seen_server_ && s != server_reported_) {
        server_reported_ = s;
        changed = true;
      }
    }
    if (changed) {
      PeerStateCallback cb;
      {
        std::lock_guard lk(cb_m_);
        cb = state_cb_;
      }
      if (cb) cb("server", s);
    }
  }
}

void BridgeClient::send_control(const std::string& topic,
                                const nlohmann::json& payload) {
  auto frame = std::make_shared<const std::string>(
      frame_encode(detail::make_envelope(topic, 0, payload.dump())));
  rx_conn_->out->push(topic, frame);
}

PublisherHandle BridgeClient::register_publisher(const TopicRegistration& reg) {
  return core_.add_publisher(reg, Direction::In);
}

void BridgeClient::publish(const PublisherHandle& handle,
                           const msgs::MessageValue& value,
                           std::int64_t stamp_ns) {
  if (closed_ || !rx_conn_->open) {
    throw TransportClosedError("bridge client closed");
  }
  auto frame = core_.make_frame(handle, value, stamp_ns);
  const int dropped = rx_conn_->out->push(handle.path, frame);
  if (dropped > 0) {
    static_cast<detail::TopicCell*>(handle.cell)
        ->dropped_overflow.fetch_add(dropped, std::memory_order_relaxed);
  }
}

void BridgeClient::subscribe(const TopicRegistration& reg, DeliveryCallback cb) {
  detail::Subscription* sub = core_.add_subscription(reg, std::move(cb));
  nlohmann::ordered_json p;
  p["client_id"] = client_id_;
  p["path"] = sub->path;
  send_control(detail::kSubscribeTopic, p);
}

void BridgeClient::subscribe_clock(std::function<void(std::int64_t)> cb) {
  subscribe(TopicRegistration{"", Direction::Out, "clock", "Clock", "clock"},
            [cb = std::move(cb)](const msgs::MessageValue& v, std::int64_t,
                                 Clock::time_point) {
              cb(v.get<std::int64_t>("sim_time_ns"));
            });
}

BridgeStats BridgeClient::stats() const { return core_.stats_snapshot(); }

LinkState BridgeClient::server_state() const {
  std::lock_guard lk(server_m_);
  if (!seen_server_) return LinkState::Lost;
  const auto elapsed =
      std::chrono::duration_cast<milliseconds>(Clock::now() - server_seen_)
          .count();
  return elapsed > core_.cfg.liveness_timeout_ms ? LinkState::Lost
         : elapsed > 2 * core_.cfg.heartbeat_period_ms ? LinkState::Degraded
                                                       : LinkState::Connected;
}

void BridgeClient::on_peer_state(PeerStateCallback cb) {
  std::lock_guard lk(cb_m_);
  state_cb_ = std::move(cb);
}

void BridgeClient::flush(milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  while (!rx_conn_->out->empty() && Clock::now() < deadline) {
    std::this_thread::sleep_for(milliseconds(2));
  }
  std::this_thread::sleep_for(milliseconds(5));
}

void BridgeClient::close() {
  bool expected = false;
  if (!closed_.compare_exchange_strong(expected, true)) return;
  {
    std::lock_guard lk(stop_m_);
    stop_cv_.notify_all();
  }
  if (hb_thread_.joinable()) hb_thread_.join();
  if (monitor_thread_.joinable()) monitor_thread_.join();
  for (auto* c : {rx_conn_.get(), tx_conn_.get(), hb_conn_.get()}) {
    if (!c) continue;
    if (c->out) c->out->close();
    shutdown_fd(c->fd);
  }
  for (auto* c : {rx_conn_.get(), tx_conn_.get(), hb_conn_.get()}) {
    if (!c) continue;
    if (c->reader.joinable()) c->reader.join();
    if (c->writer.joinable()) c->writer.join();
    close_fd(c->fd);
  }
  core_.stop_delivery();
}

}  // namespace sff::bridge
