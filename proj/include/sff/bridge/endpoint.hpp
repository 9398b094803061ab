#pragma once

#include "sff/bridge/socket.hpp"
#include "sff/bridge/topic.hpp"
#include "sff/msgs/codec.hpp"
#include "sff/msgs/schema.hpp"
#include "sff/msgs/value.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace sff::bridge {

struct BridgeEndpointConfig {
  std::string host{"127.0.0.1"};
  std::uint16_t rx_port{5550};
  std::uint16_t tx_port{5551};
  std::uint16_t heartbeat_port{5552};
  int heartbeat_period_ms{100};
  int liveness_timeout_ms{500};
  std::size_t queue_depth{1024};
  msgs::DecodeMode decode_mode{msgs::DecodeMode::Strict};

  /// Ports must be distinct and the liveness timeout longer than the
  /// heartbeat period.
  void validate() const;
};

/// Peer liveness as seen through the heartbeat channel. Lost iff no
/// heartbeat arrived within the liveness timeout; Degraded when at least
/// one expected beat was missed but the timeout has not elapsed.
enum class LinkState { Connected, Degraded, Lost };

const char* to_string(LinkState s);

struct PeerHealth {
  std::string id;
  LinkState state{LinkState::Lost};
  std::int64_t last_counter{-1};
  std::chrono::steady_clock::time_point last_seen{};
};

struct TopicCounters {
  std::uint64_t sent{0};
  std::uint64_t received{0};
  std::uint64_t dropped_overflow{0};   // bounded-queue overflow, either side
  std::uint64_t dropped_unknown{0};    // no subscription for the topic
  std::uint64_t dropped_malformed{0};  // payload failed to decode
  std::uint64_t interarrival_count{0};
  double interarrival_mean_ms{0.0};
  double interarrival_std_ms{0.0};

  std::uint64_t dropped_total() const {
    return dropped_overflow + dropped_unknown + dropped_malformed;
  }
};

struct BridgeStats {
  std::map<std::string, TopicCounters> topics;
  const TopicCounters& at(const std::string& path) const;
};

class DuplicateRegistrationError : public BridgeError {
 public:
  using BridgeError::BridgeError;
};

class NonMonotonicClockError : public BridgeError {
 public:
  using BridgeError::BridgeError;
};

struct PublisherHandle {
  std::string path;
  const msgs::MessageSchema* schema{nullptr};
  void* cell{nullptr};
};

/// value, simulation stamp, receive wall time.
using DeliveryCallback =
    std::function<void(const msgs::MessageValue&, std::int64_t,
                       std::chrono::steady_clock::time_point)>;

using PeerStateCallback = std::function<void(const std::string&, LinkState)>;

namespace detail {

/// Bounded per-topic FIFO with drop-oldest overflow and round-robin pop
/// across topics.
template <class T>
class TopicQueue {
 public:
  explicit TopicQueue(std::size_t depth) : depth_(depth) {}

  /// Returns the number of frames dropped to make room (0 or 1).
  int push(const std::string& topic, T item) {
    std::lock_guard lk(m_);
    if (closed_) return 0;
    auto& dq = q_[topic];
    int dropped = 0;
    if (dq.size() >= depth_) {
      dq.pop_front();
      dropped = 1;
      --total_;
    }
    dq.push_back(std::move(item));
    ++total_;
    cv_.notify_one();
    return dropped;
  }

  /// Pops up to `max_batch` items round-robin across topics; blocks until
  /// data arrives or the queue closes. Returns false once closed and empty.
  bool pop_batch(std::vector<T>& out, std::size_t max_batch) {
    std::unique_lock lk(m_);
    cv_.wait(lk, [&] { return total_ > 0 || closed_; });
    if (total_ == 0) return false;
    auto it = q_.upper_bound(cursor_);
    while (out.size() < max_batch && total_ > 0) {
      if (it == q_.end()) it = q_.begin();
      if (it->second.empty()) {
        it = q_.erase(it);
        continue;
      }
      out.push_back(std::move(it->second.front()));
      it->second.pop_front();
      --total_;
      cursor_ = it->first;
      ++it;
    }
    return true;
  }

  bool empty() const {
    std::lock_guard lk(m_);
    return total_ == 0;
  }

  void close() {
    std::lock_guard lk(m_);
    closed_ = true;
    cv_.notify_all();
  }

 private:
  mutable std::mutex m_;
  std::condition_variable cv_;
  std::map<std::string, std::deque<T>> q_;
  std::string cursor_;
  std::size_t depth_;
  std::size_t total_{0};
  bool closed_{false};
};

struct TopicCell {
  std::atomic<std::uint64_t> sent{0};
  std::atomic<std::uint64_t> received{0};
  std::atomic<std::uint64_t> dropped_overflow{0};
  std::atomic<std::uint64_t> dropped_unknown{0};
  std::atomic<std::uint64_t> dropped_malformed{0};
  // Inter-arrival accumulators, touched only by the delivery thread.
  bool have_last{false};
  std::chrono::steady_clock::time_point last_arrival{};
  std::uint64_t n{0};
  double mean_ms{0.0};
  double m2_ms{0.0};
};

struct Subscription {
  std::string path;
  const msgs::MessageSchema* schema;
  DeliveryCallback callback;
  TopicCell* cell;
};

struct DeliveryItem {
  Subscription* sub;
  nlohmann::json payload;
  std::int64_t stamp_ns;
  std::chrono::steady_clock::time_point recv_time;
};

struct Conn {
  int fd{-1};
  std::unique_ptr<TopicQueue<std::shared_ptr<const std::string>>> out;
  std::thread reader;
  std::thread writer;
  std::atomic<bool> open{true};
};

/// State shared by the server and client endpoints: registration tables,
/// statistics, the delivery queue and its dispatch thread.
class EndpointCore {
 public:
  EndpointCore(const BridgeEndpointConfig& cfg, msgs::SchemaRegistry registry);
  ~EndpointCore();

  TopicCell* cell(const std::string& path);
  BridgeStats stats_snapshot() const;

  PublisherHandle add_publisher(const TopicRegistration& reg,
                                Direction expected);
  Subscription* add_subscription(const TopicRegistration& reg,
                                 DeliveryCallback cb);
  Subscription* find_subscription(const std::string& path);

  /// Encodes and validates, stamps the sent counter and returns the frame
  /// (length prefix included).
  std::shared_ptr<const std::string> make_frame(const PublisherHandle& h,
                                                const msgs::MessageValue& value,
                                                std::int64_t stamp_ns);

  /// Routes a received payload to the local subscription queue.
  void deliver_local(Subscription* sub, nlohmann::json payload,
                     std::int64_t stamp_ns,
                     std::chrono::steady_clock::time_point recv_time);

  void count_unknown(const std::string& path);
  void count_malformed(const std::string& path);

  bool delivery_idle() const { return delivery_queue_.empty(); }
  void start_delivery();
  void stop_delivery();

  const BridgeEndpointConfig cfg;
  msgs::SchemaRegistry registry;

 private:
  void delivery_loop();

  mutable std::mutex cells_m_;
  std::map<std::string, std::unique_ptr<TopicCell>> cells_;

  std::mutex tables_m_;
  std::map<std::string, PublisherHandle> publishers_;
  std::map<std::string, std::unique_ptr<Subscription>> subscriptions_;

  TopicQueue<DeliveryItem> delivery_queue_;
  std::thread delivery_thread_;
};

std::string make_envelope(const std::string& path, std::int64_t stamp_ns,
                          std::string_view payload_json);

inline constexpr const char* kHelloTopic = "/__hello__";
inline constexpr const char* kSubscribeTopic = "/__sub__";
inline constexpr const char* kHeartbeatPath = "/heartbeat";

}  // namespace detail

/// Simulator-side endpoint: binds the receive, transmit and heartbeat
/// ports, fans frames out to subscribed clients and relays controller
/// frames between clients. Multiple servers may coexist on distinct port
/// triples.
class BridgeServer {
 public:
  BridgeServer(const BridgeEndpointConfig& cfg, msgs::SchemaRegistry registry,
               std::string server_id = "sim");
  ~BridgeServer();

  BridgeServer(const BridgeServer&) = delete;
  BridgeServer& operator=(const BridgeServer&) = delete;

  /// Sim-side publishers carry direction Out (the reserved clock topic is
  /// registered automatically).
  PublisherHandle register_publisher(const TopicRegistration& reg);
  void publish(const PublisherHandle& handle, const msgs::MessageValue& value,
               std::int64_t stamp_ns);
  void subscribe(const TopicRegistration& reg, DeliveryCallback cb);

  /// Publishes simulation time on /clock; values must be non-decreasing.
  void publish_clock(std::int64_t sim_time_ns);

  BridgeStats stats() const;
  std::vector<PeerHealth> peers() const;
  LinkState peer_state(const std::string& id) const;
  void on_peer_state(PeerStateCallback cb);
  bool wait_for_peers(const std::vector<std::string>& ids,
                      std::chrono::milliseconds timeout);

  /// Waits until all outbound queues drained (best effort).
  void flush(std::chrono::milliseconds timeout);

  void close();

 private:
  struct ClientRecord;

  void accept_loop(int listen_fd, int channel);
  void rx_reader_loop(detail::Conn* conn);
  void ctl_reader_loop(detail::Conn* conn, int channel);
  void writer_loop(detail::Conn* conn);
  void heartbeat_loop();
  void monitor_loop();
  void handle_control(const std::string& topic, const nlohmann::json& payload,
                      detail::Conn* conn, int channel);
  void route_inbound(const std::string& path, std::int64_t stamp_ns,
                     const nlohmann::json& envelope, const std::string& raw,
                     std::chrono::steady_clock::time_point recv_time);
  void fanout(const std::string& path,
              const std::shared_ptr<const std::string>& frame);
  ClientRecord* record_for(const std::string& id);

  detail::EndpointCore core_;
  std::string server_id_;

  int listen_fds_[3]{-1, -1, -1};
  std::thread accept_threads_[3];

  std::mutex conns_m_;
  std::vector<std::unique_ptr<detail::Conn>> conns_;

  struct ClientRecord {
    std::string id;
    detail::Conn* tx{nullptr};
    detail::Conn* hb{nullptr};
    std::set<std::string> subscribed;
    std::int64_t last_counter{-1};
    std::chrono::steady_clock::time_point last_seen{};
    bool seen_heartbeat{false};
    LinkState reported{LinkState::Lost};
  };
  mutable std::mutex clients_m_;
  std::condition_variable clients_cv_;
  std::map<std::string, std::unique_ptr<ClientRecord>> clients_;

  std::mutex cb_m_;
  PeerStateCallback state_cb_;

  std::thread hb_thread_;
  std::thread monitor_thread_;
  std::condition_variable stop_cv_;
  std::mutex stop_m_;
  std::atomic<bool> closed_{false};
  std::atomic<std::int64_t> hb_counter_{0};
  std::atomic<std::int64_t> last_clock_ns_{INT64_MIN};
  PublisherHandle clock_pub_;
};

/// Controller-side endpoint: connects to a server's three ports. Publishes
/// flow over the receive channel, subscriptions are announced to the server
/// and served over the transmit channel.
class BridgeClient {
 public:
  BridgeClient(const BridgeEndpointConfig& cfg, msgs::SchemaRegistry registry,
               std::string client_id, int connect_timeout_ms = 5000);
  ~BridgeClient();

  BridgeClient(const BridgeClient&) = delete;
  BridgeClient& operator=(const BridgeClient&) = delete;

  /// Controller-side publishers carry direction In.
  PublisherHandle register_publisher(const TopicRegistration& reg);
  void publish(const PublisherHandle& handle, const msgs::MessageValue& value,
               std::int64_t stamp_ns);
  void subscribe(const TopicRegistration& reg, DeliveryCallback cb);
  void subscribe_clock(std::function<void(std::int64_t)> cb);

  BridgeStats stats() const;
  LinkState server_state() const;
  void on_peer_state(PeerStateCallback cb);

  void flush(std::chrono::milliseconds timeout);
  void close();

  const std::string& id() const { return client_id_; }

 private:
  void tx_reader_loop();
  void hb_reader_loop();
  void heartbeat_loop();
  void monitor_loop();
  void send_control(const std::string& topic, const nlohmann::json& payload);

  detail::EndpointCore core_;
  std::string client_id_;

  std::unique_ptr<detail::Conn> rx_conn_;  // writes
  std::unique_ptr<detail::Conn> tx_conn_;  // reads
  std::unique_ptr<detail::Conn> hb_conn_;  // both

  std::thread hb_thread_;
  std::thread monitor_thread_;
  std::condition_variable stop_cv_;
  std::mutex stop_m_;
  std::atomic<bool> closed_{false};
  std::atomic<std::int64_t> hb_counter_{0};

  mutable std::mutex server_m_;
  std::int64_t server_counter_{-1};
  std::chrono::steady_clock::time_point server_seen_{};
  bool seen_server_{false};
  LinkState server_reported_{LinkState::Lost};

  std::mutex cb_m_;
  PeerStateCallback state_cb_;
};

}  // namespace sff::bridge
