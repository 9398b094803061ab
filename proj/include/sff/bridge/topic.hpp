#pragma once

#include <stdexcept>
#include <string>

namespace sff::bridge {

/// `in` flows controller→simulator, `out` simulator→controller.
enum class Direction { In, Out };

/// Routing entry binding a topic name, schema, direction and namespace.
struct TopicRegistration {
  std::string ns;
  Direction direction{Direction::Out};
  std::string topic;
  std::string schema;
  std::string internal_id;
};

class TopicError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Full path `/<ns>/bsk/<in|out>/<topic>`. The empty namespace with topic
/// "clock" renders as the reserved `/clock` path. Throws TopicError when a
/// component violates the path grammar.
std::string render_topic_path(const TopicRegistration& reg);

/// True iff `path` matches `^/[A-Za-z0-9_]*/bsk/(in|out)/[A-Za-z0-9_/]+$`
/// or equals "/clock".
bool valid_topic_path(const std::string& path);

inline constexpr const char* kClockPath = "/clock";

}  // namespace sff::bridge
