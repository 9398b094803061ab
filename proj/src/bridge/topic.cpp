#include "sff/bridge/topic.hpp"

#include <cctype>

namespace sff::bridge {

namespace {

bool ident_chars(const std::string& s, bool allow_slash) {
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') continue;
    if (allow_slash && c == '/') continue;
    return false;
  }
  return true;
}

}  // namespace

std::string render_topic_path(const TopicRegistration& reg) {
  if (reg.ns.empty() && reg.topic == "clock") return kClockPath;
  if (!ident_chars(reg.ns, false)) {
    throw TopicError("invalid namespace '" + reg.ns + "'");
  }
  if (reg.topic.empty() || !ident_chars(reg.topic, true) ||
      reg.topic.front() == '/' || reg.topic.back() == '/' ||
      reg.topic.find("//") != std::string::npos) {
    throw TopicError("invalid topic '" + reg.topic + "'");
  }
  const char* dir = reg.direction == Direction::In ? "in" : "out";
  return "/" + reg.ns + "/bsk/" + dir + "/" + reg.topic;
}

bool valid_topic_path(const std::string& path) {
  if (path == kClockPath) return true;
  if (path.empty() || path.front() != '/') return false;
  const auto bsk = path.find("/bsk/", 1);
  if (bsk == std::string::npos) return false;
  const std::string ns = path.substr(1, bsk - 1);
  if (!ident_chars(ns, false)) return false;
  std::string rest = path.substr(bsk + 5);
  std::string dir;
  if (rest.rfind("in/", 0) == 0) {
    dir = "in";
    rest = rest.substr(3);
  } else if (rest.rfind("out/", 0) == 0) {
    dir = "out";
    rest = rest.substr(4);
  } else {
    return false;
  }
  return !rest.empty() && ident_chars(rest, true) && rest.front() != '/' &&
         rest.back() != '/' && rest.find("//") == std::string::npos;
}

}  // namespace sff::bridge
