#include "airq/mqtt/codec.hpp"

#include "airq/error.hpp"

namespace airq::mqtt {
namespace {

constexpr std::size_t kMaxRemainingLength = 268'435'455;

[[noreturn]] void protocol(const std::string& what) { fail(ErrorCode::kProtocol, "MQTT: " + what); }

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v >> 8));
  out.push_back(static_cast<char>(v & 0xFF));
}

void put_str(std::string& out, std::string_view s) {
  if (s.size() > 0xFFFF) protocol("string too long");
  put_u16(out, static_cast<std::uint16_t>(s.size()));
  out.append(s);
}

std::string frame(std::uint8_t header, const std::string& body) {
  std::string out;
  out.push_back(static_cast<char>(header));
  std::size_t len = body.size();
  if (len > kMaxRemainingLength) protocol("packet too large");
  do {
    std::uint8_t byte = len % 128;
    len /= 128;
    if (len > 0) byte |= 0x80;
    out.push_back(static_cast<char>(byte));
  } while (len > 0);
  out += body;
  return out;
}

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint16_t u16() {
    need(2);
    const auto hi = static_cast<std::uint8_t>(data_[pos_]);
    const auto lo = static_cast<std::uint8_t>(data_[pos_ + 1]);
    pos_ += 2;
    return static_cast<std::uint16_t>((hi << 8) | lo);
  }
  std::string str() {
    const auto n = u16();
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string rest() {
    std::string s(data_.substr(pos_));
    pos_ = data_.size();
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) protocol("truncated packet body");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

Packet decode_body(std::uint8_t header, std::string_view body) {
  const std::uint8_t type = header >> 4;
  const std::uint8_t flags = header & 0x0F;
  Reader r(body);
  switch (type) {
    case 1: {
      Connect c;
      if (r.str() != "MQTT") protocol("unsupported protocol name");
      if (r.u8() != 4) protocol("unsupported protocol level (need 3.1.1)");
      const std::uint8_t cf = r.u8();
      c.clean_session = (cf & 0x02) != 0;
      c.keep_alive_s = r.u16();
      c.client_id = r.str();
      if (cf & 0x04) {  // will topic + message, accepted and ignored
        r.str();
        r.str();
      }
      if (cf & 0x80) c.username = r.str();
      if (cf & 0x40) c.password = r.str();
      return c;
    }
    case 2: {
      Connack c;
      c.session_present = (r.u8() & 0x01) != 0;
      c.return_code = r.u8();
      if (!r.done()) protocol("malformed CONNACK length");
      return c;
    }
    case 3: {
      Publish p;
      p.dup = (flags & 0x08) != 0;
      p.qos = (flags >> 1) & 0x03;
      p.retain = (flags & 0x01) != 0;
      if (p.qos > 1) protocol("QoS 2 is not supported");
      p.topic = r.str();
      if (p.qos > 0) p.packet_id = r.u16();
      p.payload = r.rest();
      return p;
    }
    case 4: {
      Puback a{r.u16()};
      if (!r.done()) protocol("malformed PUBACK length");
      return a;
    }
    case 8: {
      if (flags != 0x02) protocol("malformed SUBSCRIBE flags");
      Subscribe s;
      s.packet_id = r.u16();
      while (!r.done()) {
        auto filter = r.str();
        const auto qos = r.u8();
        s.filters.emplace_back(std::move(filter), qos);
      }
      if (s.filters.empty()) protocol("SUBSCRIBE without filters");
      return s;
    }
    case 9: {
      Suback s;
      s.packet_id = r.u16();
      while (!r.done()) s.return_codes.push_back(r.u8());
      return s;
    }
    case 12:
    case 13:
    case 14:
      if (!body.empty()) protocol("unexpected payload on a bodiless packet");
      if (type == 12) return Pingreq{};
      if (type == 13) return Pingresp{};
      return Disconnect{};
    default: protocol("unsupported packet type " + std::to_string(type));
  }
}

}  // namespace

std::string encode(const Packet& packet) {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        std::string body;
        if constexpr (std::is_same_v<T, Connect>) {
          put_str(body, "MQTT");
          body.push_back(4);
          std::uint8_t cf = 0;
          if (p.clean_session) cf |= 0x02;
          if (p.password) cf |= 0x40;
          if (p.username) cf |= 0x80;
          body.push_back(static_cast<char>(cf));
          put_u16(body, p.keep_alive_s);
          put_str(body, p.client_id);
          if (p.username) put_str(body, *p.username);
          if (p.password) put_str(body, *p.password);
          return frame(0x10, body);
        } else if constexpr (std::is_same_v<T, Connack>) {
          body.push_back(p.session_present ? 1 : 0);
          body.push_back(static_cast<char>(p.return_code));
          return frame(0x20, body);
        } else if constexpr (std::is_same_v<T, Publish>) {
          if (p.qos > 1) protocol("QoS 2 is not supported");
          put_str(body, p.topic);
          if (p.qos > 0) put_u16(body, p.packet_id);
          body += p.payload;
          const std::uint8_t h = 0x30 | (p.dup ? 0x08 : 0) | (p.qos << 1) | (p.retain ? 1 : 0);
          return frame(h, body);
        } else if constexpr (std::is_same_v<T, Puback>) {
          put_u16(body, p.packet_id);
          return frame(0x40, body);
        } else if constexpr (std::is_same_v<T, Subscribe>) {
          put_u16(body, p.packet_id);
          for (const auto& [filter, qos] : p.filters) {
            put_str(body, filter);
            body.push_back(static_cast<char>(qos));
          }
          return frame(0x82, body);
        } else if constexpr (std::is_same_v<T, Suback>) {
          put_u16(body, p.packet_id);
          for (auto c : p.return_codes) body.push_back(static_cast<char>(c));
          return frame(0x90, body);
        } else if constexpr (std::is_same_v<T, Pingreq>) {
          return frame(0xC0, body);
        } else if constexpr (std::is_same_v<T, Pingresp>) {
          return frame(0xD0, body);
        } else {
          return frame(0xE0, body);
        }
      },
      packet);
}

std::optional<Packet> Decoder::next() {
  if (buffer_.size() < 2) return std::nullopt;
  std::size_t len = 0;
  std::size_t multiplier = 1;
  std::size_t pos = 1;
  for (;;) {
    if (pos >= buffer_.size()) return std::nullopt;
    if (pos > 4) protocol("malformed remaining length");
    const auto byte = static_cast<std::uint8_t>(buffer_[pos++]);
    len += (byte & 0x7F) * multiplier;
    multiplier *= 128;
    if ((byte & 0x80) == 0) break;
  }
  if (buffer_.size() < pos + len) return std::nullopt;
  const auto header = static_cast<std::uint8_t>(buffer_[0]);
  auto packet = decode_body(header, std::string_view(buffer_).substr(pos, len));
  buffer_.erase(0, pos + len);
  return packet;
}

bool topic_matches(std::string_view filter, std::string_view topic) {
  std::size_t f = 0;
  std::size_t t = 0;
  // Topics starting with '$' are not matched by wildcards at the first level.
  if (!topic.empty() && topic[0] == '$' && !filter.empty() && (filter[0] == '+' || filter[0] == '#'))
    return false;
  for (;;) {
    const auto fe = filter.find('/', f);
    const auto te = topic.find('/', t);
    const auto flevel = filter.substr(f, fe == std::string_view::npos ? std::string_view::npos : fe - f);
    const auto tlevel = topic.substr(t, te == std::string_view::npos ? std::string_view::npos : te - t);
    if (flevel == "#") return true;
    if (flevel != "+" && flevel != tlevel) return false;
    if (fe == std::string_view::npos && te == std::string_view::npos) return true;
    if (fe == std::string_view::npos) return false;
    if (te == std::string_view::npos) {
      // "a/#" also matches "a".
      return filter.substr(fe + 1) == "#";
    }
    f = fe + 1;
    t = te + 1;
  }
}

bool valid_topic_filter(std::string_view filter) {
  if (filter.empty()) return false;
  std::size_t start = 0;
  for (;;) {
    const auto end = filter.find('/', start);
    const auto level = filter.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    if (level.find('#') != std::string_view::npos && (level != "#" || end != std::string_view::npos))
      return false;
    if (level.find('+') != std::string_view::npos && level != "+") return false;
    if (end == std::string_view::npos) return true;
    start = end + 1;
  }
}

}  // namespace airq::mqtt
