#include <doctest.h>

#include <condition_variable>
#include <mutex>
#include <thread>

#include "airq/error.hpp"
#include "airq/mqtt/broker.hpp"
#include "airq/mqtt/client.hpp"

using namespace airq;
using namespace airq::mqtt;
using namespace std::chrono_literals;

namespace {

struct Inbox {
  std::mutex m;
  std::condition_variable cv;
  std::vector<std::pair<std::string, std::string>> items;

  void push(const std::string& t, const std::string& p) {
    std::lock_guard lock(m);
    items.emplace_back(t, p);
    cv.notify_all();
  }
  bool wait_for(std::size_t n, std::chrono::milliseconds timeout = 3000ms) {
    std::unique_lock lock(m);
    return cv.wait_for(lock, timeout, [&] { return items.size() >= n; });
  }
};

ClientOptions named(const std::string& id) {
  ClientOptions o;
  o.client_id = id;
  return o;
}

}  // namespace

TEST_CASE("broker uri parsing") {
  auto u = BrokerUri::parse("mqtt://localhost:1884");
  CHECK(u.host == "localhost");
  CHECK(u.port == 1884);
  u = BrokerUri::parse("tcp://10.0.0.5");
  CHECK(u.port == 1883);
  u = BrokerUri::parse("broker.local:2000");
  CHECK(u.host == "broker.local");
  CHECK(u.port == 2000);
  CHECK(BrokerUri::parse("mqtt://h:1").to_string() == "mqtt://h:1");
  for (const char* bad : {"http://x:1", "mqtt://", "mqtt://h:0", "mqtt://h:70000", "mqtt://h:12ab",
                          "mqtt://u@h:1", "mqtt://h:1/path", ""}) {
    CAPTURE(bad);
    try {
      BrokerUri::parse(bad);
      FAIL("expected rejection");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInvalidParameter);
    }
  }
}

TEST_CASE("publish and subscribe through the broker at both qos levels") {
  Broker broker;
  Client sub(BrokerUri::parse(broker.uri()), named("sub"));
  Inbox inbox;
  sub.subscribe("workshop/+/reading", 1, [&](const std::string& t, const std::string& p) { inbox.push(t, p); });

  Client pub(BrokerUri::parse(broker.uri()), named("pub"));
  pub.publish("workshop/a/reading", "one", 1);
  pub.publish("workshop/b/reading", "two", 0);
  pub.publish("workshop/b/status", "ignored", 1);
  pub.publish("workshop/c/reading", std::string(70000, 'x'), 1);
  REQUIRE(inbox.wait_for(3));
  std::this_thread::sleep_for(100ms);
  std::lock_guard lock(inbox.m);
  REQUIRE(inbox.items.size() == 3);
  CHECK(inbox.items[0] == std::pair<std::string, std::string>{"workshop/a/reading", "one"});
  CHECK(inbox.items[1].second == "two");
  CHECK(inbox.items[2].second.size() == 70000);
  CHECK(broker.messages_routed() >= 3);
}

TEST_CASE("many messages keep their order") {
  Broker broker;
  Client sub(BrokerUri::parse(broker.uri()), named("sub"));
  Inbox inbox;
  sub.subscribe("t/#", 1, [&](const std::string& t, const std::string& p) { inbox.push(t, p); });
  Client pub(BrokerUri::parse(broker.uri()), named("pub"));
  for (int i = 0; i < 500; ++i) pub.publish("t/x", std::to_string(i), 1);
  REQUIRE(inbox.wait_for(500));
  std::lock_guard lock(inbox.m);
  for (int i = 0; i < 500; ++i) CHECK(inbox.items[i].second == std::to_string(i));
}

TEST_CASE("unreachable broker is a network error") {
  std::uint16_t port = 0;
  {
    Broker probe;
    port = probe.port();
  }
  ClientOptions o = named("x");
  o.connect_timeout = 500ms;
  try {
    Client c(BrokerUri{"127.0.0.1", port}, o);
    FAIL("expected connection failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNetwork);
  }
}

TEST_CASE("client notices a broker shutdown") {
  auto broker = std::make_unique<Broker>();
  Client c(BrokerUri::parse(broker->uri()), named("c"));
  std::mutex m;
  std::condition_variable cv;
  bool lost = false;
  c.on_disconnect([&](const std::string&) {
    std::lock_guard lock(m);
    lost = true;
    cv.notify_all();
  });
  CHECK(c.connected());
  broker->stop();
  std::unique_lock lock(m);
  CHECK(cv.wait_for(lock, 3s, [&] { return lost; }));
  CHECK_FALSE(c.connected());
  CHECK_THROWS_AS(c.publish("a/b", "x", 1), Error);
}

TEST_CASE("broker tracks connected clients") {
  Broker broker;
  {
    Client a(BrokerUri::parse(broker.uri()), named("a"));
    Client b(BrokerUri::parse(broker.uri()), named("b"));
    CHECK(broker.connected_clients() == 2);
    a.disconnect();
  }
  for (int i = 0; i < 50 && broker.connected_clients() != 0; ++i) std::this_thread::sleep_for(20ms);
  CHECK(broker.connected_clients() == 0);
}
