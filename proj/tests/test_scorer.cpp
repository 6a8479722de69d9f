#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "stocksent/errors.hpp"
#include "stocksent/respparse.hpp"
#include "stocksent/scorer.hpp"
#include "stocksent/util.hpp"

using namespace stocksent;
using nlohmann::json;

namespace {

const CompanyContext kApple{"Apple", "AAPL"};

PromptJob job(const std::string& id, const std::string& body) {
    CleanedMessage m{id, 0, "AAPL", body, CleaningProfile::llm_profile};
    return PromptJob{id, build_prompt(m, kApple)};
}

std::filesystem::path temp_path(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "stocksent_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("mock provider is deterministic") {
    ProviderConfig cfg;
    cfg.kind = ProviderKind::mock;
    cfg.seed = 9;
    std::vector<PromptJob> jobs = {job("a", "alpha body"), job("b", "beta body"),
                                   job("c", "gamma body")};
    auto r1 = score_batch(jobs, cfg);
    auto r2 = score_batch(jobs, cfg);
    REQUIRE(r1.responses.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(r1.responses[i].ok);
        CHECK(r1.responses[i].text == r2.responses[i].text);
        CHECK(r1.responses[i].message_id == jobs[i].message_id);
    }
    // a different seed reshuffles at least one verdict over a few bodies
    ProviderConfig other = cfg;
    other.seed = 10;
    auto r3 = score_batch(jobs, other);
    bool any_diff = false;
    for (size_t i = 0; i < 3; ++i)
        any_diff = any_diff || r3.responses[i].text != r1.responses[i].text;
    CHECK(any_diff);
}

TEST_CASE("mock responses parse and echo the prompt's company") {
    ProviderConfig cfg;
    cfg.kind = ProviderKind::mock;
    cfg.na_fraction = 0.0;
    auto batch = score_batch(std::vector<PromptJob>{job("a", "some body")}, cfg);
    auto rec = parse_response(batch.responses[0]);
    REQUIRE(rec.status == ParseStatus::parsed);
    CHECK(rec.has_advantage);
    CHECK(rec.has_relation);
    CHECK(batch.responses[0].text.find("Mostly Apple") != std::string::npos);
}

TEST_CASE("cost ledger adds up: 100 requests at 0.01") {
    ProviderConfig cfg;
    cfg.kind = ProviderKind::mock;
    std::vector<PromptJob> jobs;
    for (int i = 0; i < 100; ++i)
        jobs.push_back(job("m" + std::to_string(i), "body " + std::to_string(i)));
    auto batch = score_batch(jobs, cfg);
    CHECK(batch.total_cost == doctest::Approx(1.00).epsilon(1e-9));
    double sum = 0;
    for (const auto& r : batch.responses) sum += r.cost_estimate;
    CHECK(batch.total_cost == sum);
}

TEST_CASE("mock NA share tracks the configured fraction") {
    ProviderConfig cfg;
    cfg.kind = ProviderKind::mock;
    cfg.seed = 3;
    std::vector<PromptJob> jobs;
    for (int i = 0; i < 12000; ++i)
        jobs.push_back(job("m" + std::to_string(i), "text " + std::to_string(i * 7)));
    auto batch = score_batch(jobs, cfg);
    int na = 0;
    for (const auto& r : batch.responses)
        if (r.text == "NA") ++na;
    double share = static_cast<double>(na) / 12000.0;
    CHECK(share > 0.145);
    CHECK(share < 0.205);
}

TEST_CASE("output order is independent of concurrency") {
    std::vector<PromptJob> jobs;
    for (int i = 0; i < 500; ++i)
        jobs.push_back(job("m" + std::to_string(i), "text " + std::to_string(i)));
    ProviderConfig one;
    one.kind = ProviderKind::mock;
    one.max_concurrency = 1;
    ProviderConfig many = one;
    many.max_concurrency = 8;
    auto r1 = score_batch(jobs, one);
    auto r8 = score_batch(jobs, many);
    REQUIRE(r1.responses.size() == r8.responses.size());
    for (size_t i = 0; i < r1.responses.size(); ++i) {
        CHECK(r1.responses[i].message_id == r8.responses[i].message_id);
        CHECK(r1.responses[i].text == r8.responses[i].text);
    }
}

TEST_CASE("replay provider answers from the cache and fails misses") {
    auto cache = temp_path("replay.jsonl");
    std::vector<ReplayEntry> entries = {{"a", "gpt-4", "NA", 0.01},
                                        {"c", "gpt-4", "NA", 0.01}};
    write_replay_cache(cache, entries);

    ProviderConfig cfg;
    cfg.kind = ProviderKind::replay;
    cfg.replay_cache_path = cache;
    std::vector<PromptJob> jobs = {job("a", "x"), job("b", "y"), job("c", "z")};
    auto batch = score_batch(jobs, cfg);
    CHECK(batch.responses[0].ok);
    CHECK_FALSE(batch.responses[1].ok);
    CHECK(batch.responses[1].error == "replay cache miss");
    CHECK(batch.responses[2].ok);
}

TEST_CASE("external sentiment rows load and normalize") {
    auto p = temp_path("bert.csv");
    SUBCASE("box-3 style row normalizes to sum 1") {
        write_file(p, "message_id,p1,p2,p3,p4,p5\nid1,0.10,0.12,0.25,0.29,0.23\n");
        auto rows = load_external_sentiments(p);
        REQUIRE(rows.size() == 1);
        double sum = 0;
        for (double v : rows[0].probs) sum += v;
        CHECK(std::abs(sum - 1.0) < 1e-6);
        CHECK(rows[0].probs[2] == doctest::Approx(0.25 / 0.99));
    }
    SUBCASE("degenerate mass normalizes to a point") {
        write_file(p, "message_id,p1,p2,p3,p4,p5\nid1,2,0,0,0,0\n");
        auto rows = load_external_sentiments(p);
        CHECK(rows[0].probs == std::array<double, 5>{1, 0, 0, 0, 0});
    }
    SUBCASE("negative probabilities are a parse error") {
        write_file(p, "message_id,p1,p2,p3,p4,p5\nid1,-0.1,0.3,0.3,0.3,0.2\n");
        CHECK_THROWS_AS(load_external_sentiments(p), ParseError);
    }
    SUBCASE("unknown ids are reported but kept") {
        write_file(p, "message_id,p1,p2,p3,p4,p5\nid1,1,0,0,0,0\nid9,1,0,0,0,0\n");
        auto rows = load_external_sentiments(p);
        std::vector<std::string> known = {"id1"};
        auto unknown = unknown_external_ids(rows, known);
        REQUIRE(unknown.size() == 1);
        CHECK(unknown[0] == "id9");
        CHECK(rows.size() == 2);
    }
}

TEST_CASE("external_file provider serves sentiment-only records by id") {
    auto p = temp_path("bert2.csv");
    write_file(p, "message_id,p1,p2,p3,p4,p5\na,0.1,0.1,0.1,0.2,0.5\n");
    ProviderConfig cfg;
    cfg.kind = ProviderKind::external_file;
    cfg.external_sentiments_path = p;
    std::vector<PromptJob> jobs = {job("a", "x"), job("b", "y")};
    auto batch = score_batch(jobs, cfg);
    auto rec = parse_response(batch.responses[0]);
    REQUIRE(rec.status == ParseStatus::parsed);
    CHECK(rec.sentiment_probs[4] == doctest::Approx(0.5));
    CHECK_FALSE(rec.has_advantage);
    CHECK_FALSE(batch.responses[1].ok);
}

TEST_CASE("remote provider: request shape, retry, auth abort, replay closure") {
    httplib::Server srv;
    std::atomic<int> hits{0};
    std::atomic<bool> fail_once{false};
    std::atomic<bool> reject_auth{false};
    json last_request;
    std::mutex req_mutex;

    srv.Post("/v1/chat/completions",
             [&](const httplib::Request& req, httplib::Response& res) {
                 ++hits;
                 if (reject_auth.load()) {
                     res.status = 401;
                     return;
                 }
                 if (fail_once.exchange(false)) {
                     res.status = 500;
                     return;
                 }
                 {
                     std::lock_guard<std::mutex> lock(req_mutex);
                     last_request = json::parse(req.body);
                 }
                 json reply;
                 reply["choices"] =
                     json::array({json{{"message", json{{"content", "NA"}}}}});
                 res.set_content(reply.dump(), "application/json");
             });
    int port = srv.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { srv.listen_after_bind(); });

    setenv("STOCKSENT_TEST_KEY", "sk-test", 1);
    ProviderConfig cfg;
    cfg.kind = ProviderKind::remote_chat;
    cfg.endpoint_url = "http://127.0.0.1:" + std::to_string(port) +
                       "/v1/chat/completions";
    cfg.api_key_env = "STOCKSENT_TEST_KEY";
    cfg.max_concurrency = 2;
    cfg.retry_limit = 2;
    cfg.backoff_base = std::chrono::milliseconds(5);
    cfg.replay_cache_path = temp_path("remote_replay.jsonl");

    SUBCASE("a successful request carries model, messages and temperature") {
        auto batch = score_batch(std::vector<PromptJob>{job("a", "hello")}, cfg);
        REQUIRE(batch.responses[0].ok);
        CHECK(batch.responses[0].text == "NA");
        CHECK(batch.responses[0].attempt_count == 1);
        std::lock_guard<std::mutex> lock(req_mutex);
        CHECK(last_request["model"] == "gpt-4");
        CHECK(last_request["temperature"] == 0.0);
        REQUIRE(last_request["messages"].size() == 2);
        CHECK(last_request["messages"][0]["role"] == "system");
        CHECK(last_request["messages"][1]["role"] == "user");
        std::string user = last_request["messages"][1]["content"];
        CHECK(user.find("```hello```") != std::string::npos);
    }

    SUBCASE("a 500 is retried and succeeds on the second attempt") {
        fail_once.store(true);
        auto batch = score_batch(std::vector<PromptJob>{job("a", "hello")}, cfg);
        REQUIRE(batch.responses[0].ok);
        CHECK(batch.responses[0].attempt_count == 2);
    }

    SUBCASE("authentication rejection aborts the batch") {
        reject_auth.store(true);
        std::vector<PromptJob> jobs = {job("a", "x"), job("b", "y")};
        CHECK_THROWS_AS(score_batch(jobs, cfg), AuthError);
        reject_auth.store(false);
    }

    SUBCASE("a recorded run replays to identical records offline") {
        std::vector<PromptJob> jobs = {job("a", "x"), job("b", "y")};
        auto remote = score_batch(jobs, cfg);
        REQUIRE(remote.responses[0].ok);
        REQUIRE(std::filesystem::exists(cfg.replay_cache_path));

        ProviderConfig replay_cfg;
        replay_cfg.kind = ProviderKind::replay;
        replay_cfg.replay_cache_path = cfg.replay_cache_path;
        auto replayed = score_batch(jobs, replay_cfg);
        auto rec_remote = parse_all(remote.responses);
        auto rec_replayed = parse_all(replayed.responses);
        CHECK(rec_remote == rec_replayed);
    }

    SUBCASE("a missing key environment variable is a config error") {
        ProviderConfig bad = cfg;
        bad.api_key_env = "STOCKSENT_NO_SUCH_ENV";
        CHECK_THROWS_AS(score_batch(std::vector<PromptJob>{job("a", "x")}, bad),
                        ConfigError);
    }

    srv.stop();
    server_thread.join();
}
