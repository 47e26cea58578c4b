#include "riskmdp/model_io.hpp"

#include "test_models.hpp"

#include <doctest.h>

#include <fstream>

using namespace riskmdp;
using nlohmann::json;

namespace {

constexpr const char* kChain = R"({
  "kind": "homogeneous",
  "name": "chain",
  "states": ["0", "1"],
  "actions": ["a"],
  "rates": {"1": {"a": {"0": 2}}},
  "costs": {"1": {"a": 1}}
})";

template <class E>
std::string error_of(const std::string& text) {
    try {
        (void)parse_model(text);
    } catch (const E& e) {
        return e.what();
    }
    return "<no error>";
}

json chain_json() { return json::parse(kChain); }

}  // namespace

TEST_CASE("loading a homogeneous model") {
    const ModelDoc doc = parse_model(kChain);
    CHECK(doc.kind == ModelKind::homogeneous);
    CHECK(doc.name == "chain");
    const auto& m = std::get<CtmdpModel>(doc.model);
    CHECK(m == testing::absorbing_chain());
}

TEST_CASE("time-varying entries") {
    auto j = chain_json();
    j["kind"] = "time-varying";
    j["rates"]["1"]["a"]["0"] = json::parse(R"({"time_pieces": [{"until": 1, "coeffs": [1, 2]}, {"coeffs": [3], "decay": 0.5}]})");
    const ModelDoc doc = model_from_json(j);
    const auto& m = std::get<TimeVaryingModel>(doc.model);
    CHECK(m.rate(0.5, 1, 0, 0) == 2.0);
    CHECK(m.rate(3.0, 1, 0, 0) == doctest::Approx(3.0 * std::exp(-1.0)));
    CHECK(m.breakpoints() == std::vector<double>{1.0});
}

TEST_CASE("parse errors carry line and column") {
    const auto msg = error_of<ParseError>("{\n  \"kind\": \"homogeneous\",\n  oops\n}");
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("column") != std::string::npos);
    CHECK_THROWS_AS((void)load_model(testing::scratch_path("missing.json")), ParseError);
}

TEST_CASE("schema errors carry the field path") {
    auto j = chain_json();
    j["kind"] = "weird";
    CHECK(error_of<SchemaError>(j.dump()).rfind("kind:", 0) == 0);

    j = chain_json();
    j["rates"]["1"]["a"]["nowhere"] = 1;
    CHECK(error_of<SchemaError>(j.dump()).find("rates/1/a/nowhere") != std::string::npos);

    j = chain_json();
    j["costs"]["1"]["a"] = "cheap";
    CHECK(error_of<SchemaError>(j.dump()).find("costs/1/a") != std::string::npos);

    j = chain_json();
    j.erase("states");
    CHECK(error_of<SchemaError>(j.dump()).find("states") != std::string::npos);

    j = chain_json();
    j["rates"]["1"]["a"]["0"] = json::parse(R"({"time_pieces": [{"coeffs": [1]}, {"coeffs": [2]}]})");
    CHECK(error_of<SchemaError>(j.dump()).find("time_pieces/0/until") != std::string::npos);
}

TEST_CASE("invariant errors list every violation") {
    auto j = chain_json();
    j["rates"]["1"]["a"]["0"] = -2;
    j["costs"]["0"] = {{"a", -1}};
    try {
        (void)model_from_json(j);
        FAIL("expected an invariant error");
    } catch (const InvariantError& e) {
        REQUIRE(e.violations().size() == 2);
        CHECK(e.violations()[0].path == "costs/0/a");
        CHECK(e.violations()[1].path == "rates/1/a/0");
    }

    j = chain_json();
    j["kind"] = "discounted";
    CHECK_THROWS_AS((void)model_from_json(j), InvariantError);
    j["alpha"] = 0.5;
    CHECK(model_from_json(j).alpha == 0.5);

    j = chain_json();
    j["kind"] = "finite-horizon";
    j["T"] = 2;
    j["terminal_g"] = {{"1", -1}};
    CHECK_THROWS_AS((void)model_from_json(j), InvariantError);
}

TEST_CASE("negative decay is a schema problem, not a crash") {
    auto j = chain_json();
    j["kind"] = "time-varying";
    j["costs"]["1"]["a"] = json::parse(R"({"time_pieces": [{"coeffs": [1], "decay": -1}]})");
    CHECK_THROWS_AS((void)model_from_json(j), ModelLoadError);
}

TEST_CASE("save and load reproduce the digest") {
    auto j = chain_json();
    j["kind"] = "finite-horizon";
    j["T"] = 1.5;
    j["alpha"] = 0.25;
    j["terminal_g"] = {{"0", 0.0}, {"1", 0.5}};
    j["costs"]["1"]["a"] = json::parse(R"({"time_pieces": [{"until": 0.5, "coeffs": [1, -0.5, 0.25]}, {"terms": [{"coeffs": [1]}, {"coeffs": [2, 1], "decay": 3}]}]})");
    const ModelDoc doc = model_from_json(j);
    const auto path = testing::scratch_path("roundtrip.json");
    save_model(doc, path);
    const ModelDoc back = load_model(path);
    CHECK(back == doc);
    CHECK(model_digest(back) == model_digest(doc));
    CHECK(model_digest(doc).size() == 16);

    auto other = chain_json();
    other["costs"]["1"]["a"] = 1.0000000001;
    CHECK(model_digest(model_from_json(other)) != model_digest(model_from_json(chain_json())));
}

TEST_CASE("random models survive a round trip bit-exactly") {
    std::mt19937_64 gen(8);
    for (int i = 0; i < 30; ++i) {
        ModelDoc doc;
        doc.model = testing::random_model(gen);
        const ModelDoc back = parse_model(model_to_json(doc).dump());
        CHECK(back == doc);
        CHECK(model_digest(back) == model_digest(doc));
    }
}

TEST_CASE("policies and value tables") {
    const std::vector<std::string> S{"0", "1"};
    const std::vector<std::string> A{"a", "b"};
    const Policy f{StationaryPolicy{{1, 0}}};
    CHECK(policy_from_json(policy_to_json(f, S, A), S, A) == f);
    const Policy g{MarkovPolicyGrid{{0.0, 0.5}, {{0, 1}, {1, 1}}}};
    CHECK(policy_from_json(policy_to_json(g, S, A), S, A) == g);
    CHECK(policy_from_json(json{{"policy", policy_to_json(f, S, A)}}, S, A) == f);
    CHECK_THROWS_AS((void)policy_from_json(json::parse(R"({"kind":"stationary","actions":{"0":"zzz","1":"a"}})"), S, A),
                    SchemaError);
    CHECK_THROWS_AS((void)policy_from_json(json::parse(R"({"kind":"stationary","actions":{"0":"a"}})"), S, A),
                    SchemaError);

    const ValueTable v(std::vector<ExtReal>{1.0, ExtReal::infinity()});
    const json jv = values_to_json(v, S);
    CHECK(jv["1"] == "inf");
    CHECK(values_from_json(jv, S) == v);
    CHECK(values_from_json(json{{"values", jv}}, S) == v);
}
