#include "doctest.h"
#include "stub_server.hpp"
#include "test_support.hpp"

#include "civitopic/error.hpp"
#include "civitopic/llm.hpp"
#include "civitopic/text.hpp"

using namespace civitopic;
using nlohmann::json;

namespace {

Taxonomy taxonomy() {
  return parse_taxonomy(
      R"({"Saúde":["Hospital","Vacinação","Outros em Saúde"],"Educação":["Escola","Ensino superior"],)"
      R"("Transporte":["Ônibus","Metrô"]})");
}

llm::LlmConfig config_for(const testing::StubServer& stub) {
  llm::LlmConfig c;
  c.endpoint = stub.url();
  c.model_name = "stub-model";
  c.retries = 1;
  c.timeout_seconds = 10;
  return c;
}

corpus::Document doc(std::string id, std::string text) {
  corpus::Document d;
  d.id = std::move(id);
  d.raw_text = std::move(text);
  return d;
}

json answer(const std::string& s) { return json{{"response", s}}; }

}  // namespace

TEST_SUITE("llm") {

TEST_CASE("outgoing request carries the sampling settings and a truncated document") {
  testing::StubServer stub("/api/generate", [](const json&) { return answer("Saúde, Hospital"); });
  std::string long_text;
  while (text::length(long_text) < 4000) long_text += "proposta sobre atendimento ";
  const auto cfg = config_for(stub);
  llm::HttpChatBackend backend(cfg);
  const auto r = llm::label_document(doc("p1", long_text), taxonomy(), cfg, backend);
  CHECK(r.n1 == "Saúde");
  CHECK(r.n2 == "Hospital");
  CHECK(r.raw_response == "Saúde, Hospital");

  const auto reqs = stub.requests();
  REQUIRE(reqs.size() == 1);
  CHECK(reqs[0]["temperature"].get<double>() == 0.2);
  CHECK(reqs[0]["options"]["context_tokens"].get<int>() == 2048);
  CHECK(reqs[0]["model"] == "stub-model");
  const auto sent = testing::prompt_document(reqs[0]["prompt"].get<std::string>());
  CHECK(text::length(sent) <= 1500);
  CHECK(text::length(sent) > 1500 - 12);
  CHECK(long_text.starts_with(sent));
  const std::string prompt = reqs[0]["prompt"];
  CHECK(prompt.find("Saúde | Educação | Transporte") != std::string::npos);
  CHECK(prompt.find("Hospital | Vacinação | Outros em Saúde | Escola") != std::string::npos);
}

TEST_CASE("short documents are sent whole") {
  testing::StubServer stub("/api/generate", [](const json&) { return answer("Educação, Escola"); });
  auto cfg = config_for(stub);
  llm::HttpChatBackend backend(cfg);
  llm::label_document(doc("p1", "Mais escolas | no bairro"), taxonomy(), cfg, backend);
  CHECK(testing::prompt_document(stub.requests()[0]["prompt"]) == "Mais escolas \\| no bairro");
}

TEST_CASE("responses are validated against the option lists") {
  const auto tax = taxonomy();
  auto parse = [&](std::string_view s) { return llm::parse_label_response(s, tax); };
  CHECK(parse("Saúde, Hospital").n1 == "Saúde");
  CHECK(parse("  Transporte ,  Metrô \n").n2 == "Metrô");
  // Case and accents are forgiven.
  CHECK(parse("saude, HOSPITAL").n1 == "Saúde");
  CHECK(parse("saude, HOSPITAL").n2 == "Hospital");
  // A single unambiguous option inside extra words.
  CHECK(parse("Nível 1: Educação, Nível 2: Ensino superior.").n2 == "Ensino superior");
  CHECK(parse("Nível 1: Educação, Nível 2: Ensino superior.").n1 == "Educação");
  // Unknown terms.
  const auto bad = parse("Astronomia, Planetas");
  CHECK(bad.n1 == llm::kNoMatch);
  CHECK(bad.n2 == llm::kNoMatch);
  CHECK(parse("Saúde, Planetas").n1 == "Saúde");
  CHECK(parse("Saúde, Planetas").n2 == llm::kNoMatch);
  CHECK(parse("").n1 == llm::kNoMatch);
  // Two candidate options on one side is ambiguous.
  CHECK(parse("Saúde e Educação, Escola").n1 == llm::kNoMatch);
}

TEST_CASE("messages API shapes") {
  llm::ChatRequest req{"m", "oi", 0.2, 2048};
  const auto body = llm::request_body(req, llm::ChatApi::messages);
  CHECK(body["messages"][0]["role"] == "user");
  CHECK(body["messages"][0]["content"] == "oi");
  CHECK_FALSE(body.contains("prompt"));
  CHECK(llm::reply_text(json{{"message", {{"content", "a"}}}}, llm::ChatApi::messages) == "a");
  CHECK(llm::reply_text(json{{"choices", {{{"message", {{"content", "b"}}}}}}}, llm::ChatApi::messages) == "b");
  CHECK_THROWS_AS(llm::reply_text(json{{"text", "x"}}, llm::ChatApi::prompt), Error);
}

TEST_CASE("labeler caches by model and text") {
  testing::TempDir dir("llm");
  testing::StubServer stub("/api/generate", [](const json&) { return answer("Transporte, Ônibus"); });
  auto cfg = config_for(stub);
  cfg.cache_dir = dir / "cache";
  llm::HttpChatBackend backend(cfg);
  {
    llm::Labeler labeler(taxonomy(), cfg, backend);
    const std::vector<corpus::Document> docs{doc("a", "mais ônibus"), doc("b", "mais ônibus"), doc("c", "outra")};
    const auto results = labeler.label_all(docs);
    REQUIRE(results.size() == 3);
    CHECK(results[1].doc_id == "b");
    CHECK(results[1].n2 == "Ônibus");
    CHECK(labeler.network_calls() == 2);
  }
  llm::Labeler again(taxonomy(), cfg, backend);
  again.label(doc("z", "mais ônibus"));
  CHECK(again.network_calls() == 0);
  CHECK(stub.calls() == 2);
}

TEST_CASE("transient failures are retried, persistent ones name the document") {
  testing::StubServer stub("/api/generate", [](const json&) { return answer("Saúde, Hospital"); });
  auto cfg = config_for(stub);
  llm::HttpChatBackend backend(cfg);
  llm::Labeler labeler(taxonomy(), cfg, backend);
  stub.fail_next(1);
  CHECK(labeler.label(doc("ok", "texto")).n1 == "Saúde");
  stub.fail_next(5);
  try {
    labeler.label(doc("p77", "outro texto"));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::transport);
    CHECK(std::string(e.what()).find("p77") != std::string::npos);
  }
}

TEST_CASE("labels csv round trip") {
  testing::TempDir dir("llm");
  const std::vector<llm::LabelResult> labels{{"a", "Saúde", "Hospital", "Saúde, Hospital"},
                                             {"b", "Educação", "no_match", "Educação, x"}};
  llm::write_labels_csv(labels, (dir / "l.csv").string());
  const auto back = llm::read_labels_csv((dir / "l.csv").string());
  REQUIRE(back.size() == 2);
  CHECK(back[1].n2 == "no_match");
  CHECK(io::read_file(dir / "l.csv").find(text::sha256_hex("Saúde, Hospital")) != std::string::npos);
}

TEST_CASE("topic naming") {
  int calls = 0;
  testing::StubServer stub("/api/generate", [&](const json&) {
    ++calls;
    if (calls == 1) return answer(R"(Aqui está: {"0": "Saúde pública", "1": "um nome longo demais aqui"})");
    return answer(R"({"1": "Transporte"})");
  });
  auto cfg = config_for(stub);
  llm::HttpChatBackend backend(cfg);

  topics::TopicRepresentation outliers{-1, 4, {}, "-1_x", std::nullopt};
  topics::TopicRepresentation t0{0, 9, {{"hospital", 1.0}}, "0_hospital", std::nullopt};
  topics::TopicRepresentation t1{1, 7, {{"onibus", 1.0}}, "1_onibus", std::nullopt};
  topics::TopicRepresentation t2{2, 5, {{"escola", 1.0}}, "2_escola", std::nullopt};

  const auto only_outliers = llm::name_topics({outliers}, cfg, backend);
  CHECK(only_outliers.at(-1) == "Outliers");
  CHECK(stub.calls() == 0);

  const auto names = llm::name_topics({outliers, t0, t1, t2}, cfg, backend);
  CHECK(names.at(-1) == "Outliers");
  CHECK(names.at(0) == "Saúde pública");
  CHECK(names.at(1) == "Transporte");
  CHECK(names.at(2) == "2_escola");
  CHECK(stub.calls() == 2);
  for (const auto& r : stub.requests()) CHECK(std::string(r["prompt"]).find("Tópico -1") == std::string::npos);
}

TEST_CASE("config from json") {
  const auto c = llm::config_from_json(json{{"endpoint", "http://x/y"}, {"model", "m"}, {"api", "messages"}});
  CHECK(c.temperature == 0.2);
  CHECK(c.context_tokens == 2048);
  CHECK(c.truncate_chars == 1500);
  CHECK(c.api == llm::ChatApi::messages);
  CHECK_THROWS_AS(llm::config_from_json(json{{"model", "m"}}), Error);
}

}
