#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <thread>

#include "mocot/backend/mock_backend.hpp"
#include "mocot/harness/dataset.hpp"
#include "mocot/pipeline/pipeline.hpp"
#include "support/stage_router.hpp"

using namespace mocot;
using namespace mocot::pipeline;
using parse::OptionLabel;
using testing_support::fenced;
using testing_support::StageRouter;

namespace {

StageConfig scripted_config(int retries = 3) {
  StageConfig config;
  config.max_verify_retries = retries;
  config.retry = {1, std::chrono::milliseconds(0), 1.0, std::chrono::milliseconds(1000)};
  return config;
}

std::string plan_reply(std::initializer_list<const char*> questions) {
  nlohmann::json q = nlohmann::json::array();
  for (const char* question : questions) q.push_back(question);
  return fenced(nlohmann::json{{"cot", "split it"}, {"sub_questions", q}}.dump());
}

std::string meta_reply(const std::string& answer, const std::string& fir = "fir") {
  return fenced(nlohmann::json{{"cot1", "dtr"}, {"cot2", fir}, {"answer", answer}}.dump());
}

std::string verdict(const std::string& matched, bool consistent, const std::string& corrected = "") {
  return fenced(nlohmann::json{{"Matched Answer", matched},
                               {"Is Consistent", consistent},
                               {"Justification", "because"},
                               {"Corrected CoT2", corrected}}
                    .dump());
}

char claimed(const std::string& checker_user) { return checker_user[checker_user.find("Final answer: ") + 14]; }

/// Planner with two questions, executors echo, meta answers `first` and
/// `second` after a rejection, checker follows `checker`.
StageRouter standard_router(const std::string& first, const std::string& second,
                            std::function<std::string(char)> checker) {
  StageRouter router;
  router.on("planner_verbatim", [](const std::string&) { return plan_reply({"What is shown?", "What does it mean?"}); })
      .on("executor",
          [](const std::string& user) {
            return fenced(nlohmann::json{{"cot", "look"}, {"answer", "ans:" + user.substr(10)}}.dump());
          })
      .on("meta",
          [first, second](const std::string& user) {
            return user.find("A logic checker rejected") == std::string::npos ? meta_reply(first, "fir-1")
                                                                              : meta_reply(second, "fir-2");
          })
      .on("checker", [checker](const std::string& user) { return checker(claimed(user)); });
  return router;
}

}  // namespace

TEST(Prompts, EmbeddedMatchAssetFiles) {
  const auto& builtin = PromptLibrary::builtin();
  const auto names = builtin.names();
  EXPECT_EQ(names.size(), 11u);
  for (const auto& name : names) {
    std::ifstream in(std::filesystem::path(MOCOT_TEST_DATA) / ".." / "prompts" / (name + ".txt"), std::ios::binary);
    ASSERT_TRUE(in) << name;
    std::stringstream text;
    text << in.rdbuf();
    auto expected = text.str();
    if (!expected.empty() && expected.back() == '\n') expected.pop_back();  // the embedder drops one final newline
    EXPECT_EQ(builtin.get(name), expected) << name;
  }
  EXPECT_THROW(builtin.get("no_such_prompt"), std::out_of_range);
}

TEST(Prompts, DirectoryOverridesFallBackToBuiltin) {
  const auto dir = testing_support::temp_dir("prompts");
  std::ofstream(dir / "meta.txt") << "custom meta";
  const auto library = PromptLibrary::from_directory(dir);
  EXPECT_EQ(library.get("meta"), "custom meta");
  EXPECT_EQ(library.get("executor"), PromptLibrary::builtin().get("executor"));
}

TEST(Prompts, StageContractsAppearInPrompts) {
  const auto& p = PromptLibrary::builtin();
  EXPECT_NE(p.get("planner_verbatim").find("up to 4"), std::string::npos);
  EXPECT_NE(p.get("checker").find("Matched Answer"), std::string::npos);
  EXPECT_NE(p.get("judge_usr").find("<NONE>"), std::string::npos);
  EXPECT_NE(p.get("memecap").find("resilience"), std::string::npos);
}

TEST(Messages, UserTextFormats) {
  const auto instance = testing_support::sample_instance();
  EXPECT_EQ(planner_user_text(instance),
            "Question: Why is the comic funny?\nOptions:\nA. The dog talks\nB. The sign is upside down\n"
            "C. The cat works\nD. Nothing happens\n");
  EXPECT_EQ(executor_user_text({"What is shown?", parse::SubgoalType::visual, parse::TypeProvenance::heuristic}),
            "Question: What is shown?");
  const std::vector<SubStep> steps = {
      {{"What is shown?", parse::SubgoalType::visual, parse::TypeProvenance::heuristic}, {"look", "a sign"}}};
  parse::CheckerVerdict rejected{OptionLabel('C'), false, "j", ""};
  const auto meta = meta_user_text(instance, steps, &rejected);
  EXPECT_NE(meta.find("\nSub-questions and sub-answers:\n1. [Visual] What is shown?\n   Answer: a sign\n"
                      "   Reasoning: look\n"),
            std::string::npos);
  EXPECT_NE(meta.find("Checker's matched answer: C\nChecker's justification: j\n"), std::string::npos);
  EXPECT_EQ(meta_user_text(instance, steps, nullptr).find("logic checker"), std::string::npos);
  EXPECT_EQ(checker_user_text("because", OptionLabel('B'), instance.options),
            "Options:\nA. The dog talks\nB. The sign is upside down\nC. The cat works\nD. Nothing happens\n"
            "Final answer: B\ncot2:\nbecause");
}

TEST(Messages, ImageTravelsWithPlannerExecutorMetaButNotChecker) {
  const auto instance = testing_support::sample_instance();
  const auto config = scripted_config();
  const auto has_image = [](const std::vector<backend::ChatMessage>& messages) {
    for (const auto& m : messages)
      for (const auto& p : m.parts)
        if (p.kind() == backend::ContentPart::Kind::image) return true;
    return false;
  };
  EXPECT_TRUE(has_image(planner_messages(instance, config)));
  EXPECT_TRUE(has_image(executor_messages(instance, {"q", parse::SubgoalType::visual, {}}, config)));
  EXPECT_TRUE(has_image(meta_messages(instance, {}, nullptr, config)));
  EXPECT_FALSE(has_image(checker_messages("fir", OptionLabel('A'), instance.options, config)));
}

TEST(Plan, ThreeSubQuestions) {
  auto backend = testing_support::FnBackend::constant(plan_reply({"a", "b", "c"}));
  const auto result = plan(testing_support::sample_instance(), backend, scripted_config());
  EXPECT_EQ(result.sub_questions.size(), 3u);
}

TEST(Plan, FiveSubQuestionsIsArityError) {
  auto backend = testing_support::FnBackend::constant(plan_reply({"a", "b", "c", "d", "e"}));
  try {
    plan(testing_support::sample_instance(), backend, scripted_config());
    FAIL();
  } catch (const parse::ParseError& e) {
    EXPECT_EQ(e.kind(), parse::ParseError::Kind::arity);
    EXPECT_FALSE(e.raw().empty());
  }
}

TEST(Plan, TypedVariantIsModelDeclared) {
  auto config = scripted_config();
  config.planner_variant = PlannerVariant::typed;
  StageRouter router;
  router.on("planner_typed", [](const std::string&) {
    return fenced(R"({"cot": "c", "sub_questions": [{"question": "What is the dove for?", "type": "Symbolic"}]})");
  });
  auto backend = router.backend();
  const auto result = plan(testing_support::sample_instance(), backend, config);
  EXPECT_EQ(result.sub_questions[0].type, parse::SubgoalType::symbolic);
  EXPECT_EQ(result.sub_questions[0].provenance, parse::TypeProvenance::model_declared);
}

TEST(Execute, VerbatimFromFixtureAndProseIsParseError) {
  auto good = testing_support::FnBackend::constant(fenced(R"({"cot": "r", "answer": "a dog"})"));
  const auto result = execute(testing_support::sample_instance(), {"q", {}, {}}, good, scripted_config());
  EXPECT_EQ(result, (parse::SubResult{"r", "a dog"}));

  auto prose = testing_support::FnBackend::constant("The dog is barking.");
  try {
    execute(testing_support::sample_instance(), {"q", {}, {}}, prose, scripted_config());
    FAIL();
  } catch (const parse::ParseError& e) {
    EXPECT_EQ(e.raw(), "The dog is barking.");
  }
}

TEST(Meta, NormalizesAndRejectsOutOfOptions) {
  const auto instance = testing_support::sample_instance();
  auto lower = testing_support::FnBackend::constant(meta_reply("(c)"));
  EXPECT_EQ(meta_reason(instance, {}, lower, scripted_config()).answer, "C");
  auto plain = testing_support::FnBackend::constant(meta_reply("C"));
  EXPECT_EQ(meta_reason(instance, {}, plain, scripted_config()).answer, "C");
  auto out = testing_support::FnBackend::constant(meta_reply("E"));
  try {
    meta_reason(instance, {}, out, scripted_config());
    FAIL();
  } catch (const parse::ParseError& e) {
    EXPECT_EQ(e.kind(), parse::ParseError::Kind::label_not_in_options);
  }
}

TEST(Verify, AcceptRejectAndMissingCorrection) {
  const auto options = testing_support::sample_instance().options;
  auto accept = testing_support::FnBackend::constant(verdict("B", true));
  const auto a = verify("fir", OptionLabel('B'), options, accept, scripted_config());
  EXPECT_TRUE(a.is_consistent);
  EXPECT_EQ(a.matched_answer, OptionLabel('B'));

  auto reject = testing_support::FnBackend::constant(verdict("C", false, "fixed"));
  const auto r = verify("fir", OptionLabel('B'), options, reject, scripted_config());
  EXPECT_EQ(r.matched_answer, OptionLabel('C'));
  EXPECT_EQ(r.corrected_cot2, "fixed");

  auto omitted = testing_support::FnBackend::constant(
      fenced(R"({"Matched Answer": "B", "Is Consistent": true, "Justification": "fine"})"));
  EXPECT_TRUE(verify("fir", OptionLabel('B'), options, omitted, scripted_config()).corrected_cot2.empty());

  auto stray = testing_support::FnBackend::constant(verdict("F", true));
  EXPECT_THROW(verify("fir", OptionLabel('B'), options, stray, scripted_config()), parse::ParseError);
}

TEST(Pipeline, AcceptedOnFirstPass) {
  auto router = standard_router("B", "B", [](char c) { return verdict(std::string(1, c), true); });
  auto backend = router.backend();
  backend::Transcript transcript;
  const auto trace = run_pipeline(testing_support::sample_instance(), backend, scripted_config(), &transcript);
  EXPECT_EQ(trace.retries_used, 0);
  EXPECT_EQ(trace.termination, Termination::checker_accepted);
  EXPECT_EQ(trace.answer, OptionLabel('B'));
  EXPECT_EQ(trace.fir, "fir-1");
  EXPECT_EQ(backend.calls(), 1 + 2 + 2);
  ASSERT_EQ(transcript.size(), 5u);
  EXPECT_EQ(transcript[0].stage, "planner");
  EXPECT_EQ(transcript[1].stage, "executor");
  EXPECT_EQ(transcript[2].stage, "executor");
  EXPECT_EQ(transcript[3].stage, "meta");
  EXPECT_EQ(transcript[4].stage, "checker");
  ASSERT_EQ(trace.sub_results.size(), 2u);
  EXPECT_EQ(trace.sub_results[0].second.answer, "ans:What is shown?");
  EXPECT_EQ(trace.sub_results[1].second.answer, "ans:What does it mean?");
}

TEST(Pipeline, RejectThenRetryThenAccept) {
  // Checker matches B whatever is claimed; consistent only when the claim is B.
  auto router = standard_router("A", "B", [](char c) { return verdict("B", c == 'B'); });
  auto backend = router.backend();
  const auto trace = run_pipeline(testing_support::sample_instance(), backend, scripted_config());
  EXPECT_EQ(trace.retries_used, 1);
  EXPECT_EQ(trace.answer, OptionLabel('B'));
  EXPECT_EQ(trace.fir, "fir-2");
  EXPECT_EQ(trace.termination, Termination::checker_accepted);
  ASSERT_EQ(trace.verdicts.size(), 2u);
  EXPECT_FALSE(trace.verdicts[0].is_consistent);
  EXPECT_EQ(router.counts["meta"], 2);
  EXPECT_EQ(router.counts["checker"], 2);
}

TEST(Pipeline, ZeroBudgetFallsBackToCheckerAnswer) {
  auto router = standard_router("A", "A", [](char) { return verdict("D", false, "corrected fir"); });
  auto backend = router.backend();
  const auto trace = run_pipeline(testing_support::sample_instance(), backend, scripted_config(0));
  EXPECT_EQ(trace.answer, OptionLabel('D'));
  EXPECT_EQ(trace.fir, "corrected fir");
  EXPECT_EQ(trace.termination, Termination::budget_exhausted_checker_corrected);
  EXPECT_EQ(trace.retries_used, 0);
  EXPECT_EQ(backend.calls(), 1 + 2 + 2);
}

TEST(Pipeline, ExhaustionKeepsFirWithoutCorrection) {
  auto router = standard_router("A", "A", [](char) { return verdict("C", false); });
  auto backend = router.backend();
  const auto trace = run_pipeline(testing_support::sample_instance(), backend, scripted_config(2));
  EXPECT_EQ(trace.answer, OptionLabel('C'));
  EXPECT_EQ(trace.fir, "fir-2");
  EXPECT_EQ(trace.retries_used, 2);
  EXPECT_EQ(backend.calls(), 1 + 2 + 2 * (1 + 2));
}

TEST(Pipeline, AdoptCorrectionModeSkipsMetaRerun) {
  auto config = scripted_config(3);
  config.retry_mode = RetryMode::adopt_correction;
  auto router = standard_router("A", "A", [](char c) { return verdict("B", c == 'B', "checker fir"); });
  auto backend = router.backend();
  const auto trace = run_pipeline(testing_support::sample_instance(), backend, config);
  EXPECT_EQ(trace.answer, OptionLabel('B'));
  EXPECT_EQ(trace.fir, "checker fir");
  EXPECT_EQ(trace.retries_used, 1);
  EXPECT_EQ(trace.termination, Termination::checker_accepted);
  EXPECT_EQ(router.counts["meta"], 1);
  EXPECT_EQ(router.counts["checker"], 2);
}

TEST(Pipeline, ConcurrentExecutorsKeepPlanOrder) {
  auto config = scripted_config();
  config.concurrent_executors = true;
  StageRouter router;
  router.on("planner_verbatim", [](const std::string&) { return plan_reply({"q1", "q2", "q3", "q4"}); })
      .on("executor",
          [](const std::string& user) {
            const auto q = user.substr(10);
            std::this_thread::sleep_for(std::chrono::milliseconds(q == "q1" ? 20 : 1));
            return fenced(nlohmann::json{{"cot", "c"}, {"answer", q}}.dump());
          })
      .on("meta", [](const std::string&) { return meta_reply("A"); })
      .on("checker", [](const std::string&) { return verdict("A", true); });
  auto backend = router.backend();
  backend::Transcript transcript;
  const auto trace = run_pipeline(testing_support::sample_instance(), backend, config, &transcript);
  ASSERT_EQ(trace.sub_results.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(trace.sub_results[i].second.answer, "q" + std::to_string(i + 1));
    EXPECT_NE(transcript[1 + i].response.find("\"q" + std::to_string(i + 1) + "\""), std::string::npos);
  }
}

TEST(Pipeline, FailuresNameTheStage) {
  StageRouter router;
  router.on("planner_verbatim", [](const std::string&) { return plan_reply({"q"}); })
      .on("executor", [](const std::string&) { return std::string("no json at all"); });
  auto backend = router.backend();
  try {
    run_pipeline(testing_support::sample_instance(), backend, scripted_config());
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "executor");
    EXPECT_EQ(e.raw(), "no json at all");
    EXPECT_EQ(e.parse_kind(), parse::ParseError::Kind::no_parseable_block);
  }
}

TEST(Pipeline, OpenEndedInstancesAreRejected) {
  auto instance = testing_support::sample_instance();
  instance.options.clear();
  instance.mode = AnswerMode::open_ended;
  instance.gold = "a pun";
  auto backend = testing_support::FnBackend::constant("x");
  EXPECT_THROW(run_pipeline(instance, backend, scripted_config()), StageError);
  EXPECT_EQ(backend.calls(), 0);
}

TEST(Direct, NoCotCotAndTagged) {
  const auto instance = testing_support::sample_instance();
  const backend::BackendConfig config;
  auto no_cot = testing_support::FnBackend::constant(fenced(R"({"answer": ["A"]})"));
  const auto a = run_direct(instance, no_cot, config, DirectVariant::no_cot);
  EXPECT_EQ(a.answer, "A");
  EXPECT_FALSE(a.rationale.has_value());

  auto cot = testing_support::FnBackend::constant(fenced(R"({"cot": "the sign", "answer": "b"})"));
  const auto b = run_direct(instance, cot, config, DirectVariant::cot);
  EXPECT_EQ(b.answer, "B");
  EXPECT_EQ(b.rationale, "the sign");

  auto tagged = testing_support::FnBackend::constant("<REASONING>r</REASONING><ANSWER>D</ANSWER>");
  const auto d = run_direct(instance, tagged, config, DirectVariant::grpo_tagged);
  EXPECT_EQ(d.answer, "D");
  EXPECT_EQ(d.rationale, "r");
  EXPECT_EQ(no_cot.calls() + cot.calls() + tagged.calls(), 3);
}

TEST(Direct, OpenEndedUsesTaggedTemplate) {
  auto instance = testing_support::sample_instance();
  instance.options.clear();
  instance.mode = AnswerMode::open_ended;
  instance.gold = "the cat pretends to work";
  auto tagged = testing_support::FnBackend::constant(
      "<REASONING>CUES: cat, laptop\nINTENT: the cat pretends to work.</REASONING><ANSWER>The cat pretends to "
      "work.</ANSWER>");
  const auto result = run_direct(instance, tagged, {}, DirectVariant::grpo_tagged);
  EXPECT_EQ(result.answer, "The cat pretends to work.");
  EXPECT_THROW(run_direct(instance, tagged, {}, DirectVariant::no_cot), std::invalid_argument);
}

TEST(Trace, JsonKeys) {
  auto router = standard_router("B", "B", [](char c) { return verdict(std::string(1, c), true); });
  auto backend = router.backend();
  const auto json = to_json(run_pipeline(testing_support::sample_instance(), backend, scripted_config()));
  for (const char* key : {"id", "plan", "sub_results", "dtr", "fir", "answer", "verdicts", "retries_used", "termination"}) {
    EXPECT_TRUE(json.contains(key)) << key;
  }
  EXPECT_EQ(json["termination"], "checker-accepted");
}

// Replays the recorded fixture comics through MockBackend and compares each
// trace byte for byte with the golden file.
TEST(FixtureReplay, TracesMatchGoldenAndCallCountsAreBounded) {
  const auto dir = testing_support::data_path("fixtures/pipeline");
  const auto instances = harness::load_dataset({"fixture", dir / "dataset.jsonl", harness::DatasetFormat::mcq_jsonl, {}});
  auto mock = backend::load_mock_script(dir / "script.json");
  const auto config = scripted_config(3);

  std::ifstream golden(testing_support::data_path("golden/pipeline_traces.jsonl"));
  std::string expected;
  for (const auto& instance : instances) {
    ASSERT_TRUE(std::getline(golden, expected));
    backend::Transcript transcript;
    const auto trace = run_pipeline(instance, *mock, config, &transcript);
    EXPECT_EQ(to_json(trace).dump(), expected) << instance.id;
    const auto k = trace.plan.sub_questions.size();
    EXPECT_EQ(transcript.size(), 1 + k + 2 * (1 + trace.retries_used)) << instance.id;
    EXPECT_LE(transcript.size(), 2 + k + 2 * (1 + config.max_verify_retries)) << instance.id;
  }
}
