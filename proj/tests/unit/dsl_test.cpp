#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "chargebt/dsl/document.hpp"
#include "chargebt/dsl/validate.hpp"
#include "chargebt/mission/trees.hpp"
#include "support/reference_interpreter.hpp"

namespace dsl = chargebt::dsl;
namespace bt = chargebt::bt;
using namespace bt::build;

namespace {

const std::string kAssets = CHARGEBT_ASSETS_DIR;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int line_of(const std::string& text, const std::string& needle) {
  const auto at = text.find(needle);
  if (at == std::string::npos) return -1;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(at), '\n'));
}

bool has_code(const std::vector<dsl::Diagnostic>& ds, const std::string& code) {
  return std::any_of(ds.begin(), ds.end(), [&](const auto& d) { return d.code == code; });
}

constexpr const char* kMinimal = R"(<?xml version="1.0"?>
<TreeDocument format="1">
  <Blackboard>
    <Key name="target" type="hole"/>
  </Blackboard>
  <Manifest>
    <Condition name="Done"/>
    <Action name="Work">
      <Port name="hole" type="hole"/>
    </Action>
  </Manifest>
  <Tree name="Main">
    <Fallback id="root" label="Do it">
      <Condition id="done" name="Done"/>
      <Action id="work" name="Work" ports="hole=target"/>
    </Fallback>
  </Tree>
</TreeDocument>
)";

}  // namespace

TEST(Dsl, MinimalDocument) {
  const auto doc = dsl::parse(kMinimal);
  ASSERT_EQ(doc.trees.size(), 1u);
  const auto& root = doc.trees[0].root;
  EXPECT_EQ(root.kind, bt::NodeKind::kFallback);
  EXPECT_EQ(root.label, "Do it");
  ASSERT_EQ(root.children.size(), 2u);
  EXPECT_EQ(root.children[1].ports, (std::vector<bt::PortBinding>{{"hole", "target"}}));
  EXPECT_EQ(root.children[1].location.line, 15);
  EXPECT_TRUE(dsl::validate(doc).empty());
}

TEST(Dsl, ChargingAssetHasParallelRootWithTwoArms) {
  const auto doc = dsl::parse_file(kAssets + "/charging.tree.xml");
  const auto* t = doc.find_tree("Charging");
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->root.kind, bt::NodeKind::kParallel);
  EXPECT_FALSE(t->root.success_threshold.has_value());
  ASSERT_EQ(t->root.children.size(), 2u);
  // First arm: explosive handling, guarded by the preparation queue goal.
  const auto& arm = t->root.children[0];
  ASSERT_EQ(arm.kind, bt::NodeKind::kFallback);
  EXPECT_EQ(arm.children[0].behavior, "PreparationQueueEmpty");
}

TEST(Dsl, ShippedCorpusIsCleanAndMatchesBuiltInTrees) {
  const auto shipped = dsl::load_directory(kAssets);
  EXPECT_TRUE(dsl::validate(shipped).empty());
  const auto built = chargebt::mission::build_mission_trees();
  for (const char* name : {"PreScan", "DetectHoles", "ChargePlan", "Charging"}) {
    SCOPED_TRACE(name);
    ASSERT_NE(shipped.find_tree(name), nullptr);
    EXPECT_EQ(*shipped.find_tree(name), *built.find_tree(name));
  }
  for (const auto& b : built.manifest) {
    ASSERT_NE(shipped.find_behavior(b.name), nullptr) << b.name;
    EXPECT_EQ(*shipped.find_behavior(b.name), b);
  }
}

TEST(Dsl, SerializeParseIdentityOnShippedFiles) {
  for (const char* file : {"/charging.tree.xml", "/setup.tree.xml"}) {
    SCOPED_TRACE(file);
    const std::string text = slurp(kAssets + file);
    const auto doc = dsl::parse(text);
    EXPECT_EQ(dsl::serialize(doc), text);
    EXPECT_EQ(dsl::parse(dsl::serialize(doc)), doc);
  }
}

TEST(Dsl, RoundTripRandomTrees) {
  chargebt::testing::RandomTreeGenerator gen(77);
  for (int i = 0; i < 200; ++i) {
    chargebt::testing::Scripts scripts;
    dsl::TreeDocument doc;
    doc.manifest = {{"ScriptedCondition", bt::BehaviorKind::kCondition, {}, {}},
                    {"ScriptedAction", bt::BehaviorKind::kAction, {}, {}}};
    auto root = gen.tree(5, scripts);
    root.label = "odd <label> & \"quotes\" 'too'";
    doc.trees.push_back({"T" + std::to_string(i), std::move(root), {}});
    ASSERT_EQ(dsl::parse(dsl::serialize(doc)), doc) << dsl::serialize(doc);
  }
}

TEST(Dsl, UnclosedElementReportsItsLine) {
  std::string text = slurp(kAssets + "/charging.tree.xml");
  const std::string victim = R"(<Action id="feed_hose" name="FeedHose" ports="hole=current_hole"/>)";
  const int expected_line = line_of(text, victim);
  ASSERT_GT(expected_line, 0);
  text.replace(text.find(victim), victim.size(), R"(<Action id="feed_hose" name="FeedHose" ports="hole=current_hole">)");
  try {
    dsl::parse(text);
    FAIL() << "parse accepted an unclosed element";
  } catch (const dsl::SyntaxError& e) {
    EXPECT_EQ(e.line(), expected_line) << e.what();
    EXPECT_NE(std::string(e.what()).find("Action"), std::string::npos);
  }
}

TEST(Dsl, SyntaxErrorsCarryPositions) {
  EXPECT_THROW(dsl::parse("<TreeDocument format=\"1\"><Tree name=\"A\">"), dsl::SyntaxError);
  EXPECT_THROW(dsl::parse("<TreeDocument format=\"2\"/>"), dsl::UnsupportedFormat);
  try {
    dsl::parse("<TreeDocument format=\"1\">\n<Tree name=\"A\"><Action id=\"x\" name=\"W\"/></Tree>\n"
               "<Tree name=\"A\"><Action id=\"y\" name=\"W\"/></Tree></TreeDocument>");
    FAIL();
  } catch (const dsl::DuplicateTreeName& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(dsl::parse("<TreeDocument format=\"1\"><Tree name=\"A\"><Sequence id=\"x\">"
                          "<Action id=\"x\" name=\"W\"/></Sequence></Tree></TreeDocument>"),
               dsl::DuplicateNodeId);
}

TEST(Dsl, MemorySequenceUnderChargingParallelWarns) {
  auto doc = chargebt::mission::build_mission_trees();
  ASSERT_TRUE(dsl::validate(doc).empty());
  auto charging = std::find_if(doc.trees.begin(), doc.trees.end(), [](const auto& t) { return t.name == "Charging"; });
  ASSERT_NE(charging, doc.trees.end());
  charging->root.children.push_back(memory_sequence("remembered", {condition("c", "HoleCharged", {{"hole", "current_hole"}})}));
  const auto ds = dsl::validate(doc);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].code, "memory-under-parallel");
  EXPECT_EQ(ds[0].severity, dsl::Severity::kWarning);
  EXPECT_EQ(ds[0].node_id, "remembered");
  EXPECT_EQ(dsl::exit_code(ds), 1);
}

TEST(Dsl, ValidatorErrors) {
  auto base = dsl::parse(kMinimal);
  auto with_root = [&](bt::TreeNode root) {
    auto d = base;
    d.trees[0].root = std::move(root);
    return dsl::validate(d);
  };
  EXPECT_TRUE(has_code(with_root(parallel("p", {condition("a", "Done"), condition("b", "Done")}, 3)),
                       "threshold-exceeds-children"));
  EXPECT_TRUE(has_code(with_root(parallel("p", {condition("a", "Done")}, 0)), "invalid-threshold"));
  EXPECT_TRUE(has_code(with_root(sequence("s", {})), "empty-control"));
  EXPECT_TRUE(has_code(with_root(action("a", "Nope")), "unknown-behavior"));
  EXPECT_TRUE(has_code(with_root(action("a", "Done")), "kind-mismatch"));
  EXPECT_TRUE(has_code(with_root(action("a", "Work")), "missing-port"));
  EXPECT_TRUE(has_code(with_root(action("a", "Work", {{"hole", "nowhere"}})), "undeclared-key"));
  EXPECT_TRUE(has_code(with_root(action("a", "Work", {{"hole", "target"}, {"extra", "target"}})), "unknown-port"));
  EXPECT_TRUE(has_code(with_root(retry("r", 0, condition("c", "Done"))), "retry-attempts"));
  EXPECT_TRUE(has_code(with_root(fallback("f", {action("a", "Work", {{"hole", "target"}}), condition("c", "Done")})),
                       "condition-after-action"));
  auto errors = with_root(parallel("p", {condition("a", "Done")}, 5));
  EXPECT_EQ(dsl::exit_code(errors), 2);
}

TEST(Dsl, MergeRejectsConflicts) {
  auto a = dsl::parse(kMinimal);
  auto b = a;
  EXPECT_THROW(dsl::merge({a, b}), dsl::ParseError);
  b.trees[0].name = "Other";
  b.blackboard[0].type = bt::ValueType::kFlag;
  EXPECT_THROW(dsl::merge({a, b}), dsl::ParseError);
}
