#include <gtest/gtest.h>

#include <functional>

#include "chargebt/bt/errors.hpp"
#include "chargebt/bt/runtime.hpp"
#include "support/reference_interpreter.hpp"

namespace chargebt::bt {
namespace {

using namespace build;

// Scripted-leaf fixture: leaves return script[tick % len] and count
// starts/halts per node.
class EngineTest : public ::testing::Test {
 protected:
  void SetUp() override { leaves_.scripts = &scripts_; leaves_.install(registry_); }

  TreeRuntime& make(const TreeNode& root) {
    tree_ = Tree::compile(root);
    runtime_ = std::make_unique<TreeRuntime>(tree_, registry_, blackboard_);
    return *runtime_;
  }

  testing::Scripts scripts_;
  testing::ScriptedLeaves leaves_;
  BehaviorRegistry registry_;
  Blackboard blackboard_;
  std::shared_ptr<const Tree> tree_;
  std::unique_ptr<TreeRuntime> runtime_;
};

constexpr Status S = Status::kSuccess;
constexpr Status F = Status::kFailure;
constexpr Status R = Status::kRunning;

TEST_F(EngineTest, SingleConditionRoot) {
  scripts_["root"] = {S};
  auto& rt = make(condition("root", "ScriptedCondition"));
  const TickResult r = rt.tick_root();
  EXPECT_EQ(r.status, S);
  ASSERT_EQ(r.trace.entries.size(), 1u);
  EXPECT_EQ(r.trace.entries[0], (TraceEntry{"root", S}));
}

TEST_F(EngineTest, FallbackPassesControlPastFailedCondition) {
  scripts_["c"] = {F};
  scripts_["a"] = {R};
  auto& rt = make(fallback("root", {condition("c", "ScriptedCondition"), action("a", "ScriptedAction")}));
  const TickResult r = rt.tick_root();
  EXPECT_EQ(r.status, R);
  EXPECT_EQ(r.trace.entries, (std::vector<TraceEntry>{{"root", R}, {"c", F}, {"a", R}}));
  EXPECT_TRUE(rt.is_running("a"));
}

TEST_F(EngineTest, SequencePreemptsRunningActionWhenGuardFlips) {
  scripts_["guard"] = {S, F, F};
  scripts_["work"] = {R};
  auto& rt = make(sequence("root", {condition("guard", "ScriptedCondition"), action("work", "ScriptedAction")}));
  EXPECT_EQ(rt.tick_root().status, R);
  EXPECT_EQ(leaves_.halts["work"], 0);

  const TickResult r = rt.tick_root();
  EXPECT_EQ(r.status, F);
  EXPECT_EQ(leaves_.halts["work"], 1);
  EXPECT_FALSE(r.trace.visited("work"));
  EXPECT_FALSE(rt.any_running());

  EXPECT_EQ(rt.tick_root().status, F);
  EXPECT_EQ(leaves_.halts["work"], 1);
}

TEST_F(EngineTest, FallbackHaltsLowerPriorityBranchWhenHigherOneRuns) {
  scripts_["hi"] = {F, R};
  scripts_["lo"] = {R};
  auto& rt = make(fallback("root", {action("hi", "ScriptedAction"), action("lo", "ScriptedAction")}));
  EXPECT_EQ(rt.tick_root().status, R);
  EXPECT_TRUE(rt.is_running("lo"));
  EXPECT_EQ(rt.tick_root().status, R);
  EXPECT_EQ(leaves_.halts["lo"], 1);
  EXPECT_FALSE(rt.is_running("lo"));
}

// Parallel("all") over two actions: tick 0 both report Running, tick 1 they
// report (first, second). Expected values enumerated by hand from the
// success-on-all rule and halt-on-failure.
struct ParallelCase {
  Status first, second, root;
  int halts_first, halts_second;
};

TEST_F(EngineTest, ParallelSuccessOnAllTruthTable) {
  const std::vector<ParallelCase> table = {
      {S, S, S, 0, 0}, {S, F, F, 0, 0}, {S, R, R, 0, 0},  //
      {F, S, F, 0, 1}, {F, F, F, 0, 1}, {F, R, F, 0, 1},  //
      {R, S, R, 0, 0}, {R, F, F, 1, 0}, {R, R, R, 0, 0},
  };
  for (const auto& c : table) {
    scripts_.clear();
    leaves_.halts.clear();
    scripts_["one"] = {R, c.first};
    scripts_["two"] = {R, c.second};
    auto& rt = make(parallel("root", {action("one", "ScriptedAction"), action("two", "ScriptedAction")}));
    ASSERT_EQ(rt.tick_root().status, R);
    const TickResult r = rt.tick_root();
    SCOPED_TRACE(std::string(to_string(c.first)) + "/" + std::string(to_string(c.second)));
    EXPECT_EQ(r.status, c.root);
    EXPECT_EQ(leaves_.halts["one"], c.halts_first);
    EXPECT_EQ(leaves_.halts["two"], c.halts_second);
    if (c.root != R) {
      EXPECT_FALSE(rt.any_running());
    }
  }
}

TEST_F(EngineTest, ParallelDoesNotRetickSucceededChildren) {
  scripts_["quick"] = {S};
  scripts_["slow"] = {R, R, S};
  auto& rt = make(parallel("root", {action("quick", "ScriptedAction"), action("slow", "ScriptedAction")}));
  EXPECT_EQ(rt.tick_root().status, R);
  const TickResult second = rt.tick_root();
  EXPECT_EQ(second.status, R);
  EXPECT_FALSE(second.trace.visited("quick"));
  EXPECT_EQ(rt.success_count("root"), 1u);
  EXPECT_EQ(rt.tick_root().status, S);
  EXPECT_EQ(leaves_.starts["quick"], 1);
  EXPECT_EQ(rt.success_count("root"), 0u);
}

TEST_F(EngineTest, ParallelThresholdHaltsStragglers) {
  scripts_["a"] = {S};
  scripts_["b"] = {R};
  scripts_["c"] = {R};
  auto& rt = make(parallel("root",
                           {action("b", "ScriptedAction"), action("a", "ScriptedAction"), action("c", "ScriptedAction")},
                           1));
  const TickResult r = rt.tick_root();
  EXPECT_EQ(r.status, S);
  // b was ticked and left Running before a decided; c never started.
  EXPECT_EQ(leaves_.halts["b"], 1);
  EXPECT_EQ(leaves_.halts.count("c"), 0u);
  EXPECT_FALSE(r.trace.visited("c"));
}

TEST_F(EngineTest, MemorySequenceSkipsCompletedChildren) {
  scripts_["first"] = {S};
  scripts_["second"] = {R, R, S};
  auto& rt = make(memory_sequence("root", {action("first", "ScriptedAction"), action("second", "ScriptedAction")}));
  EXPECT_EQ(rt.tick_root().status, R);
  EXPECT_EQ(rt.memory_index("root"), 1u);
  const TickResult second = rt.tick_root();
  EXPECT_FALSE(second.trace.visited("first"));
  EXPECT_EQ(rt.tick_root().status, S);
  EXPECT_EQ(rt.memory_index("root"), 0u);
  EXPECT_EQ(leaves_.starts["first"], 1);
}

TEST_F(EngineTest, ReactiveSequenceRevisitsCompletedChildren) {
  scripts_["first"] = {S};
  scripts_["second"] = {R, R, S};
  auto& rt = make(sequence("root", {action("first", "ScriptedAction"), action("second", "ScriptedAction")}));
  rt.tick_root();
  EXPECT_TRUE(rt.tick_root().trace.visited("first"));
  EXPECT_EQ(leaves_.starts["first"], 2);
}

TEST_F(EngineTest, MemoryFallbackResumesAtRunningChild) {
  scripts_["x"] = {F, S};
  scripts_["y"] = {R, R, F};
  auto& rt = make(memory_fallback("root", {action("x", "ScriptedAction"), action("y", "ScriptedAction")}));
  EXPECT_EQ(rt.tick_root().status, R);
  const TickResult r = rt.tick_root();
  // x would succeed now, but the memory node does not look back.
  EXPECT_FALSE(r.trace.visited("x"));
  EXPECT_EQ(rt.tick_root().status, F);
  EXPECT_EQ(rt.memory_index("root"), 0u);
}

TEST_F(EngineTest, RetryCountsFailuresAcrossTicks) {
  scripts_["flaky"] = {F, F, S};
  auto& rt = make(retry("root", 3, action("flaky", "ScriptedAction")));
  EXPECT_EQ(rt.tick_root().status, R);
  EXPECT_EQ(rt.attempts("root"), 1);
  EXPECT_EQ(rt.tick_root().status, R);
  EXPECT_EQ(rt.attempts("root"), 2);
  EXPECT_EQ(rt.tick_root().status, S);
  EXPECT_EQ(rt.attempts("root"), 0);
}

TEST_F(EngineTest, RetryGivesUpAfterBudget) {
  scripts_["broken"] = {F};
  auto& rt = make(retry("root", 2, action("broken", "ScriptedAction")));
  EXPECT_EQ(rt.tick_root().status, R);
  EXPECT_EQ(rt.tick_root().status, F);
  EXPECT_EQ(rt.attempts("root"), 0);
}

TEST_F(EngineTest, InverterSwapsTerminalStatuses) {
  scripts_["c"] = {S, F};
  auto& rt = make(inverter("root", condition("c", "ScriptedCondition")));
  EXPECT_EQ(rt.tick_root().status, F);
  EXPECT_EQ(rt.tick_root().status, S);
}

TEST_F(EngineTest, LoopBodyTurnsSuccessIntoRunning) {
  scripts_["done"] = {F, F, S};
  scripts_["work"] = {S};
  auto& rt = make(fallback("root", {condition("done", "ScriptedCondition"),
                                    loop_body("loop", action("work", "ScriptedAction"))}));
  EXPECT_EQ(rt.tick_root().status, R);
  EXPECT_EQ(rt.tick_root().status, R);
  EXPECT_EQ(leaves_.starts["work"], 2);
  EXPECT_EQ(rt.tick_root().status, S);
  EXPECT_EQ(leaves_.starts["work"], 2);
}

TEST_F(EngineTest, HaltOnIdleSubtreeSendsNothing) {
  scripts_["a"] = {S};
  auto& rt = make(sequence("root", {action("a", "ScriptedAction")}));
  rt.tick_root();
  EXPECT_TRUE(rt.halt("root").empty());
  EXPECT_TRUE(leaves_.halts.empty());
}

TEST_F(EngineTest, HaltIsIdempotentAndClearsBookkeeping) {
  scripts_["a"] = {S};
  scripts_["b"] = {R};
  scripts_["c"] = {F};
  auto& rt = make(parallel("root", {memory_sequence("mem", {action("a", "ScriptedAction"), action("b", "ScriptedAction")}),
                                    retry("retry", 5, action("c", "ScriptedAction"))}));
  EXPECT_EQ(rt.tick_root().status, R);
  EXPECT_EQ(rt.memory_index("mem"), 1u);
  EXPECT_EQ(rt.attempts("retry"), 1);

  EXPECT_EQ(rt.halt("root"), std::vector<std::string>{"b"});
  EXPECT_EQ(leaves_.halts["b"], 1);
  EXPECT_FALSE(rt.any_running());
  EXPECT_EQ(rt.memory_index("mem"), 0u);
  EXPECT_EQ(rt.attempts("retry"), 0);
  EXPECT_TRUE(rt.halt("root").empty());
  EXPECT_EQ(leaves_.halts["b"], 1);
}

TEST_F(EngineTest, HaltUnknownNodeThrows) {
  scripts_["a"] = {S};
  auto& rt = make(action("a", "ScriptedAction"));
  EXPECT_THROW(rt.halt("nope"), UnknownNodeId);
}

TEST_F(EngineTest, ResetFreshRuntimeIsNoop) {
  scripts_["a"] = {R};
  auto& rt = make(action("a", "ScriptedAction"));
  EXPECT_TRUE(rt.reset().empty());
  EXPECT_EQ(rt.tick_count(), 0u);
  EXPECT_FALSE(rt.any_running());
}

TEST_F(EngineTest, ResetMidRunBehavesLikeFirstTickAndKeepsTickCount) {
  scripts_["a"] = {S};
  scripts_["b"] = {R};
  auto& rt = make(memory_sequence("root", {action("a", "ScriptedAction"), action("b", "ScriptedAction")}));
  rt.tick_root();
  rt.tick_root();
  EXPECT_EQ(rt.reset(), std::vector<std::string>{"b"});
  EXPECT_EQ(rt.tick_count(), 2u);
  EXPECT_EQ(rt.memory_index("root"), 0u);
  const TickResult r = rt.tick_root();
  EXPECT_TRUE(r.trace.visited("a"));
  EXPECT_EQ(leaves_.starts["b"], 2);
}

TEST_F(EngineTest, UnregisteredBehaviorNamesTheNode) {
  auto& rt = make(sequence("root", {action("bad-leaf", "NoSuchSkill")}));
  try {
    rt.tick_root();
    FAIL() << "expected UnregisteredBehavior";
  } catch (const UnregisteredBehavior& e) {
    EXPECT_EQ(e.node_id(), "bad-leaf");
    EXPECT_EQ(e.behavior(), "NoSuchSkill");
  }
}

TEST_F(EngineTest, WrongBehaviorKindIsRejected) {
  auto& rt = make(action("a", "ScriptedCondition"));
  EXPECT_THROW(rt.tick_root(), MalformedTree);
}

TEST_F(EngineTest, ConditionReturningRunningIsAContractViolation) {
  registry_.register_condition("Liar", [](LeafContext&) { return Status::kRunning; });
  auto& rt = make(sequence("root", {condition("liar", "Liar")}));
  try {
    rt.tick_root();
    FAIL() << "expected ConditionReturnedRunning";
  } catch (const ConditionReturnedRunning& e) {
    EXPECT_EQ(e.node_id(), "liar");
  }
}

TEST_F(EngineTest, DuplicateRegistrationFails) {
  EXPECT_THROW(registry_.register_condition("ScriptedCondition", [](LeafContext&) { return S; }), DuplicateName);
  registry_.register_stateless_action("PumpEmulsion", [](LeafContext&) { return S; });
  scripts_["p"] = {S};
  auto& rt = make(action("p", "PumpEmulsion"));
  EXPECT_NO_THROW(rt.tick_root());
}

TEST(TreeCompile, RejectsStructuralViolations) {
  EXPECT_THROW(Tree::compile(sequence("s", {})), MalformedTree);
  EXPECT_THROW(Tree::compile(parallel("p", {action("a", "x")}, 2)), MalformedTree);
  EXPECT_THROW(Tree::compile(retry("r", 0, action("a", "x"))), MalformedTree);
  EXPECT_THROW(Tree::compile(sequence("dup", {action("dup", "x")})), MalformedTree);
  TreeNode leaf = action("a", "x");
  leaf.children.push_back(action("b", "x"));
  EXPECT_THROW(Tree::compile(leaf), MalformedTree);
  TreeNode deco = inverter("i", action("a", "x"));
  deco.children.push_back(action("b", "x"));
  EXPECT_THROW(Tree::compile(deco), MalformedTree);
}

TEST(TreeCompile, FlattensInPreOrder) {
  auto tree = Tree::compile(sequence("r", {fallback("f", {condition("c", "C"), action("a", "A")}), action("b", "B")}));
  std::vector<std::string> ids;
  for (const auto& n : tree->nodes()) ids.push_back(n.id);
  EXPECT_EQ(ids, (std::vector<std::string>{"r", "f", "c", "a", "b"}));
  EXPECT_EQ(tree->node(*tree->find("a")).parent, tree->find("f"));
  EXPECT_EQ(tree->node(*tree->find("a")).label, "A");
}

}  // namespace
}  // namespace chargebt::bt
