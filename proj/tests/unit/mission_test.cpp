#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "chargebt/mission/mission.hpp"

using namespace chargebt::mission;

namespace {

ChargeHole hole(std::string id, double x, double y, double depth = 2.0) {
  ChargeHole h;
  h.id = std::move(id);
  h.x = x;
  h.y = y;
  h.depth = depth;
  return h;
}

MissionStore store_of(std::vector<ChargeHole> holes) {
  MissionStore s;
  for (auto& h : holes) s.add(std::move(h));
  return s;
}

}  // namespace

TEST(Planner, BottomRowFirstThenLeftToRightThenId) {
  // Row 1 has a tie on x, and noise of a few cm in y inside the row.
  auto s = store_of({hole("A", 2.0, 1.02), hole("D", 1.0, 0.99), hole("C", 0.5, 3.0), hole("B", 1.0, 1.0),
                     hole("E", 0.2, 1.04)});
  const auto& m = s.plan(PlanParams{}, "op");
  EXPECT_EQ(m.order, (std::vector<std::string>{"E", "B", "D", "A", "C"}));
  EXPECT_EQ(m.queue, m.order);
  EXPECT_EQ(m.revision, 1);
  EXPECT_EQ(m.created_by, "op");
  for (const auto& h : s.holes()) EXPECT_EQ(h.state, HoleState::kPlanned);
}

TEST(Planner, TargetsFollowDensityAndDepth) {
  auto s = store_of({hole("A", 0, 0, 3.5), hole("B", 1, 0, 2.0)});
  PlanParams p;
  p.linear_density = 1.2;
  p.detonator_type = "nonel";
  const auto& m = s.plan(p, "op");
  EXPECT_DOUBLE_EQ(m.plan.at("A").emulsion_target, 4.2);
  EXPECT_DOUBLE_EQ(m.plan.at("B").emulsion_target, 2.4);
  EXPECT_EQ(s.hole("A").detonator_type, "nonel");
}

TEST(Planner, OperatorOrderOverride) {
  auto s = store_of({hole("A", 0, 0), hole("B", 1, 0), hole("C", 2, 0)});
  PlanParams p;
  p.order = {"C", "A", "B"};
  EXPECT_EQ(s.plan(p, "op").order, p.order);

  auto t = store_of({hole("A", 0, 0), hole("B", 1, 0)});
  p.order = {"A"};
  EXPECT_THROW(t.plan(p, "op"), MissionError);
}

TEST(Planner, RejectsEmptyAndOversizedSets) {
  MissionStore empty;
  EXPECT_THROW(empty.plan(PlanParams{}, "op"), EmptyHoleSet);

  std::vector<ChargeHole> many;
  for (int i = 0; i < 101; ++i) many.push_back(hole("H" + std::to_string(i), i * 0.01, 0));
  auto s = store_of(many);
  EXPECT_THROW(s.plan(PlanParams{}, "op"), TooManyHoles);

  many.pop_back();
  auto ok = store_of(many);
  EXPECT_EQ(ok.plan(PlanParams{}, "op").order.size(), 100u);
}

TEST(Planner, RevisionCountsReplans) {
  auto s = store_of({hole("A", 0, 0), hole("B", 1, 0)});
  s.plan(PlanParams{}, "op");
  s.reopen("A");
  s.reopen("B");
  EXPECT_EQ(s.plan(PlanParams{}, "op").revision, 2);
}

TEST(HoleLifecycle, OnlyDocumentedEdges) {
  using enum HoleState;
  const std::set<std::pair<HoleState, HoleState>> allowed = {
      {kDetected, kPlanned}, {kPlanned, kCharging}, {kCharging, kCharged},
      {kCharging, kFailed},  {kFailed, kSkipped},   {kFailed, kCharging}};
  const HoleState all[] = {kDetected, kPlanned, kCharging, kCharged, kFailed, kSkipped};
  int accepted = 0;
  for (HoleState from : all) {
    for (HoleState to : all) {
      EXPECT_EQ(is_lifecycle_edge(from, to), allowed.count({from, to}) == 1)
          << to_string(from) << " -> " << to_string(to);
      accepted += is_lifecycle_edge(from, to) ? 1 : 0;
    }
  }
  EXPECT_EQ(accepted, 6);
}

TEST(HoleLifecycle, StoreEnforcesEdges) {
  auto s = store_of({hole("A", 0, 0)});
  EXPECT_THROW(s.set_state("A", HoleState::kCharged), InvalidHoleTransition);
  s.plan(PlanParams{}, "op");
  s.set_state("A", HoleState::kCharging);
  s.set_state("A", HoleState::kCharged);
  EXPECT_THROW(s.set_state("A", HoleState::kCharging), InvalidHoleTransition);
  EXPECT_THROW(s.reopen("A"), InvalidHoleTransition);
  EXPECT_THROW(s.set_state("Z", HoleState::kPlanned), UnknownHole);
}

TEST(Queue, PopAndPeek) {
  auto s = store_of({hole("A", 0, 0), hole("B", 1, 0)});
  chargebt::bt::Blackboard bb;
  EXPECT_THROW(pop_next(s, bb), NoMission);
  s.plan(PlanParams{}, "op");
  EXPECT_EQ(peek_next(s)->id, "A");
  EXPECT_EQ(peek_next(s)->id, "A");  // peek does not consume
  EXPECT_EQ(pop_next(s, bb).id, "A");
  EXPECT_EQ(bb.get_as<chargebt::HoleRecord>("current_hole").id, "A");
  EXPECT_EQ(s.hole("A").state, HoleState::kCharging);
  EXPECT_EQ(peek_next(s)->id, "B");
}

TEST(Queue, DrainTwentyHoles) {
  std::vector<ChargeHole> holes;
  for (int i = 0; i < 20; ++i) holes.push_back(hole("H" + std::to_string(100 + i), i % 5, i / 5));
  auto s = store_of(holes);
  chargebt::bt::Blackboard bb;
  const auto order = s.plan(PlanParams{}, "op").order;
  std::vector<std::string> popped;
  while (!s.queue().empty()) {
    popped.push_back(pop_next(s, bb).id);
    EXPECT_EQ(bb.get_as<chargebt::HoleRecord>("current_hole").id, popped.back());
  }
  EXPECT_EQ(popped, order);
  EXPECT_EQ(popped.size(), 20u);
  EXPECT_FALSE(peek_next(s).has_value());
  EXPECT_THROW(pop_next(s, bb), EmptyQueue);
}

TEST(MissionFile, RoundTrip) {
  auto s = store_of({hole("A", 0.5, 0.25, 3.0), hole("B", 1.5, 0.25, 2.5)});
  s.plan(PlanParams{}, "op");
  const auto j = mission_to_json(s);
  EXPECT_EQ(j.at("order"), nlohmann::json({"A", "B"}));
  EXPECT_EQ(j.at("holes").size(), 2u);
  for (const char* field : {"id", "x", "y", "depth", "emulsion_target", "detonator_type"}) {
    EXPECT_TRUE(j["holes"][0].contains(field)) << field;
  }
  const auto back = mission_from_json(j);
  EXPECT_EQ(back.current_mission().order, s.current_mission().order);
  EXPECT_EQ(back.hole("B").emulsion_target, 2.5);

  nlohmann::json store_json = s;
  EXPECT_EQ(store_json.get<MissionStore>(), s);
}
