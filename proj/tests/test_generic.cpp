#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fclloop/dragon_hunt.hpp"
#include "fclloop/generic_check.hpp"
#include "support.hpp"

using namespace fclloop;
using Category = GenericViolation::Category;

namespace {

std::size_t count_of(const std::vector<GenericViolation>& vs, Category c) {
  return static_cast<std::size_t>(std::count_if(vs.begin(), vs.end(), [c](const auto& v) { return v.category == c; }));
}

}  // namespace

TEST(Generic, ValidPartition) {
  AssignmentMap a{{"Farm", {"v1", "v2"}}, {"Attack", {"v3"}}, {"GoToCave", {}}};
  EXPECT_TRUE(check_assignment({"v1", "v2", "v3"}, a, ensemble_catalog()).empty());
}

TEST(Generic, EachCategory) {
  const auto& cat = ensemble_catalog();
  auto unknown = check_assignment({"v1"}, {{"Defend", {"v1"}}}, cat);
  ASSERT_EQ(unknown.size(), 2u);
  EXPECT_EQ(unknown[0].category, Category::UnknownEnsemble);
  EXPECT_EQ(unknown[0].detail, "invalid ensemble name \"Defend\"");
  EXPECT_EQ(unknown[1].category, Category::UnassignedComponent);  // unknown ensembles do not count

  auto dup = check_assignment({"v1"}, {{"Farm", {"v1"}}, {"Attack", {"v1"}}}, cat);
  ASSERT_EQ(dup.size(), 1u);
  EXPECT_EQ(dup[0].detail, "component v1 assigned twice: in Farm and Attack");

  auto ghost = check_assignment({"v1"}, {{"Farm", {"v1", "v9"}}}, cat);
  ASSERT_EQ(ghost.size(), 1u);
  EXPECT_EQ(ghost[0].category, Category::UnknownComponent);

  auto missing = check_assignment({"v1", "v2"}, {{"Farm", {"v1"}}}, cat);
  ASSERT_EQ(missing.size(), 1u);
  EXPECT_EQ(missing[0].detail, "component v2 is not assigned to any ensemble");
  EXPECT_EQ(missing[0].evidence, std::vector<std::string>{"v2"});
}

// The checker is silent exactly on partitions of the alive villagers into
// catalog ensembles.
TEST(Generic, PartitionCharacterization) {
  std::mt19937_64 rng(31);
  const auto& cat = ensemble_catalog();
  int valid = 0;
  for (int k = 0; k < 2000; ++k) {
    std::vector<std::string> alive;
    int n = std::uniform_int_distribution<int>(0, 6)(rng);
    for (int i = 1; i <= n; ++i) alive.push_back("v" + std::to_string(i));
    auto a = testsupport::random_assignment(rng, alive);

    bool partition = true;
    std::map<std::string, int> times;
    for (const auto& [name, ids] : a) {
      bool known = std::find(cat.begin(), cat.end(), name) != cat.end();
      if (!known) partition = false;
      for (const auto& id : ids) {
        if (std::find(alive.begin(), alive.end(), id) == alive.end()) partition = false;
        if (known) times[id]++;
      }
    }
    for (const auto& id : alive) {
      if (times[id] != 1) partition = false;
    }
    auto vs = check_assignment(alive, a, cat);
    ASSERT_EQ(vs.empty(), partition);
    valid += partition ? 1 : 0;

    std::size_t unassigned = 0;
    std::size_t duplicated = 0;
    for (const auto& id : alive) {
      unassigned += times[id] == 0 ? 1 : 0;
      duplicated += times[id] > 1 ? 1 : 0;
    }
    ASSERT_EQ(count_of(vs, Category::UnassignedComponent), unassigned);
    ASSERT_EQ(count_of(vs, Category::DuplicateAssignment), duplicated);
  }
  EXPECT_GT(valid, 200);
  EXPECT_LT(valid, 1900);
}

TEST(Generic, RunLogProtocolFailure) {
  RunLog log;
  log.exchanges.push_back({0, {"v1"}, AssignmentMap{{"Farm", {"v1"}}}, std::nullopt});
  log.exchanges.push_back({1, {"v1"}, std::nullopt, ProtocolError{ProtocolError::Kind::Timeout, "no response", ""}});
  auto vs = check_run(log, ensemble_catalog());
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_EQ(vs[0].category, Category::ProtocolFailure);
  EXPECT_EQ(vs[0].step, std::optional<std::size_t>(1));
  EXPECT_EQ(to_json(vs[0])["step_1based"], 2);
}
