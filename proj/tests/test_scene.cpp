#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "irsvlc/scenario_io.hpp"
#include "irsvlc/scene.hpp"

using namespace irsvlc;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double total_area(const std::vector<SurfaceElement>& els) {
    double a = 0;
    for (const auto& e : els) a += e.area_m2;
    return a;
}

// Runs `edit` on the JSON form of the default scenario and returns the field
// named by the resulting validation error.
template <class F>
std::string error_field(F edit) {
    auto doc = scenario_to_json(default_scenario());
    edit(doc);
    try {
        load_scenario(doc.dump());
    } catch (const ValidationError& e) {
        return e.field();
    }
    return "<no error>";
}

}  // namespace

TEST(DefaultScenario, ReferenceValues) {
    const auto s = default_scenario();
    EXPECT_EQ(s.room.length, 5.0);
    EXPECT_EQ(s.room.width, 5.0);
    EXPECT_EQ(s.room.height, 3.0);
    EXPECT_EQ(s.room.reflectivity.walls, 0.8);
    EXPECT_EQ(s.room.reflectivity.floor, 0.3);
    EXPECT_EQ(s.room.reflectivity.ceiling, 0.8);

    ASSERT_EQ(s.aps.size(), 4u);
    EXPECT_EQ(s.aps[0].position, (Vec3{1.5, 1.5, 3.0}));
    EXPECT_EQ(s.aps[1].position, (Vec3{1.5, 3.5, 3.0}));
    EXPECT_EQ(s.aps[2].position, (Vec3{3.5, 1.5, 3.0}));
    EXPECT_EQ(s.aps[3].position, (Vec3{3.5, 3.5, 3.0}));
    for (const auto& ap : s.aps) {
        EXPECT_EQ(ap.transmit_power_w, 2.0);
        EXPECT_EQ(ap.half_power_semiangle_deg, 60.0);
        EXPECT_EQ(ap.normal, (Vec3{0, 0, -1}));
    }

    ASSERT_EQ(s.mirror_arrays.size(), 2u);
    EXPECT_EQ(s.mirror_count(), 50u);
    for (const auto& a : s.mirror_arrays) {
        EXPECT_EQ(a.rows, 5);
        EXPECT_EQ(a.cols, 5);
        EXPECT_EQ(a.element_width_m, 0.25);
        EXPECT_EQ(a.element_height_m, 0.15);
        EXPECT_EQ(a.reflectivity, 0.95);
        EXPECT_EQ(a.poses.size(), 25u);
    }
    EXPECT_NE(s.mirror_arrays[0].wall, s.mirror_arrays[1].wall);

    ASSERT_EQ(s.adr.branches.size(), 4u);
    for (std::size_t b = 0; b < 4; ++b) {
        EXPECT_EQ(s.adr.branches[b].azimuth_deg, 90.0 * b);
        EXPECT_EQ(s.adr.branches[b].elevation_deg, 60.0);
        EXPECT_EQ(s.adr.branches[b].fov_deg, 25.0);
    }
    EXPECT_EQ(s.adr.pd_area_m2, 20e-6);
    EXPECT_EQ(s.adr.responsivity_a_per_w, 0.4);
    EXPECT_EQ(s.diffuse_grid.first_order_element_m, 0.05);
    EXPECT_EQ(s.diffuse_grid.second_order_element_m, 0.20);
    EXPECT_EQ(std::get<RandomUsers>(s.users).count, 4);
    EXPECT_NO_THROW(validate(s));
}

TEST(Discretize, TotalAreaMatchesRoomSurface) {
    const auto els = discretize_surfaces(Room{}, 0.05);
    EXPECT_NEAR(total_area(els), 110.0, 1e-9);
}

TEST(Discretize, PartialEdgeElementsKeepArea) {
    const auto els = discretize_surfaces(Room{}, 0.3);
    EXPECT_NEAR(total_area(els), 110.0, 1e-9);
}

TEST(Discretize, ExactTilingCount) {
    Room r;
    r.length = r.width = r.height = 1.0;
    EXPECT_EQ(discretize_surfaces(r, 0.5).size(), 24u);
}

TEST(Discretize, ReflectivityAndNormalsPerSurface) {
    const Room r;
    const Vec3 mid{2.5, 2.5, 1.5};
    for (const auto& e : discretize_surfaces(r, 0.25)) {
        EXPECT_GT(dot(e.normal, mid - e.center), 0.0);
        if (e.surface == Surface::Floor) EXPECT_EQ(e.reflectivity, 0.3);
        else if (e.surface == Surface::Ceiling) EXPECT_EQ(e.reflectivity, 0.8);
        else EXPECT_EQ(e.reflectivity, 0.8);
    }
}

TEST(Discretize, RejectsBadElementSize) {
    EXPECT_THROW(discretize_surfaces(Room{}, 0.0), ValidationError);
    EXPECT_THROW(discretize_surfaces(Room{}, 3.5), ValidationError);
}

TEST(Discretize, MirrorFootprintRemovedExactly) {
    const auto s = default_scenario();
    for (double h : {0.05, 0.1, 0.2, 0.3}) {
        const auto all = discretize_surfaces(s.room, h);
        const auto kept = exclude_mirror_footprints(all, s.room, s.mirror_arrays);
        EXPECT_NEAR(total_area(all) - total_area(kept), 2 * 1.25 * 0.75, 1e-9) << h;
    }
}

TEST(MirrorPoses, DeterministicPerSeed) {
    const auto s = default_scenario();
    const auto& a = s.mirror_arrays[0];
    EXPECT_EQ(generate_mirror_poses(a, s.room, 5), generate_mirror_poses(a, s.room, 5));
    EXPECT_NE(generate_mirror_poses(a, s.room, 5), generate_mirror_poses(a, s.room, 6));
}

TEST(MirrorPoses, ZeroRangeGivesWallNormal) {
    auto s = default_scenario();
    auto a = s.mirror_arrays[1];
    a.roll_range_deg = {0, 0};
    a.yaw_range_deg = {0, 0};
    for (const auto& p : generate_mirror_poses(a, s.room, 3)) {
        EXPECT_EQ(p.normal(), (Vec3{0, -1, 0}));
        EXPECT_EQ(p.center.y, 5.0);
    }
}

TEST(MirrorPoses, LayoutAndRangesRespected) {
    const auto s = default_scenario();
    const auto& a = s.mirror_arrays[0];
    const auto poses = generate_mirror_poses(a, s.room, 9);
    ASSERT_EQ(poses.size(), 25u);
    for (const auto& p : poses) {
        EXPECT_GE(p.roll_deg, a.roll_range_deg.lo);
        EXPECT_LE(p.roll_deg, a.roll_range_deg.hi);
        EXPECT_GE(p.yaw_deg, a.yaw_range_deg.lo);
        EXPECT_LE(p.yaw_deg, a.yaw_range_deg.hi);
        EXPECT_EQ(p.center.y, 0.0);
        EXPECT_LE(std::abs(p.center.x - a.center_along), 0.5 * 5 * 0.25);
        EXPECT_LE(std::abs(p.center.z - a.center_height), 0.5 * 5 * 0.15);
    }
    // Row-major, row 0 lowest.
    EXPECT_LT(poses[0].center.z, poses[5].center.z);
    EXPECT_LT(poses[0].center.x, poses[1].center.x);
}

TEST(PlaceUsers, ExplicitPassthrough) {
    const std::vector<Vec3> users{{2.5, 2.5, 1.0}};
    EXPECT_EQ(place_users(users, Room{}, 1.0), users);
}

TEST(PlaceUsers, RandomDeterministicAndContained) {
    const RandomUsers spec{200, 7};
    const auto a = place_users(spec, Room{}, 1.0);
    EXPECT_EQ(a, place_users(spec, Room{}, 1.0));
    ASSERT_EQ(a.size(), 200u);
    for (const auto& u : a) {
        EXPECT_GE(u.x, 0.0);
        EXPECT_LE(u.x, 5.0);
        EXPECT_GE(u.y, 0.0);
        EXPECT_LE(u.y, 5.0);
        EXPECT_EQ(u.z, 1.0);
    }
}

TEST(PlaceUsers, RejectsOutsideRoomAndBadMount) {
    EXPECT_THROW(place_users(std::vector<Vec3>{{6, 1, 1}}, Room{}, 1.0), ValidationError);
    EXPECT_THROW(place_users(RandomUsers{}, Room{}, 3.0), ValidationError);
}

TEST(LoadScenario, RoundTrip) {
    const auto s = default_scenario();
    EXPECT_EQ(load_scenario(save_scenario(s)), s);
}

TEST(LoadScenario, CommittedDefaultMatches) {
    EXPECT_EQ(load_scenario(read_file(std::string(IRSVLC_DATA_DIR) + "/default_scenario.json")), default_scenario());
}

TEST(LoadScenario, EmptyDocumentIsDefault) {
    EXPECT_EQ(load_scenario("{}"), default_scenario());
}

TEST(LoadScenario, ReflectivityOutOfRange) {
    EXPECT_EQ(error_field([](auto& d) { d["room"]["reflectivity"]["walls"] = 1.3; }), "room.reflectivity.walls");
    EXPECT_EQ(error_field([](auto& d) { d["mirror_arrays"][1]["reflectivity"] = 1.3; }),
              "mirror_arrays[1].reflectivity");
}

TEST(LoadScenario, ApOffCeiling) {
    auto doc = scenario_to_json(default_scenario());
    doc["aps"][2]["position"] = {3.5, 1.5, 2.0};
    try {
        load_scenario(doc.dump());
        FAIL() << "accepted an AP below the ceiling";
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.field(), "aps[2].position");
        EXPECT_NE(std::string(e.what()).find("AP must lie on ceiling plane"), std::string::npos);
    }
}

TEST(LoadScenario, StructuralErrors) {
    EXPECT_EQ(error_field([](auto& d) { d["room"]["colour"] = "red"; }), "room.colour");
    EXPECT_EQ(error_field([](auto& d) { d["aps"][0]["transmit_power_w"] = "two"; }), "aps[0].transmit_power_w");
    EXPECT_EQ(error_field([](auto& d) { d["mirror_arrays"][0]["poses"].erase(0); }), "mirror_arrays[0].poses");
    EXPECT_EQ(error_field([](auto& d) { d["solver"]["mirror_stage"] = "random"; }), "solver.mirror_stage");
    EXPECT_THROW(load_scenario("{ not json"), ValidationError);
}

TEST(LoadScenario, ExplicitUsersAndPoseOverride) {
    auto doc = scenario_to_json(default_scenario());
    doc["users"] = {{2.5, 2.5, 1.0}, {1.0, 4.0, 1.0}};
    doc["mirror_arrays"][0]["poses"][3]["roll_deg"] = 12.5;
    const auto s = load_scenario(doc.dump());
    EXPECT_EQ(std::get<std::vector<Vec3>>(s.users).size(), 2u);
    EXPECT_EQ(s.mirror_arrays[0].poses[3].roll_deg, 12.5);
    EXPECT_EQ(load_scenario(save_scenario(s)), s);
}

TEST(Validate, UsersMustSitAtMountHeight) {
    auto s = default_scenario();
    s.users = std::vector<Vec3>{{2.5, 2.5, 1.2}};
    EXPECT_THROW(validate(s), ValidationError);
}
