#pragma once

// JSON scenario files. Every section and key is optional and falls back to
// the reference defaults; unknown keys and ill-typed values are rejected with
// the dotted path of the offending field.

#include <initializer_list>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "irsvlc/error.hpp"
#include "irsvlc/scene.hpp"

namespace irsvlc {

namespace io_detail {

using nlohmann::json;

inline std::string child(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

inline std::string item(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

inline void expect_object(const json& j, const std::string& path, std::initializer_list<std::string_view> keys) {
    if (!j.is_object()) throw ValidationError(path.empty() ? "<document>" : path, "expected an object");
    for (const auto& [k, _] : j.items()) {
        bool known = false;
        for (auto allowed : keys) known = known || k == allowed;
        if (!known) throw ValidationError(child(path, k), "unknown key");
    }
}

inline double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ValidationError(path, "expected a number");
    return j.get<double>();
}

inline void read(const json& obj, std::string_view key, const std::string& path, double& out) {
    if (auto it = obj.find(key); it != obj.end()) out = number(*it, child(path, key));
}

inline void read(const json& obj, std::string_view key, const std::string& path, int& out) {
    if (auto it = obj.find(key); it != obj.end()) {
        if (!it->is_number_integer()) throw ValidationError(child(path, key), "expected an integer");
        out = it->get<int>();
    }
}

inline void read(const json& obj, std::string_view key, const std::string& path, std::uint64_t& out) {
    if (auto it = obj.find(key); it != obj.end()) {
        if (!it->is_number_unsigned()) throw ValidationError(child(path, key), "expected a non-negative integer");
        out = it->get<std::uint64_t>();
    }
}

inline Vec3 vec3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) throw ValidationError(path, "expected [x, y, z]");
    return {number(j[0], item(path, 0)), number(j[1], item(path, 1)), number(j[2], item(path, 2))};
}

inline void read(const json& obj, std::string_view key, const std::string& path, Vec3& out) {
    if (auto it = obj.find(key); it != obj.end()) out = vec3(*it, child(path, key));
}

inline void read(const json& obj, std::string_view key, const std::string& path, AngleRange& out) {
    if (auto it = obj.find(key); it != obj.end()) {
        const std::string p = child(path, key);
        if (!it->is_array() || it->size() != 2) throw ValidationError(p, "expected [lo, hi]");
        out = {number((*it)[0], item(p, 0)), number((*it)[1], item(p, 1))};
    }
}

inline json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

inline Wall parse_wall(const json& j, const std::string& path) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        for (Wall w : {Wall::XMin, Wall::XMax, Wall::YMin, Wall::YMax})
            if (s == wall_name(w)) return w;
    }
    throw ValidationError(path, "expected one of \"x0\", \"x1\", \"y0\", \"y1\"");
}

inline std::string_view stage_name(MirrorStage s) {
    switch (s) {
        case MirrorStage::Auto: return "auto";
        case MirrorStage::Greedy: return "greedy";
        case MirrorStage::Exhaustive: return "exhaustive";
    }
    return "auto";
}

inline MirrorStage parse_stage(const json& j, const std::string& path) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        for (MirrorStage m : {MirrorStage::Auto, MirrorStage::Greedy, MirrorStage::Exhaustive})
            if (s == stage_name(m)) return m;
    }
    throw ValidationError(path, "expected one of \"auto\", \"greedy\", \"exhaustive\"");
}

inline MirrorArrayConfig parse_mirror_array(const json& j, const std::string& p, const Room& room) {
    expect_object(j, p,
                  {"wall", "center_along", "center_height", "rows", "cols", "element_width_m", "element_height_m",
                   "reflectivity", "rng_seed", "roll_range_deg", "yaw_range_deg", "poses"});
    MirrorArrayConfig a;
    if (auto it = j.find("wall"); it != j.end()) a.wall = parse_wall(*it, child(p, "wall"));
    read(j, "center_along", p, a.center_along);
    read(j, "center_height", p, a.center_height);
    read(j, "rows", p, a.rows);
    read(j, "cols", p, a.cols);
    read(j, "element_width_m", p, a.element_width_m);
    read(j, "element_height_m", p, a.element_height_m);
    read(j, "reflectivity", p, a.reflectivity);
    read(j, "rng_seed", p, a.rng_seed);
    read(j, "roll_range_deg", p, a.roll_range_deg);
    read(j, "yaw_range_deg", p, a.yaw_range_deg);
    if (a.rows <= 0) throw ValidationError(child(p, "rows"), "must be positive");
    if (a.cols <= 0) throw ValidationError(child(p, "cols"), "must be positive");

    // Layout (centers, frames) always follows rows/cols; the file may pin the
    // per-mirror angles.
    a.poses = generate_mirror_poses(a, room, a.rng_seed);
    if (auto it = j.find("poses"); it != j.end()) {
        const std::string pp = child(p, "poses");
        if (!it->is_array()) throw ValidationError(pp, "expected an array");
        if (it->size() != a.poses.size()) throw ValidationError(pp, "rows*cols must equal the number of poses");
        for (std::size_t m = 0; m < it->size(); ++m) {
            const json& e = (*it)[m];
            const std::string pm = item(pp, m);
            expect_object(e, pm, {"roll_deg", "yaw_deg"});
            if (!e.contains("roll_deg") || !e.contains("yaw_deg"))
                throw ValidationError(pm, "roll_deg and yaw_deg are required");
            read(e, "roll_deg", pm, a.poses[m].roll_deg);
            read(e, "yaw_deg", pm, a.poses[m].yaw_deg);
        }
    }
    return a;
}

}  // namespace io_detail

/// Parses and validates a scenario document.
inline ScenarioConfig load_scenario(std::string_view text) {
    using namespace io_detail;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError("<document>", std::string("parse error: ") + e.what());
    }
    expect_object(doc, "",
                  {"room", "aps", "mirror_arrays", "users", "adr", "diffuse_grid", "noise", "solver", "time_bin_ns"});

    // Absent keys keep the default scenario's values.
    ScenarioConfig s = default_scenario();
    if (auto it = doc.find("room"); it != doc.end()) {
        expect_object(*it, "room", {"length", "width", "height", "reflectivity"});
        read(*it, "length", "room", s.room.length);
        read(*it, "width", "room", s.room.width);
        read(*it, "height", "room", s.room.height);
        if (auto r = it->find("reflectivity"); r != it->end()) {
            expect_object(*r, "room.reflectivity", {"walls", "floor", "ceiling"});
            read(*r, "walls", "room.reflectivity", s.room.reflectivity.walls);
            read(*r, "floor", "room.reflectivity", s.room.reflectivity.floor);
            read(*r, "ceiling", "room.reflectivity", s.room.reflectivity.ceiling);
        }
    }

    if (auto it = doc.find("aps"); it != doc.end()) {
        if (!it->is_array()) throw ValidationError("aps", "expected an array");
        s.aps.clear();
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string p = item("aps", i);
            const json& a = (*it)[i];
            expect_object(a, p, {"position", "transmit_power_w", "half_power_semiangle_deg", "normal"});
            if (!a.contains("position")) throw ValidationError(child(p, "position"), "required");
            ApConfig ap;
            read(a, "position", p, ap.position);
            read(a, "transmit_power_w", p, ap.transmit_power_w);
            read(a, "half_power_semiangle_deg", p, ap.half_power_semiangle_deg);
            read(a, "normal", p, ap.normal);
            s.aps.push_back(ap);
        }
    }

    if (auto it = doc.find("mirror_arrays"); it != doc.end()) {
        if (!it->is_array()) throw ValidationError("mirror_arrays", "expected an array");
        s.mirror_arrays.clear();
        for (std::size_t i = 0; i < it->size(); ++i)
            s.mirror_arrays.push_back(parse_mirror_array((*it)[i], item("mirror_arrays", i), s.room));
    } else {
        for (auto& a : s.mirror_arrays) a.poses = generate_mirror_poses(a, s.room, a.rng_seed);
    }

    if (auto it = doc.find("adr"); it != doc.end()) {
        expect_object(*it, "adr", {"branches", "pd_area_m2", "responsivity_a_per_w", "mount_height_m"});
        if (auto b = it->find("branches"); b != it->end()) {
            if (!b->is_array()) throw ValidationError("adr.branches", "expected an array");
            s.adr.branches.clear();
            for (std::size_t i = 0; i < b->size(); ++i) {
                const std::string p = item("adr.branches", i);
                expect_object((*b)[i], p, {"azimuth_deg", "elevation_deg", "fov_deg"});
                BranchOrientation o;
                read((*b)[i], "azimuth_deg", p, o.azimuth_deg);
                read((*b)[i], "elevation_deg", p, o.elevation_deg);
                read((*b)[i], "fov_deg", p, o.fov_deg);
                s.adr.branches.push_back(o);
            }
        }
        read(*it, "pd_area_m2", "adr", s.adr.pd_area_m2);
        read(*it, "responsivity_a_per_w", "adr", s.adr.responsivity_a_per_w);
        read(*it, "mount_height_m", "adr", s.adr.mount_height_m);
    }

    if (auto it = doc.find("users"); it != doc.end()) {
        if (it->is_array()) {
            std::vector<Vec3> users;
            for (std::size_t i = 0; i < it->size(); ++i) users.push_back(vec3((*it)[i], item("users", i)));
            s.users = std::move(users);
        } else {
            expect_object(*it, "users", {"count", "rng_seed"});
            RandomUsers r;
            read(*it, "count", "users", r.count);
            read(*it, "rng_seed", "users", r.rng_seed);
            s.users = r;
        }
    }

    if (auto it = doc.find("diffuse_grid"); it != doc.end()) {
        expect_object(*it, "diffuse_grid", {"first_order_element_m", "second_order_element_m"});
        read(*it, "first_order_element_m", "diffuse_grid", s.diffuse_grid.first_order_element_m);
        read(*it, "second_order_element_m", "diffuse_grid", s.diffuse_grid.second_order_element_m);
    }
    if (auto it = doc.find("noise"); it != doc.end()) {
        expect_object(*it, "noise", {"noise_psd_a2_per_hz", "bandwidth_hz"});
        read(*it, "noise_psd_a2_per_hz", "noise", s.noise.noise_psd_a2_per_hz);
        read(*it, "bandwidth_hz", "noise", s.noise.bandwidth_hz);
    }
    if (auto it = doc.find("solver"); it != doc.end()) {
        expect_object(*it, "solver", {"mirror_stage", "max_search_space", "utility_epsilon", "max_greedy_passes"});
        if (auto m = it->find("mirror_stage"); m != it->end()) s.solver.mirror_stage = parse_stage(*m, "solver.mirror_stage");
        read(*it, "max_search_space", "solver", s.solver.max_search_space);
        read(*it, "utility_epsilon", "solver", s.solver.utility_epsilon);
        read(*it, "max_greedy_passes", "solver", s.solver.max_greedy_passes);
    }
    read(doc, "time_bin_ns", "", s.time_bin_ns);

    validate(s);
    return s;
}

inline nlohmann::json scenario_to_json(const ScenarioConfig& s) {
    using namespace io_detail;
    json doc;
    doc["room"] = {{"length", s.room.length},
                   {"width", s.room.width},
                   {"height", s.room.height},
                   {"reflectivity",
                    {{"walls", s.room.reflectivity.walls},
                     {"floor", s.room.reflectivity.floor},
                     {"ceiling", s.room.reflectivity.ceiling}}}};
    doc["aps"] = json::array();
    for (const auto& ap : s.aps)
        doc["aps"].push_back({{"position", to_json(ap.position)},
                              {"transmit_power_w", ap.transmit_power_w},
                              {"half_power_semiangle_deg", ap.half_power_semiangle_deg},
                              {"normal", to_json(ap.normal)}});
    doc["mirror_arrays"] = json::array();
    for (const auto& a : s.mirror_arrays) {
        json poses = json::array();
        for (const auto& p : a.poses) poses.push_back({{"roll_deg", p.roll_deg}, {"yaw_deg", p.yaw_deg}});
        doc["mirror_arrays"].push_back({{"wall", std::string(wall_name(a.wall))},
                                        {"center_along", a.center_along},
                                        {"center_height", a.center_height},
                                        {"rows", a.rows},
                                        {"cols", a.cols},
                                        {"element_width_m", a.element_width_m},
                                        {"element_height_m", a.element_height_m},
                                        {"reflectivity", a.reflectivity},
                                        {"rng_seed", a.rng_seed},
                                        {"roll_range_deg", {a.roll_range_deg.lo, a.roll_range_deg.hi}},
                                        {"yaw_range_deg", {a.yaw_range_deg.lo, a.yaw_range_deg.hi}},
                                        {"poses", poses}});
    }
    if (const auto* users = std::get_if<std::vector<Vec3>>(&s.users)) {
        doc["users"] = json::array();
        for (const auto& u : *users) doc["users"].push_back(to_json(u));
    } else {
        const auto& r = std::get<RandomUsers>(s.users);
        doc["users"] = {{"count", r.count}, {"rng_seed", r.rng_seed}};
    }
    json branches = json::array();
    for (const auto& b : s.adr.branches)
        branches.push_back({{"azimuth_deg", b.azimuth_deg}, {"elevation_deg", b.elevation_deg}, {"fov_deg", b.fov_deg}});
    doc["adr"] = {{"branches", branches},
                  {"pd_area_m2", s.adr.pd_area_m2},
                  {"responsivity_a_per_w", s.adr.responsivity_a_per_w},
                  {"mount_height_m", s.adr.mount_height_m}};
    doc["diffuse_grid"] = {{"first_order_element_m", s.diffuse_grid.first_order_element_m},
                           {"second_order_element_m", s.diffuse_grid.second_order_element_m}};
    doc["noise"] = {{"noise_psd_a2_per_hz", s.noise.noise_psd_a2_per_hz}, {"bandwidth_hz", s.noise.bandwidth_hz}};
    doc["solver"] = {{"mirror_stage", std::string(stage_name(s.solver.mirror_stage))},
                     {"max_search_space", s.solver.max_search_space},
                     {"utility_epsilon", s.solver.utility_epsilon},
                     {"max_greedy_passes", s.solver.max_greedy_passes}};
    doc["time_bin_ns"] = s.time_bin_ns;
    return doc;
}

inline std::string save_scenario(const ScenarioConfig& s) { return scenario_to_json(s).dump(2) + "\n"; }

}  // namespace irsvlc
