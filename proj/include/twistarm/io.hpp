#ifndef TWISTARM_IO_HPP
#define TWISTARM_IO_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "twistarm/cross_section.hpp"
#include "twistarm/fitting.hpp"
#include "twistarm/rod.hpp"

namespace twistarm {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using DesignVariant =
    std::variant<ManipulatorDesign<SE2>, ManipulatorDesign<SE3>>;

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double require_finite(double v, const std::string& field) {
  if (!std::isfinite(v)) {
    throw SchemaError("non-finite value in field '" + field + "'");
  }
  return v;
}

inline const nlohmann::json& require_field(const nlohmann::json& j,
                                           const std::string& key) {
  if (!j.contains(key)) {
    throw SchemaError("missing field '" + key + "'");
  }
  return j.at(key);
}

inline double number_field(const nlohmann::json& j, const std::string& key) {
  const auto& v = require_field(j, key);
  if (!v.is_number()) {
    throw SchemaError("field '" + key + "' must be a number");
  }
  return require_finite(v.get<double>(), key);
}

inline Stiffness parse_stiffness(const nlohmann::json& j) {
  return Stiffness(number_field(j, "k_eps"), number_field(j, "k_gamma"),
                   number_field(j, "k_tau"), number_field(j, "k_kappa_bar"));
}

inline ContractionModel parse_contraction(const nlohmann::json& j) {
  const auto& coeffs = require_field(j, "coefficients");
  const auto& range = require_field(j, "range_kpa");
  if (!coeffs.is_array() || coeffs.empty() || !range.is_array() ||
      range.size() != 2) {
    throw SchemaError("contraction needs 'coefficients' array and 2-element "
                      "'range_kpa'");
  }
  Eigen::VectorXd c(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    c(i) = require_finite(coeffs[i].get<double>(), "coefficients");
  }
  const double lo = require_finite(range[0].get<double>(), "range_kpa") * 1e3;
  const double hi = require_finite(range[1].get<double>(), "range_kpa") * 1e3;
  return ContractionModel(c, lo, hi);
}

template <class G>
Pose<G> parse_mount_pose(const nlohmann::json& j) {
  const auto& tr = require_field(j, "translation_m");
  if (!tr.is_array() || static_cast<int>(tr.size()) != G::kDim) {
    throw SchemaError("mount 'translation_m' must have " +
                      std::to_string(G::kDim) + " entries");
  }
  Pose<G> pose;
  for (int i = 0; i < G::kDim; ++i) {
    pose.translation(i) = require_finite(tr[i].get<double>(), "translation_m");
  }
  if (j.contains("rotation")) {
    const auto& rot = j.at("rotation");
    if constexpr (std::is_same_v<G, SE3>) {
      if (!rot.is_array() || rot.size() != 4) {
        throw SchemaError("SE3 mount 'rotation' must be [ax, ay, az, theta_rad]");
      }
      Eigen::Vector3d axis(rot[0].get<double>(), rot[1].get<double>(),
                           rot[2].get<double>());
      if (axis.norm() == 0.0) {
        throw SchemaError("mount 'rotation' axis must be nonzero");
      }
      pose.rotation = Eigen::AngleAxisd(
                          require_finite(rot[3].get<double>(), "rotation"),
                          axis.normalized())
                          .toRotationMatrix();
    } else {
      if (!rot.is_array() || rot.size() != 1) {
        throw SchemaError("SE2 mount 'rotation' must be [theta_rad]");
      }
      const double t = require_finite(rot[0].get<double>(), "rotation");
      pose.rotation << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    }
  }
  return pose;
}

}  // namespace detail

inline DesignVariant load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open spec file: " + path);
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("parse error in " + path + ": " + e.what());
  }

  const std::string group =
      detail::require_field(j, "group").get<std::string>();
  if (group != "SE2" && group != "SE3") {
    throw SchemaError("field 'group' must be \"SE2\" or \"SE3\"");
  }
  const auto& dj = detail::require_field(j, "design");
  const std::string kind =
      detail::require_field(dj, "kind").get<std::string>();
  const Stiffness k =
      detail::parse_stiffness(detail::require_field(j, "stiffness"));

  DesignVariant out;
  if (kind == "planar") {
    if (group != "SE2") {
      throw SchemaError("planar designs require group \"SE2\"");
    }
    out = planar_design(detail::number_field(dj, "width_mm") * 1e-3, k);
  } else if (kind == "radial" || kind == "helical") {
    if (group != "SE3") {
      throw SchemaError(kind + " designs require group \"SE3\"");
    }
    const double dia = detail::number_field(dj, "diameter_mm") * 1e-3;
    const int count = detail::require_field(dj, "count").get<int>();
    const double tilt =
        kind == "helical"
            ? detail::number_field(dj, "tilt_deg") * M_PI / 180.0
            : 0.0;
    out = helical_design(dia, count, tilt, k);
  } else if (kind == "explicit") {
    const auto& mounts = detail::require_field(dj, "mounts");
    if (!mounts.is_array() || mounts.empty()) {
      throw SchemaError("explicit design needs a nonempty 'mounts' array");
    }
    auto build = [&]<class G>() {
      ManipulatorDesign<G> design;
      design.stiffness = k;
      design.info.kind = "explicit";
      int idx = 1;
      for (const auto& mj : mounts) {
        ActuatorMount<G> mount;
        mount.transform = detail::parse_mount_pose<G>(mj);
        mount.label = mj.value("label", "a" + std::to_string(idx));
        design.mounts.push_back(mount);
        ++idx;
      }
      return design;
    };
    if (group == "SE2") {
      out = build.operator()<SE2>();
    } else {
      out = build.operator()<SE3>();
    }
  } else {
    throw SchemaError("unknown design kind '" + kind + "'");
  }

  if (j.contains("contraction")) {
    const ContractionModel model = detail::parse_contraction(j.at("contraction"));
    std::visit([&](auto& d) { d.contraction = model; }, out);
  }
  return out;
}

inline nlohmann::json spec_to_json(const DesignVariant& design) {
  nlohmann::json j;
  std::visit(
    [&]<class G>(const ManipulatorDesign<G>& d) {
      j["group"] = std::is_same_v<G, SE2> ? "SE2" : "SE3";
      nlohmann::json dj;
      dj["kind"] = d.info.kind;
      if (d.info.kind == "planar") {
        dj["width_mm"] = d.info.width_m * 1e3;
      } else if (d.info.kind == "radial" || d.info.kind == "helical") {
        dj["diameter_mm"] = d.info.diameter_m * 1e3;
        dj["count"] = d.info.count;
        if (d.info.kind == "helical") {
          dj["tilt_deg"] = d.info.tilt_rad * 180.0 / M_PI;
        }
      } else {
        nlohmann::json mounts = nlohmann::json::array();
        for (const auto& mount : d.mounts) {
          nlohmann::json mj;
          mj["label"] = mount.label;
          mj["translation_m"] = std::vector<double>(
              mount.transform.translation.data(),
              mount.transform.translation.data() + G::kDim);
          if constexpr (std::is_same_v<G, SE3>) {
            const Eigen::AngleAxisd aa(mount.transform.rotation);
            mj["rotation"] = {aa.axis().x(), aa.axis().y(), aa.axis().z(),
                              aa.angle()};
          } else {
            mj["rotation"] = {std::atan2(mount.transform.rotation(1, 0),
                                         mount.transform.rotation(0, 0))};
          }
          mounts.push_back(mj);
        }
        dj["mounts"] = mounts;
      }
      j["design"] = dj;
      j["stiffness"] = {{"k_eps", d.stiffness.k_eps},
                        {"k_gamma", d.stiffness.k_gamma},
                        {"k_tau", d.stiffness.k_tau},
                        {"k_kappa_bar", d.stiffness.k_kappa}};
      if (d.contraction) {
        const auto& c = d.contraction->coefficients();
        j["contraction"] = {
            {"coefficients", std::vector<double>(c.data(), c.data() + c.size())},
            {"range_kpa",
             {d.contraction->q_min() * 1e-3, d.contraction->q_max() * 1e-3}}};
      }
    },
    design);
  return j;
}

inline void save_spec(const DesignVariant& design, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write spec file: " + path);
  }
  out << spec_to_json(design).dump(2) << "\n";
}

// Geometry CSV: s, x_m, y_m, z_m, qw, qx, qy, qz. SE(2) poses embed with
// z = 0 and rotation about z.
template <class G>
void write_geometry(const std::vector<std::pair<double, Pose<G>>>& poses,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write geometry file: " + path);
  }
  out << "s,x_m,y_m,z_m,qw,qx,qy,qz\n";
  for (const auto& [s, pose] : poses) {
    Eigen::Quaterniond q;
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    if constexpr (std::is_same_v<G, SE3>) {
      q = Eigen::Quaterniond(pose.rotation);
      p = pose.translation;
    } else {
      const double theta =
          std::atan2(pose.rotation(1, 0), pose.rotation(0, 0));
      q = Eigen::Quaterniond(
          Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitZ()));
      p.head<2>() = pose.translation;
    }
    if (q.w() < 0.0) q.coeffs() = -q.coeffs();
    out << detail::format_double(s) << ',' << detail::format_double(p.x())
        << ',' << detail::format_double(p.y()) << ','
        << detail::format_double(p.z()) << ',' << detail::format_double(q.w())
        << ',' << detail::format_double(q.x()) << ','
        << detail::format_double(q.y()) << ',' << detail::format_double(q.z())
        << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

inline double parse_number(const std::string& text, const std::string& field,
                           const std::string& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) {
      throw std::invalid_argument(text);
    }
    return v;
  } catch (const std::exception&) {
    throw IoError("invalid value '" + text + "' for field '" + field +
                  "' in " + path);
  }
}

}  // namespace detail

// Contraction CSV: header pressure_kpa, length_mm; converted to SI on parse.
inline std::vector<ContractionSample> read_contraction_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open contraction CSV: " + path);
  }
  std::string line;
  if (!std::getline(in, line) ||
      detail::split_csv_line(line) !=
          std::vector<std::string>{"pressure_kpa", "length_mm"}) {
    throw IoError("expected header 'pressure_kpa,length_mm' in " + path);
  }
  std::vector<ContractionSample> samples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 2) {
      throw IoError("expected 2 columns per row in " + path);
    }
    ContractionSample s;
    s.pressure_pa = detail::parse_number(fields[0], "pressure_kpa", path) * 1e3;
    s.length_m = detail::parse_number(fields[1], "length_mm", path) * 1e-3;
    if (s.pressure_pa < 0.0 || !(s.length_m > 0.0)) {
      throw IoError("contraction sample out of domain in " + path);
    }
    samples.push_back(s);
  }
  return samples;
}

// Marker CSV: capture_id, marker_id, s_hint (blank allowed), x_m, y_m, z_m.
inline std::vector<MarkerObservation> read_marker_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open marker CSV: " + path);
  }
  std::string line;
  if (!std::getline(in, line) ||
      detail::split_csv_line(line) !=
          std::vector<std::string>{"capture_id", "marker_id", "s_hint", "x_m",
                                   "y_m", "z_m"}) {
    throw IoError(
        "expected header 'capture_id,marker_id,s_hint,x_m,y_m,z_m' in " +
        path);
  }
  std::vector<MarkerObservation> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 6) {
      throw IoError("expected 6 columns per row in " + path);
    }
    MarkerObservation obs;
    obs.capture_id = fields[0];
    obs.marker_id = fields[1];
    if (!fields[2].empty()) {
      obs.s_hint = detail::parse_number(fields[2], "s_hint", path);
    }
    obs.position << detail::parse_number(fields[3], "x_m", path),
        detail::parse_number(fields[4], "y_m", path),
        detail::parse_number(fields[5], "z_m", path);
    out.push_back(obs);
  }
  return out;
}

}  // namespace twistarm

#endif  // TWISTARM_IO_HPP
