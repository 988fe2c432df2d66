// Command-line front end: equilibrium sweeps, contraction characterization,
// shape fitting from marker captures, model-vs-measurement comparison, and
// the randomized validation suite.
//
// Exit codes: 0 success, 1 user error, 2 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "twistarm/io.hpp"
#include "twistarm/mechanics.hpp"
#include "twistarm/validate.hpp"

namespace {

using namespace twistarm;

constexpr int kExitUser = 1;
constexpr int kExitNumerical = 2;

struct UserError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) { return twistarm::detail::format_double(v); }

// Sweep syntax: comma-separated "name=value" or "name=start:stop:count",
// all in kPa. Every actuator label must appear; rows are the cartesian
// product in actuator order, first actuator varying slowest.
std::vector<std::vector<double>> parse_sweep(
    const std::string& text, const std::vector<std::string>& labels) {
  std::map<std::string, std::vector<double>> per_label;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) {
      throw UserError("bad sweep term '" + part + "', expected name=value");
    }
    const std::string name = part.substr(0, eq);
    const std::string value = part.substr(eq + 1);
    std::vector<double> values;
    const auto c1 = value.find(':');
    if (c1 == std::string::npos) {
      values.push_back(std::stod(value) * 1e3);
    } else {
      const auto c2 = value.find(':', c1 + 1);
      if (c2 == std::string::npos) {
        throw UserError("bad sweep range '" + value +
                        "', expected start:stop:count");
      }
      const double start = std::stod(value.substr(0, c1)) * 1e3;
      const double stop = std::stod(value.substr(c1 + 1, c2 - c1 - 1)) * 1e3;
      const int count = std::stoi(value.substr(c2 + 1));
      if (count < 1) {
        throw UserError("sweep count must be positive in '" + value + "'");
      }
      for (int i = 0; i < count; ++i) {
        values.push_back(count == 1 ? start
                                    : start + (stop - start) * i / (count - 1));
      }
    }
    per_label[name] = values;
  }
  std::vector<std::vector<double>> axes;
  for (const auto& label : labels) {
    const auto it = per_label.find(label);
    if (it == per_label.end()) {
      throw UserError("sweep missing actuator '" + label + "'");
    }
    axes.push_back(it->second);
    per_label.erase(it);
  }
  if (!per_label.empty()) {
    throw UserError("sweep names unknown actuator '" +
                    per_label.begin()->first + "'");
  }
  std::vector<std::vector<double>> rows{{}};
  for (const auto& axis : axes) {
    std::vector<std::vector<double>> next;
    for (const auto& row : rows) {
      for (double v : axis) {
        auto r = row;
        r.push_back(v);
        next.push_back(r);
      }
    }
    rows = std::move(next);
  }
  return rows;
}

Twist<SE3> embed_se3(const Twist<SE2>& xi) {
  Twist<SE3> out = Twist<SE3>::Zero();
  out(0) = xi(0);
  out(1) = xi(1);
  out(5) = xi(2);
  return out;
}

int cmd_simulate(const std::string& spec_path, const std::string& sweep,
                 const std::string& out_path, bool quiet) {
  const DesignVariant design = load_spec(spec_path);
  return std::visit(
    [&]<class G>(const ManipulatorDesign<G>& d) -> int {
      if (!d.contraction) {
        throw UserError("spec has no contraction model; simulate needs one");
      }
      std::vector<std::string> labels;
      for (const auto& m : d.mounts) labels.push_back(m.label);
      const auto rows = parse_sweep(sweep, labels);

      for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
          if (row[i] < d.contraction->q_min() ||
              row[i] > d.contraction->q_max()) {
            throw UserError("pressure " + fmt(row[i] * 1e-3) +
                            " kPa for actuator '" + labels[i] +
                            "' outside contraction range [" +
                            fmt(d.contraction->q_min() * 1e-3) + ", " +
                            fmt(d.contraction->q_max() * 1e-3) + "] kPa");
          }
        }
      }

      const EquilibriumSystem<G> sys = assemble(d);
      std::ofstream out(out_path);
      if (!out) throw UserError("cannot write report: " + out_path);
      out << "row";
      for (const auto& label : labels) out << ',' << label << "_kpa";
      if constexpr (std::is_same_v<G, SE3>) {
        out << ",v_x,v_y,v_z,tau,omega_y,omega_z";
      } else {
        out << ",v_x,v_y,kappa";
      }
      out << ",tip_x_m,tip_y_m,tip_z_m\n";

      const std::filesystem::path base(out_path);
      const std::string stem = (base.parent_path() / base.stem()).string();
      for (std::size_t r = 0; r < rows.size(); ++r) {
        Eigen::VectorXd lengths(rows[r].size());
        for (std::size_t i = 0; i < rows[r].size(); ++i) {
          lengths(static_cast<Eigen::Index>(i)) =
              d.contraction->evaluate(rows[r][i]);
        }
        const Twist<G> xi = solve_equilibrium(sys, lengths);
        if (!xi.allFinite()) {
          std::cerr << "numerical failure: non-finite equilibrium at row " << r
                    << "\n";
          return kExitNumerical;
        }
        RodState<G> state;
        state.xi = xi;
        const auto poses = sample_poses(state);
        char idx[8];
        std::snprintf(idx, sizeof(idx), "%03zu", r);
        write_geometry(poses, stem + "_geom_" + idx + ".csv");

        Eigen::Vector3d tip = Eigen::Vector3d::Zero();
        if constexpr (std::is_same_v<G, SE3>) {
          tip = poses.back().second.translation;
        } else {
          tip.head<2>() = poses.back().second.translation;
        }
        out << r;
        for (double p : rows[r]) out << ',' << fmt(p * 1e-3);
        for (int k = 0; k < G::kDof; ++k) out << ',' << fmt(xi(k));
        out << ',' << fmt(tip.x()) << ',' << fmt(tip.y()) << ','
            << fmt(tip.z()) << '\n';
      }
      if (!quiet) {
        std::cout << "wrote " << rows.size() << " rows to " << out_path
                  << "\n";
      }
      return 0;
    },
    design);
}

int cmd_fit_contraction(const std::string& csv_path, int degree,
                        const std::string& out_path, bool quiet) {
  const auto samples = read_contraction_csv(csv_path);
  const ContractionModel model = fit_contraction(samples, degree);
  double ss = 0.0;
  for (const auto& s : samples) {
    const double r = model.evaluate(s.pressure_pa) - s.length_m;
    ss += r * r;
  }
  nlohmann::json j;
  const auto& c = model.coefficients();
  j["coefficients"] = std::vector<double>(c.data(), c.data() + c.size());
  j["range_kpa"] = {model.q_min() * 1e-3, model.q_max() * 1e-3};
  j["degree"] = model.degree();
  j["residual_rms_m"] = std::sqrt(ss / samples.size());
  std::ofstream out(out_path);
  if (!out) throw UserError("cannot write model: " + out_path);
  out << j.dump(2) << "\n";
  if (!quiet) {
    std::cout << "fitted degree-" << degree << " model from "
              << samples.size() << " samples\n";
  }
  return 0;
}

nlohmann::json fit_to_json(const FitResult& fit) {
  nlohmann::json j;
  j["xi"] = {fit.xi_fit(0), fit.xi_fit(1), fit.xi_fit(2),
             fit.xi_fit(3), fit.xi_fit(4), fit.xi_fit(5)};
  j["residual_rms_m"] = fit.residual_rms;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["ill_conditioned"] = fit.ill_conditioned;
  return j;
}

std::map<std::string, std::vector<MarkerObservation>> group_by_capture(
    const std::vector<MarkerObservation>& markers) {
  std::map<std::string, std::vector<MarkerObservation>> by_capture;
  for (const auto& m : markers) {
    by_capture[m.capture_id].push_back(m);
  }
  return by_capture;
}

Twist<SE3> default_init(const std::vector<MarkerObservation>& markers) {
  double far = 0.0;
  for (const auto& m : markers) far = std::max(far, m.position.norm());
  Twist<SE3> init = Twist<SE3>::Zero();
  init(0) = far > 0.0 ? far : 0.4;
  return init;
}

int cmd_fit_shape(const std::string& markers_path,
                  const std::vector<double>& init_values,
                  const std::string& out_path, bool quiet) {
  const auto markers = read_marker_csv(markers_path);
  if (markers.empty()) throw UserError("no markers in " + markers_path);
  const auto by_capture = group_by_capture(markers);

  std::optional<Twist<SE3>> init;
  if (!init_values.empty()) {
    if (init_values.size() != 6) {
      throw UserError("--init needs 6 twist components");
    }
    Twist<SE3> xi;
    for (int i = 0; i < 6; ++i) xi(i) = init_values[i];
    init = xi;
  }

  const bool alternating = std::any_of(
      markers.begin(), markers.end(),
      [](const MarkerObservation& m) { return !m.s_hint.has_value(); });

  nlohmann::json captures = nlohmann::json::object();
  std::vector<FitResult> fits;
  for (const auto& [capture_id, obs] : by_capture) {
    const FitResult fit =
        fit_twist(obs, init.value_or(default_init(obs)));
    captures[capture_id] = fit_to_json(fit);
    fits.push_back(fit);
  }
  const FitResult aggregate = median_aggregate(fits);

  nlohmann::json j;
  j["result"] = fit_to_json(aggregate);
  j["captures"] = captures;
  j["mode"] = alternating ? "alternating-projection" : "s_hint";
  std::ofstream out(out_path);
  if (!out) throw UserError("cannot write fit: " + out_path);
  out << j.dump(2) << "\n";
  if (!quiet) {
    std::cout << "fitted " << fits.size() << " captures, residual rms "
              << aggregate.residual_rms << " m\n";
  }
  return 0;
}

int cmd_compare(const std::string& spec_path, const std::string& markers_path,
                const std::string& pressures_path, const std::string& out_path,
                bool quiet) {
  const DesignVariant design_v = load_spec(spec_path);
  const auto markers = read_marker_csv(markers_path);
  const auto by_capture = group_by_capture(markers);

  // Pressures CSV: capture_id, <label>_kpa per actuator.
  std::vector<std::string> labels;
  std::visit(
      [&](const auto& d) {
        for (const auto& m : d.mounts) labels.push_back(m.label);
      },
      design_v);
  std::ifstream in(pressures_path);
  if (!in) throw UserError("cannot open pressures CSV: " + pressures_path);
  std::string line;
  std::vector<std::string> expected{"capture_id"};
  for (const auto& l : labels) expected.push_back(l + "_kpa");
  if (!std::getline(in, line) ||
      twistarm::detail::split_csv_line(line) != expected) {
    std::string hdr;
    for (const auto& e : expected) hdr += (hdr.empty() ? "" : ",") + e;
    throw UserError("expected header '" + hdr + "' in " + pressures_path);
  }
  std::map<std::string, std::vector<double>> pressures;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = twistarm::detail::split_csv_line(line);
    if (fields.size() != expected.size()) {
      throw UserError("bad row in " + pressures_path);
    }
    std::vector<double> row;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      row.push_back(twistarm::detail::parse_number(fields[i], expected[i],
                                                   pressures_path) *
                    1e3);
    }
    pressures[fields[0]] = row;
  }
  for (const auto& [capture_id, obs] : by_capture) {
    if (!pressures.count(capture_id)) {
      throw UserError("capture '" + capture_id +
                      "' has markers but no pressure record");
    }
  }

  return std::visit(
    [&]<class G>(const ManipulatorDesign<G>& d) -> int {
      if (!d.contraction) {
        throw UserError("spec has no contraction model; compare needs one");
      }
      const EquilibriumSystem<G> sys = assemble(d);

      // Group captures by identical pressure vector, median-aggregate the
      // per-capture fits within each group.
      std::map<std::vector<double>, std::vector<std::string>> groups;
      for (const auto& [capture_id, obs] : by_capture) {
        groups[pressures.at(capture_id)].push_back(capture_id);
      }

      std::ofstream out(out_path);
      if (!out) throw UserError("cannot write report: " + out_path);
      for (const auto& label : labels) {
        out << label << "_kpa,";
      }
      out << "curv_err_x,curv_err_y,curv_err_z,tip_error_normalized,"
             "winding_radius_error,pitch_error\n";

      for (const auto& [pvec, capture_ids] : groups) {
        Eigen::VectorXd lengths(pvec.size());
        for (std::size_t i = 0; i < pvec.size(); ++i) {
          lengths(static_cast<Eigen::Index>(i)) =
              d.contraction->evaluate(pvec[i]);
        }
        const Twist<G> xi_model_g = solve_equilibrium(sys, lengths);
        Twist<SE3> xi_model;
        if constexpr (std::is_same_v<G, SE3>) {
          xi_model = xi_model_g;
        } else {
          xi_model = embed_se3(xi_model_g);
        }

        std::vector<FitResult> fits;
        for (const auto& capture_id : capture_ids) {
          fits.push_back(fit_twist(by_capture.at(capture_id),
                                   default_init(by_capture.at(capture_id))));
        }
        const FitResult measured = median_aggregate(fits);

        const Eigen::Vector3d model_tip = expmap(xi_model).translation;
        const Eigen::Vector3d measured_tip =
            compose(measured.base_pose_fit, expmap(measured.xi_fit))
                .translation;
        AccuracyReport report =
            accuracy(xi_model, measured.xi_fit, model_tip, measured_tip,
                     lengths.mean());
        try {
          const HelixMetrics hm = helix_metrics(xi_model);
          const HelixMetrics hmeas = helix_metrics(measured.xi_fit);
          report.winding_radius_error =
              std::abs(hm.radius - hmeas.radius) / hmeas.radius;
          report.pitch_error =
              std::abs(hm.pitch - hmeas.pitch) /
              std::max(std::abs(hmeas.pitch), 1e-12);
        } catch (const DegenerateHelixError&) {
          // straight configuration, helix columns stay blank
        }

        for (double p : pvec) out << fmt(p * 1e-3) << ',';
        out << fmt(report.scaled_curvature_error.x()) << ','
            << fmt(report.scaled_curvature_error.y()) << ','
            << fmt(report.scaled_curvature_error.z()) << ','
            << fmt(report.tip_error_normalized) << ',';
        if (report.winding_radius_error) {
          out << fmt(*report.winding_radius_error);
        }
        out << ',';
        if (report.pitch_error) {
          out << fmt(*report.pitch_error);
        }
        out << '\n';
      }
      if (!quiet) {
        std::cout << "compared " << groups.size() << " pressure groups\n";
      }
      return 0;
    },
    design_v);
}

int cmd_validate(unsigned long long seed, bool inject_fault, bool quiet) {
  const auto checks = validation::run_all(seed, inject_fault);
  bool all_passed = true;
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& c : checks) {
    if (!quiet || !c.passed) {
      std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name;
      if (!c.detail.empty()) std::cout << "  (" << c.detail << ")";
      std::cout << "\n";
    }
    if (!c.passed) {
      all_passed = false;
      failures.push_back({{"check", c.name},
                          {"detail", c.detail},
                          {"seed", seed}});
    }
  }
  if (!all_passed) {
    std::ofstream out("validate_failures.json");
    out << failures.dump(2) << "\n";
    std::cerr << "failing cases written to validate_failures.json\n";
    return kExitNumerical;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constant-twist continuum manipulator model"};
  app.require_subcommand(1);

  unsigned long long seed = 42;
  bool quiet = false;
  app.add_option("--seed", seed, "Seed for randomized validation");
  app.add_flag("--quiet", quiet, "Suppress progress output");

  std::string spec_path, out_path, sweep, csv_path, markers_path,
      pressures_path;
  int degree = 5;
  std::vector<double> init_values;
  bool inject_fault = false;

  auto* sim = app.add_subcommand("simulate", "Equilibrium pressure sweep");
  sim->add_option("--spec", spec_path, "Manipulator spec JSON")->required();
  sim->add_option("--sweep", sweep,
                  "Pressure sweep, e.g. \"a1=0:345:8,a2=0\" (kPa)")
      ->required();
  sim->add_option("--out", out_path, "Report CSV path")->required();

  auto* fitc = app.add_subcommand("fit-contraction",
                                  "Fit free-contraction polynomial");
  fitc->add_option("--csv", csv_path, "Samples CSV (pressure_kpa,length_mm)")
      ->required();
  fitc->add_option("--degree", degree, "Polynomial degree (default 5)");
  fitc->add_option("--out", out_path, "Model JSON path")->required();

  auto* fits = app.add_subcommand("fit-shape",
                                  "Fit base-curve twist to marker captures");
  fits->add_option("--markers", markers_path, "Marker CSV")->required();
  fits->add_option("--init", init_values, "Initial twist guess (6 values)");
  fits->add_option("--out", out_path, "Fit JSON path")->required();

  auto* cmp = app.add_subcommand("compare",
                                 "Model vs. measured accuracy report");
  cmp->add_option("--spec", spec_path, "Manipulator spec JSON")->required();
  cmp->add_option("--markers", markers_path, "Marker CSV")->required();
  cmp->add_option("--pressures", pressures_path, "Per-capture pressure CSV")
      ->required();
  cmp->add_option("--out", out_path, "Report CSV path")->required();

  auto* val = app.add_subcommand("validate", "Run the oracle suite");
  val->add_flag("--inject-fault", inject_fault,
                "Perturb a reference matrix (harness negative control)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(spec_path, sweep, out_path, quiet);
    if (fitc->parsed()) {
      return cmd_fit_contraction(csv_path, degree, out_path, quiet);
    }
    if (fits->parsed()) {
      return cmd_fit_shape(markers_path, init_values, out_path, quiet);
    }
    if (cmp->parsed()) {
      return cmd_compare(spec_path, markers_path, pressures_path, out_path,
                         quiet);
    }
    if (val->parsed()) return cmd_validate(seed, inject_fault, quiet);
  } catch (const UserError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUser;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUser;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUser;
  } catch (const ExtrapolationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUser;
  } catch (const ContractionFitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUser;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    std::ofstream out("failure_case.json");
    out << nlohmann::json{{"what", e.what()}}.dump(2) << "\n";
    return kExitNumerical;
  }
  return 0;
}
