#ifndef TWISTARM_SIMPLEX_HPP
#define TWISTARM_SIMPLEX_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace twistarm {

struct SimplexOptions {
  double diameter_tol = 1e-10;
  double decrease_tol = 1e-12;
  int max_iterations = 20000;
  int max_restarts = 10;
  double initial_step = 0.05;
};

struct SimplexResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

// Nelder-Mead downhill simplex with restarts. Converged means the simplex
// diameter fell below diameter_tol and the best value decreased by less than
// decrease_tol over the last 2*dim iterations. Simplex stagnation is common
// on 6-12 dimensional objectives, so each restart re-inflates the simplex
// around the best point found so far.
inline SimplexResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x0, const SimplexOptions& opt = {}) {
  const int dim = static_cast<int>(x0.size());
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

  SimplexResult result;
  result.x = x0;
  result.value = f(x0);

  double step = opt.initial_step;
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    std::vector<Eigen::VectorXd> verts(dim + 1, result.x);
    for (int i = 0; i < dim; ++i) {
      verts[i + 1](i) += step;
    }
    std::vector<double> vals(dim + 1);
    for (int i = 0; i <= dim; ++i) {
      vals[i] = f(verts[i]);
    }

    std::vector<double> history;
    bool converged = false;
    for (int iter = 0; iter < opt.max_iterations; ++iter) {
      std::vector<int> order(dim + 1);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&](int a, int b) { return vals[a] < vals[b]; });
      const int best = order[0], worst = order[dim], second = order[dim - 1];

      double diameter = 0.0;
      for (int i = 1; i <= dim; ++i) {
        diameter = std::max(diameter, (verts[order[i]] - verts[best]).norm());
      }
      history.push_back(vals[best]);
      const int window = 2 * dim;
      const bool flat =
          static_cast<int>(history.size()) > window &&
          history[history.size() - 1 - window] - history.back() <
              opt.decrease_tol;
      if (diameter < opt.diameter_tol && flat) {
        converged = true;
        result.iterations += iter;
        break;
      }

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
      for (int i = 0; i < dim; ++i) {
        centroid += verts[order[i]];
      }
      centroid /= dim;

      const Eigen::VectorXd refl = centroid + alpha * (centroid - verts[worst]);
      const double f_refl = f(refl);
      if (f_refl < vals[best]) {
        const Eigen::VectorXd exp_pt =
            centroid + gamma * (refl - centroid);
        const double f_exp = f(exp_pt);
        if (f_exp < f_refl) {
          verts[worst] = exp_pt;
          vals[worst] = f_exp;
        } else {
          verts[worst] = refl;
          vals[worst] = f_refl;
        }
      } else if (f_refl < vals[second]) {
        verts[worst] = refl;
        vals[worst] = f_refl;
      } else {
        const Eigen::VectorXd contr =
            centroid + rho * (verts[worst] - centroid);
        const double f_contr = f(contr);
        if (f_contr < vals[worst]) {
          verts[worst] = contr;
          vals[worst] = f_contr;
        } else {
          for (int i = 1; i <= dim; ++i) {
            verts[order[i]] =
                verts[best] + sigma * (verts[order[i]] - verts[best]);
            vals[order[i]] = f(verts[order[i]]);
          }
        }
      }
    }

    for (int i = 0; i <= dim; ++i) {
      if (vals[i] < result.value) {
        result.value = vals[i];
        result.x = verts[i];
      }
    }
    if (converged) {
      result.converged = true;
      break;
    }
    result.iterations += opt.max_iterations;
    step = std::max(step * 0.3, 1e-6);
  }
  return result;
}

}  // namespace twistarm

#endif  // TWISTARM_SIMPLEX_HPP
