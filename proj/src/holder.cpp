#include <kimura/holder.hpp>

#include <algorithm>
#include <cmath>
#include <map>

#include <kimura/errors.hpp>

namespace kimura {

namespace {

std::vector<double> unit_interval_axis(int level, int per_decade) {
  std::vector<double> axis{0.0, 1.0};
  const int count = per_decade * (level + 1);
  for (int j = 0; j <= count; ++j) {
    const double g = std::pow(10.0, -static_cast<double>(j) / per_decade);
    axis.push_back(g);
    axis.push_back(1.0 - 0.5 * g);
  }
  std::sort(axis.begin(), axis.end());
  axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  return axis;
}

std::vector<double> outer_axis(int level, int per_decade, double box) {
  std::vector<double> axis{1.0, box};
  const int count = per_decade * (level + 1);
  for (int j = 0; j <= count; ++j) {
    axis.push_back(1.0 + (box - 1.0) * std::pow(10.0, -static_cast<double>(j) / per_decade));
  }
  std::sort(axis.begin(), axis.end());
  axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  return axis;
}

std::string region_label(const RegionIndex& region) {
  std::string label = "I={";
  bool first = true;
  for (int i : region.members()) {
    label += (first ? "" : ",") + std::to_string(i + 1);
    first = false;
  }
  return label + "}";
}

double sup_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) {
    s = std::max(s, std::abs(x));
  }
  return s;
}

// Seminorm of spatial samples with the anisotropic distance.
double spatial_seminorm(const std::vector<StatePoint>& points, const std::vector<double>& values, double alpha) {
  double best = 0.0;
  for (std::size_t a = 0; a < points.size(); ++a) {
    for (std::size_t b = a + 1; b < points.size(); ++b) {
      const double diff = std::abs(values[a] - values[b]);
      if (diff == 0.0) {
        continue;
      }
      const double rho = wf_distance(points[a], points[b]);
      if (rho == 0.0) {
        throw InvalidArgumentError("holder seminorm: coincident points carry different values");
      }
      best = std::max(best, diff / std::pow(rho, alpha));
    }
  }
  return best;
}

}  // namespace

SampledFunction SampledFunction::from(const std::function<double(const SpaceTimePoint&)>& u,
                                      std::vector<SpaceTimePoint> points) {
  SampledFunction fs;
  fs.values.reserve(points.size());
  for (const auto& p : points) {
    fs.values.push_back(u(p));
  }
  fs.points = std::move(points);
  return fs;
}

double holder_seminorm(const SampledFunction& fs, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgumentError("holder_seminorm needs alpha in (0, 1)");
  }
  if (fs.points.size() != fs.values.size()) {
    throw DimensionError("holder_seminorm: points and values differ in length");
  }
  if (fs.points.size() < 2) {
    throw InvalidArgumentError("holder_seminorm needs at least two points");
  }
  double best = 0.0;
  for (std::size_t a = 0; a < fs.points.size(); ++a) {
    for (std::size_t b = a + 1; b < fs.points.size(); ++b) {
      const double rho = spacetime_distance(fs.points[a], fs.points[b]);
      const double diff = std::abs(fs.values[a] - fs.values[b]);
      if (rho == 0.0) {
        if (diff != 0.0) {
          throw InvalidArgumentError("holder_seminorm: duplicate point with differing values");
        }
        continue;
      }
      best = std::max(best, diff / std::pow(rho, alpha));
    }
  }
  return best;
}

double holder_norm(const SampledFunction& fs, double alpha) { return sup_abs(fs.values) + holder_seminorm(fs, alpha); }

HolderBreakdown holder_2alpha_norm(const SampledFunction& fs, double alpha, const RegionIndex& region) {
  if (!fs.gradient || !fs.hessian || !fs.time_derivative) {
    throw InvalidArgumentError("holder_2alpha_norm needs gradient, hessian and time-derivative oracles");
  }
  if (fs.points.empty()) {
    throw InvalidArgumentError("holder_2alpha_norm: no sample points");
  }
  if (!fs.gradient || !fs.hessian || !fs.time_derivative) {
    throw InvalidArgumentError("holder_2alpha_norm needs gradient, hessian and time-derivative oracles");
  }
  const int n = fs.points.front().z.n();
  const int m = fs.points.front().z.m();
  if (region.n() != n) {
    throw DimensionError("holder_2alpha_norm: region does not match n");
  }
  for (const auto& p : fs.points) {
    if (region_of(p.z).complement().mask() & region.mask()) {
      // some i in I has x_i > 1
      throw InvalidArgumentError("holder_2alpha_norm: sample outside the closure of M_I");
    }
    for (int i = 0; i < n; ++i) {
      if (!region.contains(i) && p.z.x(i) < 1.0) {
        throw InvalidArgumentError("holder_2alpha_norm: sample outside the closure of M_I");
      }
    }
  }
  std::vector<Vector> grads;
  std::vector<Matrix> hess;
  std::vector<double> ut;
  for (const auto& p : fs.points) {
    grads.push_back(fs.gradient(p));
    hess.push_back(fs.hessian(p));
    ut.push_back(fs.time_derivative(p));
  }
  HolderBreakdown out;
  auto add = [&](const std::string& name, const std::function<double(std::size_t)>& sample) {
    SampledFunction g;
    g.points = fs.points;
    g.values.resize(fs.points.size());
    for (std::size_t k = 0; k < fs.points.size(); ++k) {
      g.values[k] = sample(k);
    }
    const double v = g.points.size() >= 2 ? holder_norm(g, alpha) : sup_abs(g.values);
    out.terms.push_back({name, v});
    out.total += v;
  };
  auto x = [&](std::size_t k, int i) { return fs.points[k].z.x(i); };
  add("u", [&](std::size_t k) { return fs.values[k]; });
  for (int c = 0; c < n + m; ++c) {
    const std::string name = c < n ? "u_x" + std::to_string(c + 1) : "u_y" + std::to_string(c - n + 1);
    add(name, [&, c](std::size_t k) { return grads[k](c); });
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::string ij = std::to_string(i + 1) + std::to_string(j + 1);
      if (region.contains(i) && region.contains(j)) {
        add("sqrt(x_i x_j) u_xx " + ij, [&, i, j](std::size_t k) { return std::sqrt(x(k, i) * x(k, j)) * hess[k](i, j); });
      } else if (region.contains(i) && !region.contains(j)) {
        add("sqrt(x_i) u_xx " + ij, [&, i, j](std::size_t k) { return std::sqrt(x(k, i)) * hess[k](i, j); });
      } else if (!region.contains(i) && !region.contains(j)) {
        add("u_xx " + ij, [&, i, j](std::size_t k) { return hess[k](i, j); });
      }
    }
    for (int l = 0; l < m; ++l) {
      const std::string il = std::to_string(i + 1) + std::to_string(l + 1);
      if (region.contains(i)) {
        add("sqrt(x_i) u_xy " + il, [&, i, l](std::size_t k) { return std::sqrt(x(k, i)) * hess[k](i, n + l); });
      } else {
        add("u_xy " + il, [&, i, l](std::size_t k) { return hess[k](i, n + l); });
      }
    }
  }
  for (int l = 0; l < m; ++l) {
    for (int r = 0; r < m; ++r) {
      add("u_yy " + std::to_string(l + 1) + std::to_string(r + 1),
          [&, l, r](std::size_t k) { return hess[k](n + l, n + r); });
    }
  }
  add("u_t", [&](std::size_t k) { return ut[k]; });
  return out;
}

std::vector<StatePoint> region_grid(int n, int m, const RegionIndex& region, int level, const HolderGridSpec& spec) {
  std::vector<std::vector<double>> axes;
  for (int i = 0; i < n; ++i) {
    axes.push_back(region.contains(i) ? unit_interval_axis(level, spec.points_per_decade)
                                      : outer_axis(level, spec.points_per_decade, spec.box));
  }
  for (int l = 0; l < m; ++l) {
    std::vector<double> axis;
    const int count = std::max(1, spec.free_points);
    for (int k = 0; k < count; ++k) {
      axis.push_back(count == 1 ? 0.0 : -spec.free_box + 2.0 * spec.free_box * k / (count - 1));
    }
    axes.push_back(axis);
  }
  std::size_t total = 1;
  for (const auto& a : axes) {
    total *= a.size();
  }
  if (total > spec.max_points) {
    throw InvalidArgumentError("region grid has " + std::to_string(total) + " points, above max_points");
  }
  std::vector<StatePoint> out;
  out.reserve(total);
  std::vector<std::size_t> index(axes.size(), 0);
  for (std::size_t k = 0; k < total; ++k) {
    StatePoint z = StatePoint::zero(n, m);
    for (int c = 0; c < n + m; ++c) {
      const double v = axes[static_cast<std::size_t>(c)][index[static_cast<std::size_t>(c)]];
      if (c < n) {
        z.x(c) = v;
      } else {
        z.y(c - n) = v;
      }
    }
    out.push_back(std::move(z));
    for (std::size_t c = 0; c < axes.size(); ++c) {
      if (++index[c] < axes[c].size()) {
        break;
      }
      index[c] = 0;
    }
  }
  return out;
}

HolderValidation validate_coefficient_holder(const CoefficientModel& model, double alpha, const HolderGridSpec& spec) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgumentError("validate_coefficient_holder needs alpha in (0, 1)");
  }
  if (spec.levels < 2) {
    throw InvalidArgumentError("validate_coefficient_holder needs at least two refinement levels");
  }
  const int n = model.n;
  const int m = model.m;
  HolderValidation out;
  double worst_growth = 0.0;
  double largest = 0.0;
  std::int64_t flags = 0;
  std::string first_flag;
  for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
    const RegionIndex region(n, mask);
    const std::string label = region_label(region);
    std::map<std::string, std::vector<double>> history;
    std::vector<std::string> order;
    for (int level = 0; level < spec.levels; ++level) {
      const std::vector<StatePoint> grid = region_grid(n, m, region, level, spec);
      // term name -> values on the grid
      std::map<std::string, std::vector<double>> terms;
      std::vector<std::string> names;
      auto push = [&](const std::string& name, double v) {
        auto [it, inserted] = terms.try_emplace(name);
        if (inserted) {
          names.push_back(name);
        }
        it->second.push_back(v);
      };
      for (const auto& z : grid) {
        const Vector b = model.b(z);
        for (int i = 0; i < n; ++i) {
          push("b_" + std::to_string(i + 1), b(i));
        }
        if (m > 0) {
          const Vector e = model.e(z);
          for (int l = 0; l < m; ++l) {
            push("e_" + std::to_string(l + 1), e(l));
          }
        }
        if (model.decomposition) {
          const auto& dec = *model.decomposition;
          const Vector al = dec.alpha_diag(z);
          const Matrix at = dec.alpha_tilde(z);
          for (int i = 0; i < n; ++i) {
            const std::string s = std::to_string(i + 1);
            push(region.contains(i) ? "alpha_" + s + s : "x_" + s + " alpha_" + s + s,
                 region.contains(i) ? al(i) : z.x(i) * al(i));
            for (int j = 0; j < n; ++j) {
              const std::string t = s + std::to_string(j + 1);
              double w = 1.0;
              std::string prefix;
              if (!region.contains(i)) {
                w *= z.x(i);
                prefix += "x_" + s + " ";
              }
              if (!region.contains(j)) {
                w *= z.x(j);
                prefix += "x_" + std::to_string(j + 1) + " ";
              }
              push(prefix + "tilde_alpha_" + t, w * at(i, j));
            }
          }
          if (m > 0) {
            const Matrix c = dec.c(z);
            const Matrix af = dec.a_free(z);
            for (int i = 0; i < n; ++i) {
              for (int l = 0; l < m; ++l) {
                const std::string t = std::to_string(i + 1) + std::to_string(l + 1);
                push(region.contains(i) ? "c_" + t : "x_" + std::to_string(i + 1) + " c_" + t,
                     region.contains(i) ? c(i, l) : z.x(i) * c(i, l));
              }
            }
            for (int k = 0; k < m; ++k) {
              for (int l = 0; l < m; ++l) {
                push("a_free_" + std::to_string(k + 1) + std::to_string(l + 1), af(k, l));
              }
            }
          }
        } else {
          const Matrix a = assemble_a(model, z);
          for (int i = 0; i < n + m; ++i) {
            for (int j = i; j < n + m; ++j) {
              push("a_" + std::to_string(i + 1) + std::to_string(j + 1), a(i, j));
            }
          }
        }
      }
      for (const auto& name : names) {
        const double est = spatial_seminorm(grid, terms[name], alpha);
        if (!history.count(name)) {
          order.push_back(name);
        }
        history[name].push_back(est);
        out.rows.push_back({label, name, level, est});
      }
    }
    for (const auto& name : order) {
      const auto& h = history[name];
      const double prev = h[h.size() - 2];
      const double last = h.back();
      largest = std::max(largest, last);
      const double growth = prev > 1e-12 ? last / prev : (last > 1e-12 ? INFINITY : 1.0);
      worst_growth = std::max(worst_growth, growth);
      if (growth > spec.blowup_factor) {
        if (flags == 0) {
          first_flag = label + " " + name;
        }
        ++flags;
      }
    }
  }
  auto& r = out.report;
  r.name = "coefficient-holder";
  r.estimate = worst_growth;
  r.bound = spec.blowup_factor;
  r.verdict = verdict_from_bool(flags == 0);
  r.metadata["alpha"] = alpha;
  r.metadata["blowup_flags"] = flags;
  r.metadata["largest_seminorm"] = largest;
  r.metadata["levels"] = static_cast<std::int64_t>(spec.levels);
  if (flags > 0) {
    r.metadata["first_flagged"] = first_flag;
  }
  return out;
}

}  // namespace kimura
