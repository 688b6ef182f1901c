#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "pool.hpp"

namespace hfq::cli {

using ojson = nlohmann::ordered_json;

namespace {

// +0.0 folds negative zeros so reports never show "-0.0"
double clean(double v) { return v + 0.0; }

ojson cnum(Complex z) { return ojson::array({clean(z.real()), clean(z.imag())}); }

ojson vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

template <typename D>
ojson mat_json(const Eigen::MatrixBase<D>& m) {
  ojson rows = ojson::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ojson r = ojson::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if constexpr (std::is_same_v<typename D::Scalar, Complex>)
        r.push_back(cnum(m(i, j)));
      else
        r.push_back(clean(m(i, j)));
    }
    rows.push_back(r);
  }
  return rows;
}

ojson tensor_json(const Tensor3<double>& t) {
  ojson a = ojson::array();
  for (int i = 0; i < t.extent(0); ++i) {
    ojson b = ojson::array();
    for (int j = 0; j < t.extent(1); ++j) {
      ojson c = ojson::array();
      for (int k = 0; k < t.extent(2); ++k) c.push_back(clean(t(i, j, k)));
      b.push_back(c);
    }
    a.push_back(b);
  }
  return a;
}

ojson tensor_json(const Tensor4<double>& t) {
  ojson a = ojson::array();
  for (int i = 0; i < t.extent(0); ++i) {
    ojson b = ojson::array();
    for (int j = 0; j < t.extent(1); ++j) {
      ojson c = ojson::array();
      for (int k = 0; k < t.extent(2); ++k) {
        ojson d = ojson::array();
        for (int l = 0; l < t.extent(3); ++l) d.push_back(clean(t(i, j, k, l)));
        c.push_back(d);
      }
      b.push_back(c);
    }
    a.push_back(b);
  }
  return a;
}

ojson ct_json(const CurvatureTorsion& ct) {
  ojson j;
  j["Omega"] = tensor_json(ct.Omega);
  j["T"] = tensor_json(ct.T);
  j["S"] = tensor_json(ct.S);
  j["P"] = tensor_json(ct.P);
  j["R"] = tensor_json(ct.R);
  j["Pc"] = tensor_json(ct.Pc);
  j["Sc"] = tensor_json(ct.Sc);
  j["W"] = tensor_json(ct.W);
  return j;
}

ojson point_json(int index, const PhasePoint& p) {
  ojson j;
  j["index"] = index;
  j["x"] = vec_json(p.base);
  j[std::string(1, fiber_letter(p.bundle))] = vec_json(p.fiber);
  return j;
}

ojson suite_json(const CheckSuite& s) {
  ojson a = ojson::array();
  for (const auto& r : s.results()) {
    ojson e;
    e["name"] = r.name;
    if (std::isfinite(r.residual))
      e["residual"] = r.residual;
    else
      e["residual"] = nullptr;
    e["tolerance"] = r.tolerance;
    e["pass"] = r.pass;
    a.push_back(e);
  }
  return a;
}

ojson error_json(const std::string& kind, const std::string& what) {
  ojson e;
  e["type"] = kind;
  e["message"] = what;
  return e;
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const DegenerateHessian*>(&e)) return "DegenerateHessian";
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const InsufficientJetOrder*>(&e)) return "InsufficientJetOrder";
  if (dynamic_cast<const NewtonDivergence*>(&e)) return "NewtonDivergence";
  if (dynamic_cast<const JetMismatch*>(&e)) return "JetMismatch";
  return "MathError";
}

struct PointOut {
  ojson block;
  CheckSuite checks;
  bool math_error = false;
  std::string csv;
};

ojson report_head(const std::string& command, const JobConfig& c) {
  ojson r;
  r["tool"] = "hfq";
  r["version"] = kToolVersion;
  r["command"] = command;
  r["config"] = c.echo();
  return r;
}

CommandResult assemble(const std::string& command, const JobConfig& c, const std::vector<PointOut>& outs,
                       const CheckSuite& global) {
  CommandResult res;
  res.report = report_head(command, c);
  CheckSuite all;
  all.append(global);
  ojson blocks = ojson::array();
  bool math = false;
  for (std::size_t k = 0; k < outs.size(); ++k) {
    blocks.push_back(outs[k].block);
    all.append(outs[k].checks, "point[" + std::to_string(k) + "].");
    math = math || outs[k].math_error;
  }
  res.report["points"] = blocks;
  res.report["checks"] = suite_json(all);
  std::size_t failed = 0;
  for (const auto& r : all.results())
    if (!r.pass) ++failed;
  ojson summary;
  summary["checks"] = all.results().size();
  summary["failed"] = failed;
  summary["errors"] = all.errors();
  summary["pass"] = all.all_pass();
  res.report["summary"] = summary;
  res.exit_code = math ? kExitMath : (all.all_pass() ? kExitPass : kExitCheckFailed);
  res.csv = checks_csv(all);
  return res;
}

const std::vector<PhasePoint>& require_points(const JobConfig& c) {
  if (c.points.empty()) throw InputError("no points configured (use \"points\" or --point)");
  return c.points;
}

// Runs job on every point; math errors become failed checks when tolerated,
// otherwise they propagate.
std::vector<PointOut> run_points(const JobConfig& c, bool tolerate_math,
                                 const std::function<void(int, const PhasePoint&, PointOut&)>& job) {
  const auto& pts = require_points(c);
  return parallel_map<PointOut>(static_cast<int>(pts.size()), c.threads, [&](int k) {
    PointOut o;
    o.block = point_json(k, pts[k]);
    try {
      job(k, pts[k], o);
    } catch (const MathError& e) {
      if (!tolerate_math) throw;
      o.math_error = true;
      o.block["error"] = error_json(error_kind(e), e.what());
      o.checks.fail("evaluation", error_kind(e) + ": " + e.what());
    }
    return o;
  });
}

// vielbein-lift: upper fundamental tensor from the configured base metric and vielbein
FundamentalTensor vielbein_tensor(const Family& f, const PhasePoint& pt) {
  const int n = f.n;
  if (static_cast<int>(f.base_metric.size()) != n * n || static_cast<int>(f.vielbein.size()) != n * n)
    throw InputError("vielbein-lift needs n*n base_metric and vielbein entries");
  std::vector<std::vector<Expr>> gb(n, std::vector<Expr>(n)), e(n, std::vector<Expr>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      gb[i][j] = parse(f.base_metric[i * n + j], n, Bundle::Cotangent);
      e[i][j] = parse(f.vielbein[i * n + j], n, Bundle::Cotangent);
    }
  return vielbein_lift(gb, e, pt, 2);
}

CheckSuite vielbein_checks(const Family& f, const PhasePoint& pt) {
  CheckSuite s;
  Eigen::MatrixXd up = vielbein_tensor(f, pt).hessian.values();
  s.add("lift_symmetric", (up - up.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  s.add("lift_positive", up.llt().info() == Eigen::Success ? 0.0 : 1.0, 0.0);
  return s;
}

// Inspect -------------------------------------------------------------------

void inspect_cotangent(const JobConfig& c, const Expr& H, const PhasePoint& pt, PointOut& o) {
  const int K = c.geometry_jet_order();
  GeometryAtPoint g = evaluate_geometry(H, pt, K);
  ojson& b = o.block;
  b["H"] = g.H.value();
  b["fundamental_tensor"] = {{"upper", mat_json(g.g.hessian.values())}, {"lower", mat_json(g.g.inverse.values())}};
  b["N"] = mat_json(g.N.coeffs.values());
  b["frames"] = {{"n_adapted", {{"E", mat_json(g.n_frame.frame_matrix())}, {"C", mat_json(g.n_frame.coframe_matrix())}}},
                 {"phi", {{"E", mat_json(g.phi_frame.frame_matrix())}, {"C", mat_json(g.phi_frame.coframe_matrix())}}}};
  ojson can = ct_json(g.canonical_ct);
  can["L"] = tensor_json(values(g.canonical.hL));
  can["C"] = tensor_json(values(g.canonical.vC));
  b["canonical"] = can;
  ojson phi = ct_json(g.phi_ct);
  phi["gamma"] = tensor_json(values(g.phi.full.gamma));
  b["phi"] = phi;
  const AlmostStructures& a = g.structures;
  b["structures"] = {{"J", mat_json(a.J)},
                     {"P", mat_json(a.P)},
                     {"J_tangent", mat_json(a.Jtangent)},
                     {"theta", mat_json(a.theta)},
                     {"metric", mat_json(a.metric)},
                     {"nijenhuis", tensor_json(a.nijenhuis)}};
  b["ricci"] = {{"matrix", mat_json(g.ricci.ricci)},
                {"scalar", g.ricci.scalar},
                {"symmetric_norm", g.ricci.symmetric_norm},
                {"antisymmetric_norm", g.ricci.antisymmetric_norm}};
  b["einstein_residual"] = mat_json(einstein_residual(g.phi, g.g, c.lambda));
  o.checks.append(geometry_checks(H, pt, K));
  if (auto fam = c.builtin(); fam && fam->name == "vielbein-lift") {
    b["vielbein_lift"] = mat_json(vielbein_tensor(*fam, pt).hessian.values());
    o.checks.append(vielbein_checks(*fam, pt), "vielbein.");
  }
}

struct TangentGeometry {
  FundamentalTensor g;
  std::vector<RJet> G;
  NConnection N;
  AdaptedFrame frame;
};

TangentGeometry tangent_geometry(const Expr& L, const PhasePoint& pt, int K) {
  TangentGeometry t;
  RJet Lj = eval_jet(L, pt, K);
  t.g = fundamental_tensor(Lj, pt.n(), Bundle::Tangent);
  t.G = semi_spray(Lj, t.g, pt.fiber);
  t.N = nconnection_tangent(t.G, pt.n());
  t.frame = adapted_frames(t.N, t.g, FrameVariant::NAdaptedTangent);
  return t;
}

CheckSuite tangent_checks(const TangentGeometry& t) {
  CheckSuite s;
  const int d = t.frame.field.dim();
  const int n = d / 2;
  s.add("frame_coframe", (t.frame.frame_matrix() * t.frame.coframe_matrix() - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff(),
        1e-12);
  s.add("anholonomy", anholonomy_residual(t.frame.field, nadapted_anholonomy(t.N)), 1e-8);
  s.add("fundamental_inverse",
        (t.g.hessian.values() * t.g.inverse.values() - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
  return s;
}

void inspect_tangent(const JobConfig& c, const Expr& L, const PhasePoint& pt, PointOut& o) {
  TangentGeometry t = tangent_geometry(L, pt, c.geometry_jet_order());
  ojson& b = o.block;
  b["L"] = evaluate(L, [&] {
    Eigen::VectorXd u = pt.coords();
    return std::vector<double>(u.data(), u.data() + u.size());
  }());
  b["fundamental_tensor"] = {{"lower", mat_json(t.g.hessian.values())}, {"upper", mat_json(t.g.inverse.values())}};
  std::vector<double> G;
  for (const auto& gi : t.G) G.push_back(gi.value());
  b["semi_spray"] = G;
  b["N"] = mat_json(t.N.coeffs.values());
  b["frames"] = {{"n_adapted", {{"E", mat_json(t.frame.frame_matrix())}, {"C", mat_json(t.frame.coframe_matrix())}}}};
  o.checks.append(tangent_checks(t));
}

// Flow ----------------------------------------------------------------------

std::string trajectory_csv(const Trajectory& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

// Closed forms of the oscillator and the free particle, fiber = momentum = velocity.
std::optional<double> closed_form_deviation(const JobConfig& c, const Trajectory& t) {
  if (c.family != "oscillator" && c.family != "flat") return std::nullopt;
  const double w = c.family == "flat" ? 0.0 : (c.params.count("omega") ? c.params.at("omega") : 1.0);
  const PhasePoint& s0 = t.states.front();
  double worst = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double tt = t.times[k];
    for (int i = 0; i < s0.n(); ++i) {
      const double x0 = s0.base[i], f0 = s0.fiber[i];
      double x, f;
      if (w == 0.0) {
        x = x0 + f0 * tt;
        f = f0;
      } else {
        x = x0 * std::cos(w * tt) + f0 / w * std::sin(w * tt);
        f = f0 * std::cos(w * tt) - w * x0 * std::sin(w * tt);
      }
      worst = std::max({worst, std::abs(t.states[k].base[i] - x), std::abs(t.states[k].fiber[i] - f)});
    }
  }
  return worst;
}

ojson trajectory_summary(const Trajectory& t) {
  ojson j;
  j["steps"] = t.size() - 1;
  j["final"] = {{"t", t.times.back()},
                {"x", vec_json(t.states.back().base)},
                {std::string(1, fiber_letter(t.bundle)), vec_json(t.states.back().fiber)}};
  j["energy"] = {{"initial", t.energy.front()}, {"final", t.energy.back()}};
  j["energy_drift_per_time"] = energy_drift_rate(t);
  return j;
}

void flow_point(const JobConfig& c, const Expr& gen, const std::optional<Expr>& dual, const PhasePoint& pt, PointOut& o,
                bool want_csv) {
  if (c.bundle == Bundle::Cotangent) {
    Trajectory th = hamilton_flow(gen, pt, c.t_end, c.dt);
    o.block["hamilton"] = trajectory_summary(th);
    o.checks.add("energy_drift_per_time", energy_drift_rate(th), 1e-8);
    o.checks.add("poisson_evolution_H", poisson_flow_check(gen, gen, th), 1e-8);
    if (auto cf = closed_form_deviation(c, th)) o.checks.add("closed_form", *cf, 1e-8);
    if (dual) {
      PhasePoint start(pt.base, legendre_to_lagrangian(gen, pt).fiber, Bundle::Tangent);
      Trajectory tl = lagrange_flow(*dual, start, c.t_end, c.dt);
      o.block["lagrange"] = trajectory_summary(tl);
      const double dist = flow_distance(*dual, tl, th);
      o.block["flow_distance"] = dist;
      o.checks.add("flow_equivalence", dist, 1e-5);
      o.checks.add("lagrange_energy_drift_per_time", energy_drift_rate(tl), 1e-8);
    }
    if (want_csv) o.csv = trajectory_csv(th);
  } else {
    Trajectory tl = lagrange_flow(gen, pt, c.t_end, c.dt);
    o.block["lagrange"] = trajectory_summary(tl);
    o.checks.add("energy_drift_per_time", energy_drift_rate(tl), 1e-8);
    if (auto cf = closed_form_deviation(c, tl)) o.checks.add("closed_form", *cf, 1e-8);
    if (dual) {
      PhasePoint start(pt.base, legendre_to_hamiltonian(gen, pt).fiber, Bundle::Cotangent);
      Trajectory th = hamilton_flow(*dual, start, c.t_end, c.dt);
      o.block["hamilton"] = trajectory_summary(th);
      const double dist = flow_distance(gen, tl, th);
      o.block["flow_distance"] = dist;
      o.checks.add("flow_equivalence", dist, 1e-5);
      o.checks.add("hamilton_energy_drift_per_time", energy_drift_rate(th), 1e-8);
    }
    if (want_csv) o.csv = trajectory_csv(tl);
  }
}

// Star ----------------------------------------------------------------------

struct StarOperands {
  Expr f, g;
  std::optional<Expr> h;
  std::string f_text, g_text, h_text;
};

StarOperands star_operands(const JobConfig& c, bool defaults) {
  StarOperands s;
  s.f_text = c.star_f;
  s.g_text = c.star_g;
  s.h_text = c.star_h;
  if (s.f_text.empty() || s.g_text.empty()) {
    if (!defaults) throw InputError("star needs \"star\": {\"f\": ..., \"g\": ...} in the config");
    s.f_text = "x1*p1 + p1";
    s.g_text = "p1^2 + x1";
    if (s.h_text.empty()) s.h_text = "x1^2 + x1*p1";
  }
  s.f = parse(s.f_text, c.n, Bundle::Cotangent);
  s.g = parse(s.g_text, c.n, Bundle::Cotangent);
  if (!s.h_text.empty()) s.h = parse(s.h_text, c.n, Bundle::Cotangent);
  return s;
}

void require_quantize(const JobConfig& c) {
  if (c.bundle != Bundle::Cotangent) throw InputError("quantization runs on the cotangent bundle");
}

int effective_vmax(const JobConfig& c) { return std::min(c.vmax, (c.dmax - 1) / 2); }

ojson chern_weyl_json(const ChernWeyl& cw) {
  ojson j;
  j["gamma"] = mat_json(cw.gamma);
  j["kappa"] = mat_json(cw.kappa);
  j["c0"] = mat_json(cw.c0);
  j["dgamma"] = cw.dgamma;
  j["dkappa"] = cw.dkappa;
  return j;
}

void star_point(const JobConfig& c, const Expr& H, const StarOperands& ops, const PhasePoint& pt, PointOut& o) {
  FedosovState st(H, pt, c.dmax, c.quantize_jet_order());
  const int vmax = effective_vmax(c);
  o.block["jet_order"] = st.jet_order();
  o.block["vmax_effective"] = vmax;
  const CJet F = st.jet_of(ops.f), G = st.jet_of(ops.g);
  std::vector<CJet> fg = st.star_series({F}, {G}, vmax), gf = st.star_series({G}, {F}, vmax);
  ojson table = ojson::array(), swapped = ojson::array();
  for (int r = 0; r <= vmax; ++r) {
    table.push_back(cnum(fg[r].value()));
    swapped.push_back(cnum(gf[r].value()));
  }
  o.block["C_fg"] = table;
  o.block["C_gf"] = swapped;
  o.block["poisson_bracket"] = poisson_bracket(ops.f, ops.g, pt, 1).value();
  o.block["chern_weyl"] = chern_weyl_json(st.chern_weyl());
  o.checks.append(star_checks(st, ops.f, ops.g, ops.h ? &*ops.h : nullptr, vmax));
  o.checks.append(chern_weyl_checks(st));
}

// Check ---------------------------------------------------------------------

void check_point(const JobConfig& c, const Expr& gen, const std::optional<Expr>& dual, const StarOperands* ops,
                 const PhasePoint& pt, PointOut& o) {
  const std::optional<Family> fam = c.builtin();
  auto run = [&](const std::string& prefix, const std::function<CheckSuite()>& f) {
    try {
      o.checks.append(f(), prefix);
    } catch (const MathError& e) {
      o.math_error = true;
      o.checks.fail(prefix + "evaluation", error_kind(e) + ": " + e.what());
    }
  };
  run("jet.", [&] { return jet_fd_checks(gen, pt); });
  if (c.bundle == Bundle::Tangent) {
    run("geometry.", [&] { return tangent_checks(tangent_geometry(gen, pt, c.geometry_jet_order())); });
    run("mechanics.", [&] {
      CheckSuite s;
      Trajectory tl = lagrange_flow(gen, pt, c.t_end, c.dt);
      s.add("energy_drift_per_time", energy_drift_rate(tl), 1e-8);
      if (auto cf = closed_form_deviation(c, tl)) s.add("closed_form", *cf, 1e-8);
      if (dual) s.append(mechanics_checks(*dual, gen, pt, c.t_end, c.dt));
      return s;
    });
    return;
  }
  run("geometry.", [&] { return geometry_checks(gen, pt, c.geometry_jet_order()); });
  if (fam && fam->name == "flat") run("flat.", [&] { return flat_checks(gen, pt, c.dmax); });
  if (fam && fam->name == "vielbein-lift")
    run("vielbein.", [&] { return vielbein_checks(*fam, pt); });
  run("mechanics.", [&] {
    CheckSuite s = hamilton_checks(gen, pt, c.t_end, c.dt);
    if (c.family == "oscillator" || c.family == "flat")
      s.add("closed_form", *closed_form_deviation(c, hamilton_flow(gen, pt, c.t_end, c.dt)), 1e-8);
    if (dual) {
      PhasePoint start(pt.base, legendre_to_lagrangian(gen, pt).fiber, Bundle::Tangent);
      s.append(mechanics_checks(gen, *dual, start, c.t_end, c.dt), "dual.");
    }
    return s;
  });
  run("fedosov.", [&] {
    FedosovState st(gen, pt, c.dmax, c.quantize_jet_order());
    CheckSuite s;
    s.append(commutator_checks(st));
    s.append(recursion_checks(st));
    s.append(star_checks(st, ops->f, ops->g, ops->h ? &*ops->h : nullptr, effective_vmax(c)));
    s.append(chern_weyl_checks(st));
    return s;
  });
}

}  // namespace

std::string checks_csv(const CheckSuite& s) {
  std::ostringstream os;
  os.precision(17);
  os << "name,residual,tolerance,pass\n";
  for (const auto& r : s.results()) os << r.name << ',' << r.residual << ',' << r.tolerance << ',' << (r.pass ? 1 : 0) << '\n';
  return os.str();
}

CommandResult cmd_inspect(const JobConfig& c) {
  const Expr gen = c.generator();
  std::vector<PointOut> outs = run_points(c, false, [&](int, const PhasePoint& pt, PointOut& o) {
    if (c.bundle == Bundle::Cotangent)
      inspect_cotangent(c, gen, pt, o);
    else
      inspect_tangent(c, gen, pt, o);
  });
  return assemble("inspect", c, outs, {});
}

CommandResult cmd_flow(const JobConfig& c, bool csv) {
  const Expr gen = c.generator();
  const std::optional<Expr> dual = c.dual_generator();
  std::vector<PointOut> outs =
      run_points(c, false, [&](int, const PhasePoint& pt, PointOut& o) { flow_point(c, gen, dual, pt, o, csv); });
  CommandResult r = assemble("flow", c, outs, {});
  if (csv) {
    r.csv.clear();
    for (std::size_t k = 0; k < outs.size(); ++k) {
      if (outs.size() > 1) r.csv += "# point " + std::to_string(k) + "\n";
      r.csv += outs[k].csv;
    }
  }
  return r;
}

CommandResult cmd_star(const JobConfig& c) {
  require_quantize(c);
  c.quantize_jet_order();
  const Expr H = c.generator();
  const StarOperands ops = star_operands(c, false);
  std::vector<PointOut> outs =
      run_points(c, false, [&](int, const PhasePoint& pt, PointOut& o) { star_point(c, H, ops, pt, o); });
  CommandResult r = assemble("star", c, outs, {});
  r.report["star"] = {{"f", ops.f_text}, {"g", ops.g_text}};
  if (ops.h) r.report["star"]["h"] = ops.h_text;
  return r;
}

CommandResult cmd_check(const JobConfig& c) {
  const Expr gen = c.generator();
  const std::optional<Expr> dual = c.dual_generator();
  std::optional<StarOperands> ops;
  CheckSuite global;
  if (c.bundle == Bundle::Cotangent) {
    c.quantize_jet_order();
    ops = star_operands(c, true);
    // Lambda is the same constant matrix at every point; its signature comes from the first point.
    try {
      FedosovFrame fr = fedosov_frame(fundamental_tensor_hamilton(gen, require_points(c).front()),
                                      nconnection_cotangent(gen, require_points(c).front()));
      global.append(wick_operator_checks(fr.lambda, 6), "wick.");
    } catch (const MathError& e) {
      global.fail("wick.evaluation", e.what());
    }
  }
  std::vector<PointOut> outs = run_points(c, true, [&](int, const PhasePoint& pt, PointOut& o) {
    check_point(c, gen, dual, ops ? &*ops : nullptr, pt, o);
  });
  CommandResult r = assemble("check", c, outs, global);
  if (!global.errors().empty() && r.exit_code != kExitMath) r.exit_code = kExitMath;
  return r;
}

CommandResult cmd_report(const JobConfig& c) {
  CommandResult chk = cmd_check(c);
  CommandResult ins = cmd_inspect(c);
  CommandResult flw = cmd_flow(c, false);
  ojson doc = report_head("report", c);
  doc["inspect"] = ins.report["points"];
  doc["flow"] = flw.report["points"];
  if (c.bundle == Bundle::Cotangent && !c.star_f.empty() && !c.star_g.empty()) {
    CommandResult st = cmd_star(c);
    doc["star"] = st.report["points"];
  }
  doc["checks"] = chk.report["checks"];
  doc["summary"] = chk.report["summary"];
  chk.report = doc;
  return chk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hamilton geometry and Fedosov quantization at sample points", "hfq"};
  std::string config_path, point, out_path, format = "json";
  int dmax = -1, vmax = -1;
  bool timing = false;
  app.require_subcommand(1, 1);
  for (const char* name : {"inspect", "flow", "star", "check", "report"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON job configuration")->required();
    sub->add_option("--point", point, "single point, e.g. x=0.1,0.2,p=0.3,-0.4");
    sub->add_option("--dmax", dmax, "total-degree truncation of the Fedosov recursion");
    sub->add_option("--vmax", vmax, "highest v-order of the star product");
    sub->add_option("--out", out_path, "output file (default stdout)");
    sub->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_flag("--timing", timing, "append wall-clock timing to the report");
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  CommandResult res;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    JobConfig c = load_config(config_path);
    if (dmax >= 0) c.dmax = dmax;
    if (vmax >= 0) c.vmax = vmax;
    if (!point.empty()) c.points = {parse_point(point, c.n, c.bundle)};
    if (out_path.empty()) out_path = c.output;
    if (cmd == "inspect")
      res = cmd_inspect(c);
    else if (cmd == "flow")
      res = cmd_flow(c, format == "csv");
    else if (cmd == "star")
      res = cmd_star(c);
    else if (cmd == "check")
      res = cmd_check(c);
    else
      res = cmd_report(c);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const MathError& e) {
    err << "error: " << error_kind(e) << ": " << e.what() << "\n";
    return kExitMath;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitMath;
  }
  if (timing) {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.report["timing"] = {{"wall_seconds", secs}};
  }

  const std::string text = format == "csv" ? res.csv : res.report.dump(2) + "\n";
  if (out_path.empty()) {
    out << text;
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
      err << "error: cannot write '" << out_path << "'\n";
      return kExitConfig;
    }
    f << text;
  }
  if (res.exit_code == kExitCheckFailed) err << "some checks failed\n";
  return res.exit_code;
}

}  // namespace hfq::cli
