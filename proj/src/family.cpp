#include "hartree/family.hpp"

#include "hartree/errors.hpp"
#include "hartree/functionals.hpp"
#include "hartree/io.hpp"
#include "hartree/prhf.hpp"
#include "hartree/symplectic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

namespace hartree {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Lattice coordinate x / step, snapped to an integer when within round-off.
double lattice_coordinate(double x, double step) {
    const double t = x / step;
    const double r = std::round(t);
    return std::abs(t - r) < 1e-9 ? r : t;
}

Field conj_field(const Field& u, double sign) {
    Field r(u.grid());
    for (std::size_t i = 0; i < u.size(); ++i) r[i] = sign * std::conj(u[i]);
    return r;
}

nlohmann::json scalars_json(const FamilyScalars& s) {
    nlohmann::json j;
    j["n"] = s.n;
    j["n_mu"] = s.n_mu;
    j["n_v"] = {s.n_v(0), s.n_v(1), s.n_v(2)};
    std::vector<double> tau, tau_h, gamma;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            tau.push_back(s.tau(a, b));
            tau_h.push_back(s.tau_hessian(a, b));
            gamma.push_back(s.gamma(a, b));
        }
    j["tau"] = tau;
    j["tau_hessian"] = tau_h;
    j["gamma"] = gamma;
    return j;
}

FamilyScalars scalars_from_json(const nlohmann::json& j) {
    FamilyScalars s;
    s.n = j.at("n").get<double>();
    s.n_mu = j.at("n_mu").get<double>();
    for (int a = 0; a < 3; ++a) s.n_v(a) = j.at("n_v").at(a).get<double>();
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            s.tau(a, b) = j.at("tau").at(3 * a + b).get<double>();
            s.tau_hessian(a, b) = j.at("tau_hessian").at(3 * a + b).get<double>();
            s.gamma(a, b) = j.at("gamma").at(3 * a + b).get<double>();
        }
    return s;
}

double det_from_scalars(const FamilyScalars& s) {
    return omega_from_scalars(s.tau, s.n_v, s.n_mu).determinant();
}

} // namespace

std::shared_ptr<const FamilyNode> mirror_node(const FamilyNode& nd) {
    auto r = std::make_shared<FamilyNode>(nd.phi.grid());
    r->speed_index = -nd.speed_index;
    r->frequency_index = nd.frequency_index;
    r->s = -nd.s;
    r->mu = nd.mu;
    r->phi = conj_field(nd.phi, 1.0);
    for (int k = 0; k < 3; ++k) r->tangent[k] = conj_field(nd.tangent[k], -1.0);
    r->tangent[3] = conj_field(nd.tangent[3], 1.0);
    r->scalars = nd.scalars;
    r->scalars.n_v = -nd.scalars.n_v;
    r->det_omega = nd.det_omega;
    r->relative_residual = nd.relative_residual;
    r->from_cache = nd.from_cache;
    return r;
}

nlohmann::json to_json(const FamilyNode& nd) {
    nlohmann::json j;
    j["speed_index"] = nd.speed_index;
    j["frequency_index"] = nd.frequency_index;
    j["v"] = {0.0, 0.0, nd.s};
    j["mu"] = nd.mu;
    j["scalars"] = scalars_json(nd.scalars);
    j["det_omega"] = nd.det_omega;
    j["relative_residual"] = nd.relative_residual;
    j["seconds"] = nd.seconds;
    j["from_cache"] = nd.from_cache;
    return j;
}

FamilyTable::FamilyTable(const Grid& g, double m, FamilyTableOptions opts) : grid_(g), m_(m), opts_(std::move(opts)) {
    if (opts_.stencil != 2 && opts_.stencil != 4) throw ConfigError("family table: stencil must be 2 or 4");
    if (!(opts_.speed_step > 0.0) || !(opts_.frequency_step > 0.0))
        throw ConfigError("family table: node spacings must be positive");
    if (opts_.max_speed > 0.6) throw ConfigError("family table: max_speed above 0.6");
    if (!(opts_.mu_max > opts_.mu_min)) throw ConfigError("family table: empty frequency interval");
    if (!opts_.cache_dir.empty()) std::filesystem::create_directories(opts_.cache_dir);
}

bool FamilyTable::inside(const Vec3& v, double mu) const {
    const double vt = std::hypot(v[0], v[1]);
    return vt <= opts_.transverse_limit && speed(v) <= opts_.max_speed && mu >= opts_.mu_min && mu <= opts_.mu_max &&
           std::isfinite(mu);
}

void FamilyTable::require_inside(const Vec3& v, double mu) const {
    if (inside(v, mu)) return;
    std::ostringstream ss;
    ss << "family table: (v=(" << v[0] << ", " << v[1] << ", " << v[2] << "), mu=" << mu
       << ") outside |v| <= " << opts_.max_speed << ", |v_perp| <= " << opts_.transverse_limit << ", mu in ["
       << opts_.mu_min << ", " << opts_.mu_max << "]";
    throw DomainExit(ss.str(), kNaN);
}

FamilyTable::Stencil FamilyTable::stencil(double x, double step) const {
    const double t = lattice_coordinate(x, step);
    Stencil st;
    if (opts_.stencil == 2) {
        const double i0 = std::floor(t);
        const double u = t - i0;
        st.index = {static_cast<int>(i0), static_cast<int>(i0) + 1};
        st.weight = {1.0 - u, u};
        st.slope = {-1.0 / step, 1.0 / step};
        return st;
    }
    const double i0 = std::floor(t);
    const double u = t - i0;
    const double p[4] = {-1.0, 0.0, 1.0, 2.0};
    for (int a = 0; a < 4; ++a) {
        double w = 1.0, den = 1.0, dw = 0.0;
        for (int b = 0; b < 4; ++b) {
            if (b == a) continue;
            w *= u - p[b];
            den *= p[a] - p[b];
            double term = 1.0;
            for (int c = 0; c < 4; ++c)
                if (c != a && c != b) term *= u - p[c];
            dw += term;
        }
        st.index.push_back(static_cast<int>(i0) + a - 1);
        st.weight.push_back(w / den);
        st.slope.push_back(dw / den / step);
    }
    return st;
}

std::string FamilyTable::node_path(int i, int j, const std::string& what) const {
    std::ostringstream ss;
    ss << opts_.cache_dir << "/node_s" << i << "_mu" << j << "_" << what;
    return ss.str();
}

std::shared_ptr<FamilyNode> FamilyTable::load_node(int i, int j) const {
    if (opts_.cache_dir.empty()) return nullptr;
    const std::string meta_path = node_path(i, j, "meta.json");
    if (!std::filesystem::exists(meta_path)) return nullptr;
    try {
        const auto meta = nlohmann::json::parse(read_file(meta_path));
        if (meta.at("n").get<int>() != grid_.n() || std::abs(meta.at("L").get<double>() - grid_.length()) > 1e-12 ||
            std::abs(meta.at("m").get<double>() - m_) > 1e-12 ||
            std::abs(meta.at("node").at("mu").get<double>() - j * opts_.frequency_step) > 1e-12 ||
            std::abs(meta.at("node").at("v").at(2).get<double>() - i * opts_.speed_step) > 1e-12)
            return nullptr;
        auto nd = std::make_shared<FamilyNode>(grid_);
        nd->speed_index = i;
        nd->frequency_index = j;
        nd->s = i * opts_.speed_step;
        nd->mu = j * opts_.frequency_step;
        nd->phi = read_prhf(node_path(i, j, "phi.prhf")).field;
        for (int k = 0; k < 4; ++k) nd->tangent[k] = read_prhf(node_path(i, j, "t" + std::to_string(k) + ".prhf")).field;
        if (!(nd->phi.grid() == grid_)) return nullptr;
        nd->scalars = scalars_from_json(meta.at("node").at("scalars"));
        nd->det_omega = meta.at("node").at("det_omega").get<double>();
        nd->relative_residual = meta.at("node").at("relative_residual").get<double>();
        nd->seconds = meta.at("node").at("seconds").get<double>();
        nd->from_cache = true;
        return nd;
    } catch (const std::exception&) {
        return nullptr;
    }
}

void FamilyTable::store_node(const FamilyNode& nd) const {
    if (opts_.cache_dir.empty()) return;
    const int i = nd.speed_index, j = nd.frequency_index;
    write_prhf(node_path(i, j, "phi.prhf"), nd.phi, m_);
    for (int k = 0; k < 4; ++k) write_prhf(node_path(i, j, "t" + std::to_string(k) + ".prhf"), nd.tangent[k], m_);
    nlohmann::json meta;
    meta["n"] = grid_.n();
    meta["L"] = grid_.length();
    meta["m"] = m_;
    meta["node"] = to_json(nd);
    write_file_atomic(node_path(i, j, "meta.json"), meta.dump(1));
}

std::shared_ptr<const FamilyNode> FamilyTable::solve_node(int i, int j) {
    if (auto nd = load_node(i, j)) {
        nodes_[{i, j}] = nd;
        return nd;
    }
    const double s = i * opts_.speed_step;
    const double mu = j * opts_.frequency_step;
    const Vec3 v{0.0, 0.0, s};
    try {
        require_frequency_window(v, mu, m_, opts_.solver.mu_margin * m_);
    } catch (const ParameterDomain& e) {
        throw DomainExit(std::string("family table node: ") + e.what(), kNaN);
    }
    const auto t0 = std::chrono::steady_clock::now();
    // Warm start from the closest solved node within one continuation step.
    std::shared_ptr<GroundState> warm;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [key, nd] : nodes_) {
        if (key.first < 0) continue;
        const double dv = std::abs(key.first - i) * opts_.speed_step;
        const double dm = std::abs(key.second - j) * opts_.frequency_step;
        if (dv > opts_.solver.continuation_step + 1e-12) continue;
        if (dv + dm < best) {
            best = dv + dm;
            warm = std::make_shared<GroundState>(nd->phi);
            warm->v = {0.0, 0.0, nd->s};
            warm->mu = nd->mu;
            warm->m = m_;
            warm->seed = "family node";
        }
    }
    GroundState gs = solve_boosted(v, mu, m_, grid_, opts_.solver, warm.get());
    const TangentFrame frame = tangent_frame(gs);
    auto nd = std::make_shared<FamilyNode>(grid_);
    nd->speed_index = i;
    nd->frequency_index = j;
    nd->s = s;
    nd->mu = mu;
    nd->phi = gs.field;
    nd->tangent = {frame.z[3], frame.z[4], frame.z[5], frame.z[7]};
    nd->scalars = family_scalars(gs, frame, false);
    nd->det_omega = det_from_scalars(nd->scalars);
    nd->relative_residual = gs.relative_residual;
    nd->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    store_node(*nd);
    nodes_[{i, j}] = nd;
    return nd;
}

std::shared_ptr<const FamilyNode> FamilyTable::node(int i, int j) {
    std::lock_guard<std::mutex> lock(mutex_);
    const int ia = std::abs(i);
    auto it = nodes_.find({ia, j});
    std::shared_ptr<const FamilyNode> base = it != nodes_.end() ? it->second : solve_node(ia, j);
    if (i >= 0) return base;
    auto mit = nodes_.find({i, j});
    if (mit != nodes_.end()) return mit->second;
    auto mirrored = std::const_pointer_cast<FamilyNode>(mirror_node(*base));
    nodes_[{i, j}] = mirrored;
    return mirrored;
}

FamilySample FamilyTable::sample(const Vec3& v, double mu, bool derivatives) {
    require_inside(v, mu);
    const Stencil ss = stencil(v[2], opts_.speed_step);
    const Stencil sm = stencil(mu, opts_.frequency_step);
    FamilySample out(grid_);
    out.v = v;
    out.mu = mu;
    out.has_derivatives = derivatives;
    for (std::size_t a = 0; a < ss.index.size(); ++a)
        for (std::size_t b = 0; b < sm.index.size(); ++b) {
            const double w = ss.weight[a] * sm.weight[b];
            const double ws = ss.slope[a] * sm.weight[b];
            const double wm = ss.weight[a] * sm.slope[b];
            if (w == 0.0 && (!derivatives || (ws == 0.0 && wm == 0.0))) continue;
            const auto nd = node(ss.index[a], sm.index[b]);
            if (w != 0.0) {
                out.phi.axpy(w, nd->phi);
                if (v[0] != 0.0) out.phi.axpy(w * v[0], nd->tangent[0]);
                if (v[1] != 0.0) out.phi.axpy(w * v[1], nd->tangent[1]);
                for (int k = 0; k < 4; ++k) out.tangent[k].axpy(w, nd->tangent[k]);
            }
            if (derivatives)
                for (int k = 0; k < 4; ++k) {
                    if (ws != 0.0) out.d_speed[k].axpy(ws, nd->tangent[k]);
                    if (wm != 0.0) out.d_frequency[k].axpy(wm, nd->tangent[k]);
                }
        }
    return out;
}

FamilyScalars FamilyTable::scalars(const Vec3& v, double mu) {
    require_inside(v, mu);
    const double s = speed(v);
    const Stencil ss = stencil(s, opts_.speed_step);
    const Stencil sm = stencil(mu, opts_.frequency_step);
    double n = 0.0, n_mu = 0.0, n_v = 0.0, t_perp = 0.0, t_par = 0.0, h_perp = 0.0, h_par = 0.0;
    for (std::size_t a = 0; a < ss.index.size(); ++a)
        for (std::size_t b = 0; b < sm.index.size(); ++b) {
            const double w = ss.weight[a] * sm.weight[b];
            if (w == 0.0) continue;
            const FamilyScalars& sc = node(ss.index[a], sm.index[b])->scalars;
            n += w * sc.n;
            n_mu += w * sc.n_mu;
            n_v += w * sc.n_v(2);
            t_perp += w * sc.tau(0, 0);
            t_par += w * sc.tau(2, 2);
            h_perp += w * sc.tau_hessian(0, 0);
            h_par += w * sc.tau_hessian(2, 2);
        }
    Eigen::Vector3d dir(0.0, 0.0, 1.0);
    if (s > 0.0) dir = Eigen::Vector3d(v[0], v[1], v[2]) / s;
    const Eigen::Matrix3d along = dir * dir.transpose();
    FamilyScalars out;
    out.n = n;
    out.n_mu = n_mu;
    out.n_v = n_v * dir;
    out.tau = t_perp * Eigen::Matrix3d::Identity() + (t_par - t_perp) * along;
    out.tau_hessian = h_perp * Eigen::Matrix3d::Identity() + (h_par - h_perp) * along;
    out.gamma = (out.tau + out.n_v * out.n_v.transpose() / out.n_mu) / out.n;
    return out;
}

void FamilyTable::precompute(double s_max, double mu_lo, double mu_hi) {
    const int pad = opts_.stencil == 4 ? 2 : 1;
    const int i_hi = static_cast<int>(std::floor(lattice_coordinate(s_max, opts_.speed_step))) + pad;
    const int j_lo = static_cast<int>(std::floor(lattice_coordinate(mu_lo, opts_.frequency_step))) - pad + 1;
    const int j_hi = static_cast<int>(std::floor(lattice_coordinate(mu_hi, opts_.frequency_step))) + pad;
    for (int i = 0; i <= i_hi; ++i)
        for (int j = j_lo; j <= j_hi; ++j) node(i, j);
}

FamilyTable::DetContinuity FamilyTable::det_continuity() const {
    std::lock_guard<std::mutex> lock(mutex_);
    DetContinuity out;
    auto det = [&](int i, int j) -> double {
        auto it = nodes_.find({i, j});
        return it == nodes_.end() ? std::numeric_limits<double>::quiet_NaN() : it->second->det_omega;
    };
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); };
    for (const auto& [key, nd] : nodes_) {
        if (key.first < 0) continue;
        const auto [i, j] = key;
        const double d = nd->det_omega;
        if (const double a = det(i + 1, j); std::isfinite(a)) out.along_speed = std::max(out.along_speed, rel(d, a));
        if (const double a = det(i, j + 1); std::isfinite(a))
            out.along_frequency = std::max(out.along_frequency, rel(d, a));
        const double lo = det(i, j - 1), hi = det(i, j + 1);
        if (std::isfinite(lo) && std::isfinite(hi))
            out.frequency_curvature = std::max(out.frequency_curvature, std::abs(lo - 2.0 * d + hi) / std::abs(d));
    }
    return out;
}

std::vector<nlohmann::json> FamilyTable::records() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<nlohmann::json> out;
    for (const auto& [key, nd] : nodes_)
        if (key.first >= 0) out.push_back(to_json(*nd));
    return out;
}

std::size_t FamilyTable::solved_nodes() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::size_t c = 0;
    for (const auto& kv : nodes_)
        if (kv.first.first >= 0) ++c;
    return c;
}

} // namespace hartree
