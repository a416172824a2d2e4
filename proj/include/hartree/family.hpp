#pragma once

#include "hartree/field.hpp"
#include "hartree/groundstate.hpp"

#include <json.hpp>

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace hartree {

struct FamilyTableOptions {
    double speed_step = 0.05;      // node spacing in v3
    double frequency_step = 0.025; // node spacing in mu
    double max_speed = 0.6;
    double mu_min = 0.3;
    double mu_max = 0.8;
    // Lagrange points per axis: 2 (linear) or 4 (cubic).
    int stencil = 4;
    // Transverse velocity components are handled to first order only.
    double transverse_limit = 0.05;
    GroundStateOptions solver;
    // Nodes are read from and written to this directory when non-empty.
    std::string cache_dir;
};

// Solved state at v = s e3, mu on the lattice, with its velocity and
// frequency tangents (d_v1, d_v2, d_v3, d_mu).
struct FamilyNode {
    int speed_index = 0;
    int frequency_index = 0;
    double s = 0.0;
    double mu = 0.0;
    Field phi;
    std::array<Field, 4> tangent;
    FamilyScalars scalars;
    double det_omega = 0.0;
    double relative_residual = 0.0;
    double seconds = 0.0;
    bool from_cache = false;

    explicit FamilyNode(const Grid& g)
        : phi(g), tangent{Field(g), Field(g), Field(g), Field(g)} {}
};

// Interpolated profile at (v, mu). tangent holds (d_v1, d_v2, d_v3, d_mu).
// When derivatives were requested, d_speed and d_frequency hold the
// derivatives of the four tangents along v3 and mu.
struct FamilySample {
    Vec3 v{0.0, 0.0, 0.0};
    double mu = 0.0;
    Field phi;
    std::array<Field, 4> tangent;
    bool has_derivatives = false;
    std::array<Field, 4> d_speed;
    std::array<Field, 4> d_frequency;

    explicit FamilySample(const Grid& g)
        : phi(g), tangent{Field(g), Field(g), Field(g), Field(g)},
          d_speed{Field(g), Field(g), Field(g), Field(g)}, d_frequency{Field(g), Field(g), Field(g), Field(g)} {}
};

// Lazily solved lattice of boosted ground states with v along e3. Negative
// speeds come from phi_{-v} = conj(phi_v). Thread safe.
class FamilyTable {
public:
    FamilyTable(const Grid& g, double m, FamilyTableOptions opts = {});

    const Grid& grid() const { return grid_; }
    double mass_parameter() const { return m_; }
    const FamilyTableOptions& options() const { return opts_; }

    // Throws DomainExit (time NaN) outside the configured range.
    void require_inside(const Vec3& v, double mu) const;
    bool inside(const Vec3& v, double mu) const;

    std::shared_ptr<const FamilyNode> node(int speed_index, int frequency_index);
    FamilySample sample(const Vec3& v, double mu, bool derivatives = false);
    // Scalars at (v, mu) from the e3 family by rotation invariance.
    FamilyScalars scalars(const Vec3& v, double mu);

    // Solves every node of the stencils touching the box
    // [-s_max, s_max] x [mu_lo, mu_hi].
    void precompute(double s_max, double mu_lo, double mu_hi);

    // Largest relative change of det Omega between adjacent solved nodes.
    // det grows like tau^4 n_mu^2 in mu, so the mu direction is also
    // checked through its second difference, which flags isolated bad nodes.
    struct DetContinuity {
        double along_speed = 0.0;
        double along_frequency = 0.0;
        double frequency_curvature = 0.0;
    };
    DetContinuity det_continuity() const;
    std::vector<nlohmann::json> records() const;
    std::size_t solved_nodes() const;

private:
    struct Stencil {
        std::vector<int> index;
        std::vector<double> weight;
        std::vector<double> slope;  // derivative of the weight
    };
    Stencil stencil(double x, double step) const;
    std::shared_ptr<const FamilyNode> solve_node(int i, int j);
    std::shared_ptr<FamilyNode> load_node(int i, int j) const;
    void store_node(const FamilyNode& nd) const;
    std::string node_path(int i, int j, const std::string& what) const;

    Grid grid_;
    double m_;
    FamilyTableOptions opts_;
    mutable std::mutex mutex_;
    std::map<std::pair<int, int>, std::shared_ptr<FamilyNode>> nodes_;
};

// Reflection of a node to negative speed.
std::shared_ptr<const FamilyNode> mirror_node(const FamilyNode& nd);

nlohmann::json to_json(const FamilyNode& nd);

} // namespace hartree
