#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "ssn/errors.hpp"
#include "ssn/linalg.hpp"

namespace ssn {

enum class Geometry { d1, d2, d3 };

inline const char* geometry_name(Geometry g) {
  switch (g) {
    case Geometry::d1: return "d1";
    case Geometry::d2: return "d2";
    case Geometry::d3: return "d3";
  }
  return "?";
}

struct MeshSizes {
  int nx1 = 0, nx2 = 0, nx3 = 0;
  int p = 0;  // contact nodes
  int n = 0;  // displacement degrees of freedom
};

/// Hexahedron counts and problem sizes for a discretization level:
/// nx1 = ceil(4 2^{lev/2}), nx2 = nx3 = ceil(2 2^{lev/2}).
inline MeshSizes mesh_sizes(int lev) {
  MeshSizes s;
  if (lev % 2 == 0) {
    int h = 1 << (lev / 2);
    s.nx1 = 4 * h;
    s.nx2 = 2 * h;
  } else {
    double f = std::pow(2.0, 0.5 * lev);
    s.nx1 = static_cast<int>(std::ceil(4.0 * f));
    s.nx2 = static_cast<int>(std::ceil(2.0 * f));
  }
  s.nx3 = s.nx2;
  s.p = s.nx1 * (s.nx2 + 1);
  s.n = 3 * s.nx1 * (s.nx2 + 1) * (s.nx3 + 1);
  return s;
}

/// Bottom-surface height over (x1,x2) in [0,2]x[0,1].
inline double geometry_value(Geometry which, double x1, double x2) {
  switch (which) {
    case Geometry::d1:
      return 0.01;
    case Geometry::d2:
      return std::max(
          0.01 - 0.015 * std::sqrt(0.5 * (x1 - 1.0) * (x1 - 1.0) +
                                   2.0 * (x2 - 0.5) * (x2 - 0.5)),
          0.0025);
    case Geometry::d3:
      return 0.01 +
             0.005 * (std::sin(2.0 * M_PI * x1) + std::cos(2.0 * M_PI * x2));
  }
  return 0.0;
}

/// Tensor-product hexahedral mesh of the body Omega(d): the cuboid
/// (0,2)x(0,1)x(0,1) with its bottom surface raised to the gap function d.
/// Nodes are graded linearly per column between d(x1,x2) and 1.
///
/// Dof ordering contract: contact nodes (bottom layer minus the Dirichlet
/// edge) come first, 3 dofs per node in (x1,x2,x3) component order, so normal
/// and tangential extraction operators reduce to slot reads.
struct Mesh {
  Geometry geometry = Geometry::d1;
  int lev = 0;
  int nx1 = 0, nx2 = 0, nx3 = 0;
  Eigen::MatrixXd coords;                  // node -> (x1,x2,x3)
  std::vector<std::array<int, 8>> hexes;   // trilinear element connectivity
  std::vector<int> node_dof;               // node -> first dof, -1 on Dirichlet
  std::vector<int> contact_nodes;          // dof-block order 0..p-1
  int p = 0;
  int n = 0;

  int node_count() const { return static_cast<int>(coords.rows()); }

  int node_id(int i1, int i2, int i3) const {
    return (i1 * (nx2 + 1) + i2) * (nx3 + 1) + i3;
  }

  bool is_dirichlet(int i1) const { return i1 == 0; }

  /// Parametric coordinates (x1, x2, layer fraction) of a node.
  Eigen::Vector3d node_param(int i1, int i2, int i3) const {
    return {2.0 * i1 / nx1, static_cast<double>(i2) / nx2,
            static_cast<double>(i3) / nx3};
  }
};

inline Mesh build_mesh(int lev, Geometry geometry) {
  MeshSizes s = mesh_sizes(lev);
  Mesh m;
  m.geometry = geometry;
  m.lev = lev;
  m.nx1 = s.nx1;
  m.nx2 = s.nx2;
  m.nx3 = s.nx3;
  m.p = s.p;
  m.n = s.n;

  const int nn = (s.nx1 + 1) * (s.nx2 + 1) * (s.nx3 + 1);
  m.coords.resize(nn, 3);
  for (int i1 = 0; i1 <= s.nx1; ++i1)
    for (int i2 = 0; i2 <= s.nx2; ++i2) {
      double x1 = 2.0 * i1 / s.nx1;
      double x2 = static_cast<double>(i2) / s.nx2;
      double bottom = geometry_value(geometry, x1, x2);
      for (int i3 = 0; i3 <= s.nx3; ++i3) {
        double t = static_cast<double>(i3) / s.nx3;
        int id = m.node_id(i1, i2, i3);
        m.coords(id, 0) = x1;
        m.coords(id, 1) = x2;
        m.coords(id, 2) = bottom + (1.0 - bottom) * t;
      }
    }

  m.hexes.reserve(static_cast<size_t>(s.nx1) * s.nx2 * s.nx3);
  for (int e1 = 0; e1 < s.nx1; ++e1)
    for (int e2 = 0; e2 < s.nx2; ++e2)
      for (int e3 = 0; e3 < s.nx3; ++e3)
        m.hexes.push_back({m.node_id(e1, e2, e3), m.node_id(e1 + 1, e2, e3),
                           m.node_id(e1 + 1, e2 + 1, e3),
                           m.node_id(e1, e2 + 1, e3), m.node_id(e1, e2, e3 + 1),
                           m.node_id(e1 + 1, e2, e3 + 1),
                           m.node_id(e1 + 1, e2 + 1, e3 + 1),
                           m.node_id(e1, e2 + 1, e3 + 1)});

  // contact blocks first, then the remaining free nodes
  m.node_dof.assign(nn, -1);
  int dof = 0;
  for (int i1 = 1; i1 <= s.nx1; ++i1)
    for (int i2 = 0; i2 <= s.nx2; ++i2) {
      int id = m.node_id(i1, i2, 0);
      m.contact_nodes.push_back(id);
      m.node_dof[id] = dof;
      dof += 3;
    }
  for (int i1 = 1; i1 <= s.nx1; ++i1)
    for (int i2 = 0; i2 <= s.nx2; ++i2)
      for (int i3 = 1; i3 <= s.nx3; ++i3) {
        m.node_dof[m.node_id(i1, i2, i3)] = dof;
        dof += 3;
      }
  return m;
}

namespace detail {

/// Trilinear shape function derivatives on [-1,1]^3 at (xi,eta,zeta);
/// node order matches the hexahedron connectivity.
inline void hex_shape(double xi, double eta, double zeta,
                      Eigen::Matrix<double, 8, 1>& nval,
                      Eigen::Matrix<double, 8, 3>& nder) {
  static const double sg[8][3] = {{-1, -1, -1}, {1, -1, -1}, {1, 1, -1},
                                  {-1, 1, -1},  {-1, -1, 1}, {1, -1, 1},
                                  {1, 1, 1},    {-1, 1, 1}};
  for (int a = 0; a < 8; ++a) {
    double fx = 1.0 + sg[a][0] * xi;
    double fy = 1.0 + sg[a][1] * eta;
    double fz = 1.0 + sg[a][2] * zeta;
    nval(a) = 0.125 * fx * fy * fz;
    nder(a, 0) = 0.125 * sg[a][0] * fy * fz;
    nder(a, 1) = 0.125 * sg[a][1] * fx * fz;
    nder(a, 2) = 0.125 * sg[a][2] * fx * fy;
  }
}

inline Eigen::Matrix<double, 6, 6> hooke_matrix(double young, double nu) {
  double lambda = young * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  double mu = young / (2.0 * (1.0 + nu));
  Eigen::Matrix<double, 6, 6> d = Eigen::Matrix<double, 6, 6>::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) d(i, j) = lambda;
    d(i, i) += 2.0 * mu;
    d(i + 3, i + 3) = mu;
  }
  return d;
}

}  // namespace detail

/// 24x24 stiffness of one trilinear hexahedron, 2x2x2 Gauss quadrature.
inline Eigen::Matrix<double, 24, 24> element_stiffness(
    const Eigen::Matrix<double, 8, 3>& xe, double young, double nu) {
  const double gp = 1.0 / std::sqrt(3.0);
  Eigen::Matrix<double, 6, 6> d = detail::hooke_matrix(young, nu);
  Eigen::Matrix<double, 24, 24> ke = Eigen::Matrix<double, 24, 24>::Zero();
  Eigen::Matrix<double, 8, 1> nval;
  Eigen::Matrix<double, 8, 3> nder;
  for (int q = 0; q < 8; ++q) {
    double xi = (q & 1) ? gp : -gp;
    double eta = (q & 2) ? gp : -gp;
    double zeta = (q & 4) ? gp : -gp;
    detail::hex_shape(xi, eta, zeta, nval, nder);
    Eigen::Matrix3d jac = nder.transpose() * xe;
    double det = jac.determinant();
    if (det <= 0.0)
      throw DegenerateElement("element_stiffness: non-positive Jacobian");
    // jac(i,j) = dx_j/dxi_i, hence dN/dx = dN/dxi jac^{-T}
    Eigen::Matrix<double, 8, 3> grad = nder * jac.inverse().transpose();
    Eigen::Matrix<double, 6, 24> b = Eigen::Matrix<double, 6, 24>::Zero();
    for (int a = 0; a < 8; ++a) {
      double gx = grad(a, 0), gy = grad(a, 1), gz = grad(a, 2);
      b(0, 3 * a) = gx;
      b(1, 3 * a + 1) = gy;
      b(2, 3 * a + 2) = gz;
      b(3, 3 * a) = gy;  // gamma_xy
      b(3, 3 * a + 1) = gx;
      b(4, 3 * a + 1) = gz;  // gamma_yz
      b(4, 3 * a + 2) = gy;
      b(5, 3 * a) = gz;  // gamma_xz
      b(5, 3 * a + 2) = gx;
    }
    ke += b.transpose() * d * b * det;
  }
  return ke;
}

/// Discrete model: reduced stiffness, shifted load l = l~ - A d, gap shift d.
/// In the solver variable u the foundation sits at zero: contact nodes obey
/// u_3 >= 0, and the displacement field u + d is smooth across the contact
/// surface.  The gap enters as a preload (-A d) pressing the body onto the
/// foundation, so the unloaded model rests in sticking contact.
struct ContactModel {
  SparseCSR stiffness;
  Eigen::VectorXd load;
  Eigen::VectorXd gap_shift;
  double friction = 0.0;
  int contact_count = 0;
  int n = 0;
};

namespace detail {

/// Adds consistent nodal loads of a constant traction on one bilinear quad.
inline void add_face_load(const Mesh& mesh, const std::array<int, 4>& face,
                          const Eigen::Vector3d& traction,
                          Eigen::VectorXd& load) {
  const double gp = 1.0 / std::sqrt(3.0);
  static const double sg[4][2] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  Eigen::Matrix<double, 4, 3> xf;
  for (int a = 0; a < 4; ++a) xf.row(a) = mesh.coords.row(face[a]);
  for (int q = 0; q < 4; ++q) {
    double xi = (q & 1) ? gp : -gp;
    double eta = (q & 2) ? gp : -gp;
    Eigen::Vector4d nval;
    Eigen::Matrix<double, 4, 2> nder;
    for (int a = 0; a < 4; ++a) {
      nval(a) = 0.25 * (1.0 + sg[a][0] * xi) * (1.0 + sg[a][1] * eta);
      nder(a, 0) = 0.25 * sg[a][0] * (1.0 + sg[a][1] * eta);
      nder(a, 1) = 0.25 * sg[a][1] * (1.0 + sg[a][0] * xi);
    }
    Eigen::Vector3d t1 = xf.transpose() * nder.col(0);
    Eigen::Vector3d t2 = xf.transpose() * nder.col(1);
    double ds = t1.cross(t2).norm();
    for (int a = 0; a < 4; ++a) {
      int dof = mesh.node_dof[face[a]];
      if (dof < 0) continue;
      load.segment<3>(dof) += nval(a) * traction * ds;
    }
  }
}

}  // namespace detail

/// Unreduced stiffness over all nodes (3 dofs per node by node id); used for
/// rigid-mode checks.
inline SparseCSR assemble_full_stiffness(const Mesh& mesh, double young,
                                         double nu) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.hexes.size() * 24 * 24);
  Eigen::Matrix<double, 8, 3> xe;
  for (const auto& hex : mesh.hexes) {
    for (int a = 0; a < 8; ++a) xe.row(a) = mesh.coords.row(hex[a]);
    auto ke = element_stiffness(xe, young, nu);
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            trips.emplace_back(3 * hex[a] + i, 3 * hex[b] + j,
                               ke(3 * a + i, 3 * b + j));
  }
  SparseCSR a(3 * mesh.node_count(), 3 * mesh.node_count());
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

/// Assembles the reduced model: stiffness with Dirichlet dofs eliminated,
/// surface loads on top (P_T) and right (P_R) faces, gap shift folded into
/// the load.
inline ContactModel assemble(const Mesh& mesh, double young, double nu,
                             const Eigen::Vector3d& p_top,
                             const Eigen::Vector3d& p_right, double friction) {
  if (nu <= 0.0 || nu >= 0.5)
    throw InvalidMaterial("assemble: Poisson ratio must lie in (0, 0.5)");
  if (young <= 0.0) throw InvalidMaterial("assemble: Young's modulus must be positive");

  ContactModel model;
  model.friction = friction;
  model.contact_count = mesh.p;
  model.n = mesh.n;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.hexes.size() * 24 * 24);
  Eigen::Matrix<double, 8, 3> xe;
  for (const auto& hex : mesh.hexes) {
    for (int a = 0; a < 8; ++a) xe.row(a) = mesh.coords.row(hex[a]);
    auto ke = element_stiffness(xe, young, nu);
    for (int a = 0; a < 8; ++a) {
      int da = mesh.node_dof[hex[a]];
      if (da < 0) continue;
      for (int b = 0; b < 8; ++b) {
        int db = mesh.node_dof[hex[b]];
        if (db < 0) continue;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            trips.emplace_back(da + i, db + j, ke(3 * a + i, 3 * b + j));
      }
    }
  }
  model.stiffness.resize(mesh.n, mesh.n);
  model.stiffness.setFromTriplets(trips.begin(), trips.end());
  model.stiffness.makeCompressed();

  Eigen::VectorXd tilde_l = Eigen::VectorXd::Zero(mesh.n);
  for (int e1 = 0; e1 < mesh.nx1; ++e1)
    for (int e2 = 0; e2 < mesh.nx2; ++e2) {
      std::array<int, 4> face = {
          mesh.node_id(e1, e2, mesh.nx3), mesh.node_id(e1 + 1, e2, mesh.nx3),
          mesh.node_id(e1 + 1, e2 + 1, mesh.nx3),
          mesh.node_id(e1, e2 + 1, mesh.nx3)};
      detail::add_face_load(mesh, face, p_top, tilde_l);
    }
  for (int e2 = 0; e2 < mesh.nx2; ++e2)
    for (int e3 = 0; e3 < mesh.nx3; ++e3) {
      std::array<int, 4> face = {
          mesh.node_id(mesh.nx1, e2, e3), mesh.node_id(mesh.nx1, e2 + 1, e3),
          mesh.node_id(mesh.nx1, e2 + 1, e3 + 1),
          mesh.node_id(mesh.nx1, e2, e3 + 1)};
      detail::add_face_load(mesh, face, p_right, tilde_l);
    }

  // gap shift: alpha_i in each contact node's normal slot; l = l~ - A d
  model.gap_shift = Eigen::VectorXd::Zero(mesh.n);
  for (int ci = 0; ci < mesh.p; ++ci) {
    int node = mesh.contact_nodes[ci];
    model.gap_shift(3 * ci + 2) = mesh.coords(node, 2);
  }
  model.load = tilde_l - model.stiffness * model.gap_shift;
  return model;
}

/// Legacy-VTK unstructured-grid export with an optional per-contact-node
/// integer state field (0 where a node is not on the contact boundary).
inline void write_vtk(const Mesh& mesh, const std::string& path,
                      const std::vector<int>* contact_states = nullptr) {
  std::ofstream os(path);
  if (!os) throw Error("write_vtk: cannot open " + path);
  os << "# vtk DataFile Version 3.0\ncontact mesh\nASCII\n"
     << "DATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.node_count() << " double\n";
  for (int i = 0; i < mesh.node_count(); ++i)
    os << mesh.coords(i, 0) << " " << mesh.coords(i, 1) << " "
       << mesh.coords(i, 2) << "\n";
  os << "CELLS " << mesh.hexes.size() << " " << 9 * mesh.hexes.size() << "\n";
  for (const auto& hex : mesh.hexes) {
    os << 8;
    for (int v : hex) os << " " << v;
    os << "\n";
  }
  os << "CELL_TYPES " << mesh.hexes.size() << "\n";
  for (size_t i = 0; i < mesh.hexes.size(); ++i) os << "12\n";
  if (contact_states) {
    std::vector<int> field(mesh.node_count(), 0);
    for (int ci = 0; ci < mesh.p; ++ci)
      field[mesh.contact_nodes[ci]] = (*contact_states)[ci];
    os << "POINT_DATA " << mesh.node_count() << "\nSCALARS stratum int 1\n"
       << "LOOKUP_TABLE default\n";
    for (int v : field) os << v << "\n";
  }
}

}  // namespace ssn
