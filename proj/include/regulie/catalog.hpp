#pragma once

#include <string>
#include <vector>

#include "regulie/group.hpp"

namespace regulie {

/// Look up a built-in group by name: "so3", "su2", "se3", "sl2", "gl2p",
/// "heis3", "torus:N", "rn:N", or "file:<path>" for a JSON group config.
/// Built-ins are cached; repeated lookups return the same instance.
GroupPtr find_group(const std::string& name);

/// Names of the fixed built-in groups (excluding parameterized families).
std::vector<std::string> catalog_names();

/// Load a custom matrix group from a JSON config with fields: name,
/// mat_size, basis (row-major rows of length mat_size^2), constraint in
/// {"orthogonal","special-linear","unipotent-pattern","none"}, and optional
/// abelian / simply_connected flags.
GroupPtr group_from_config_file(const std::string& path);

// --- quaternion utilities for the 4x4 real SU(2) realization -----------------

/// The 4x4 real matrix of left quaternion multiplication by q = (w,x,y,z),
/// in the basis (1,i,j,k). SU(2) elements are exactly L_q with |q| = 1.
Mat left_quaternion_matrix(const Eigen::Vector4d& q);

/// Extract the quaternion from an SU(2) element (its first column).
Eigen::Vector4d quaternion_of(const GroupElement& a);

/// The rotation matrix of a unit quaternion (the standard double cover).
Mat rotation_of_quaternion(const Eigen::Vector4d& q);

}  // namespace regulie
