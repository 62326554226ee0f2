#pragma once

#include "groupoid/core.hpp"
#include "groupoid/gauge.hpp"
#include "groupoid/group.hpp"

// Small standard instances used by tests, the CLI and the README.
namespace groupoid::fixtures {

inline FiniteGroupoid pair2() { return pair_groupoid(2); }
inline FiniteGroupoid z3() { return group_as_groupoid(FiniteGroup::cyclic(3)); }

inline FinitePrincipalBundle bundle_2_z2() { return {2, FiniteGroup::cyclic(2)}; }
inline FinitePrincipalBundle bundle_3_s3() { return {3, FiniteGroup::symmetric(3)}; }

inline GaugeGroupoid gauge_2_z2() { return gauge_groupoid(bundle_2_z2()); }
inline GaugeGroupoid gauge_3_s3() { return gauge_groupoid(bundle_3_s3()); }

}  // namespace groupoid::fixtures
