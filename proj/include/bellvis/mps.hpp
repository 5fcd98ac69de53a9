#pragma once

#include <cstddef>
#include <string>

#include "bellvis/dense.hpp"
#include "bellvis/implicit_lp.hpp"

namespace bellvis {

inline constexpr std::size_t kMpsNonzeroCap = 1'000'000;

// Fixed-format MPS export of the dense-equivalent LP.  MPS convention is
// minimization, so the objective row carries the negated maximization
// objective (noted in a comment header).  Refuses above kMpsNonzeroCap
// constraint-matrix nonzeros.
void write_mps(const ImplicitLp&, const std::string& path);

// Reads files produced by write_mps back into a dense LP, undoing the
// objective negation; subject to the dense entry cap.
reference::DenseLp read_mps(const std::string& path);

}  // namespace bellvis
