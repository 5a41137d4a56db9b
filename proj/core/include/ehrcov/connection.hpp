#pragma once

// Ehresmann connections and N-fold splits with their endomorphism pairs.
//
// A split is TE = K + L_1 + ... + L_N with every L_A of the same rank as K.
// For each block there is a map L_A -> K (`to_k`) and its partner K -> L_A
// (`from_k`), built from the dual coframe of the combined frame
// [K, L_1, ..., L_N] by pairing the b-th block field with the b-th K field.
//
// With K vertical, S_A is the map into K and Q_A the map out of it. With K
// horizontal (the frame bundle) the labels swap, so S_A always lands in the
// vertical bundle and Q_A in the horizontal one.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehrcov/checks.hpp"
#include "ehrcov/geometry.hpp"

namespace ehrcov {

class ConnectionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Tolerance used when construction validates algebraic identities.
inline constexpr double kIdentityTolerance = 1e-10;

struct EhresmannConnection {
  SpacePtr space;
  Frame vertical;
  Frame horizontal;
  DualCoframe coframe;  // of [vertical, horizontal]
  Endo11 pv;
  Endo11 ph;
};

/// Builds P_V, P_H from the frames and checks the connection identities at
/// sampled points. Throws ConnectionError on rank mismatch or failed
/// identities and SingularFrameError on degenerate frames.
EhresmannConnection build_connection(SpacePtr space, Frame vertical, Frame horizontal, const SampleConfig& cfg = {});

/// P_V + P_H = I, P_V^2 = P_V, P_V P_H = 0, tangency and verticality records.
std::vector<CheckRecord> validate_connection(const EhresmannConnection& conn, const SampleConfig& cfg,
                                             double threshold = kIdentityTolerance);

enum class Orientation { KVertical, KHorizontal };

std::string to_string(Orientation o);

/// Per block, an r x r matrix M with to_k(e^A_c) = sum_b M[b][c] k_b.
using Pairing = std::vector<std::vector<std::vector<double>>>;

struct SplitStructure {
  EhresmannConnection conn;
  Orientation orientation = Orientation::KVertical;
  Frame k;
  std::vector<Frame> blocks;
  std::vector<Endo11> s;  // S_A
  std::vector<Endo11> q;  // Q_A
  Endo11 s_total;         // sum S_A / sqrt(N)
  Endo11 q_total;
  Endo11 p_k;
  std::vector<Endo11> p_blocks;

  int n_blocks() const noexcept { return static_cast<int>(blocks.size()); }
  int rank() const noexcept { return k.rank(); }
  const Endo11& to_k(int a) const { return orientation == Orientation::KVertical ? s.at(a) : q.at(a); }
  const Endo11& from_k(int a) const { return orientation == Orientation::KVertical ? q.at(a) : s.at(a); }
  const Endo11& to_k_total() const { return orientation == Orientation::KVertical ? s_total : q_total; }
  const Endo11& from_k_total() const { return orientation == Orientation::KVertical ? q_total : s_total; }
  /// Combined frame [K, L_1, ..., L_N].
  Frame combined() const;
};

/// K is the vertical frame for KVertical and the horizontal one otherwise;
/// `blocks` must partition the other side. Validates the split and throws
/// ConnectionError on failure.
SplitStructure canonical_endos(const EhresmannConnection& conn, std::vector<Frame> blocks, Orientation orientation,
                               const std::optional<Pairing>& pairing = std::nullopt, const SampleConfig& cfg = {});

/// Kernel/image conditions, to_k o from_k = P_K, from_k o to_k = P_{L_A},
/// cross terms zero and the aggregate identity, each applied to the whole
/// combined frame at sampled points.
std::vector<CheckRecord> validate_split(const SplitStructure& s, const SampleConfig& cfg,
                                        double threshold = kIdentityTolerance);

}  // namespace ehrcov
