#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hcc/node_set.hpp"
#include "hcc/taxonomy.hpp"

namespace hcc {

/// Non-overlapping leaf cover: an antichain whose leaf cover is every leaf.
struct NolCover {
  std::size_t id = 0;
  NodeSet members;
  std::vector<NodeIndex> member_list;  // ascending
  NodeSet covered_leaves;
};

enum class CoverMode { kExhaustive, kDepthLimited };

/// How a cover space should be built.
/// kAuto enumerates exhaustively and falls back to depth-limited covers when
/// the exhaustive space exceeds max_covers.
enum class CoverSelection { kExhaustive, kDepthLimited, kAuto };

const char* cover_mode_name(CoverMode mode);

inline constexpr std::size_t kDefaultMaxCovers = 200000;

struct CoverWarning {
  std::size_t level = 0;
  std::string message;
};

/// Covers ordered by (size, ascending member indices); cover ids are
/// positions in that order.
class CoverSpace {
 public:
  CoverSpace() = default;
  CoverSpace(std::vector<NodeSet> member_sets, const Taxonomy& t, CoverMode mode);

  const std::vector<NolCover>& covers() const { return covers_; }
  std::size_t size() const { return covers_.size(); }
  const NolCover& operator[](std::size_t id) const { return covers_.at(id); }

  CoverMode mode() const { return mode_; }
  std::uint64_t taxonomy_fingerprint() const { return fingerprint_; }

  std::optional<std::size_t> find(const NodeSet& members) const;
  // Throws kInternal if absent.
  std::size_t all_leaves_id() const;
  std::size_t root_id() const;

  std::vector<CoverWarning> warnings;

 private:
  std::vector<NolCover> covers_;
  CoverMode mode_ = CoverMode::kExhaustive;
  std::uint64_t fingerprint_ = 0;
  std::size_t all_leaves_id_ = 0;
  std::size_t root_id_ = 0;
  bool has_all_leaves_ = false;
  bool has_root_ = false;
};

bool has_ancestor_overlap(const Taxonomy& t, const NodeSet& nodes);
bool is_nol_cover(const Taxonomy& t, const NodeSet& nodes);

/// Top-down enumeration from {root}: a cover expands by replacing one
/// internal member with its children. In multi-parent DAGs that replacement
/// can introduce a descendant of another member; such members are dropped
/// so every visited state stays a NOL-cover and no cover is unreachable.
///
/// When the number of covers exceeds max_covers, falls back to
/// depth_limited_covers() if allow_fallback is set, otherwise throws
/// kCoverExplosion.
CoverSpace enumerate_nol_covers(const Taxonomy& t,
                                std::optional<std::size_t> max_covers = kDefaultMaxCovers,
                                bool allow_fallback = true);

/// One cover per depth level d: every node of depth d plus the leaves
/// shallower than d. Duplicate levels are merged.
CoverSpace depth_limited_covers(const Taxonomy& t);

inline constexpr std::size_t kBruteForceMaxNodes = 20;

/// Test oracle: filters all 2^|V| subsets. Requires |V| <= 20.
CoverSpace brute_force_nol_covers(const Taxonomy& t);

CoverSpace build_cover_space(const Taxonomy& t, CoverSelection selection,
                             std::size_t max_covers = kDefaultMaxCovers);

}  // namespace hcc
