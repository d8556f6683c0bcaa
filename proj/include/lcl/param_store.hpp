#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "lcl/error.hpp"

namespace lcl {

// Flat parameter vector split into named segments. Segments can be frozen;
// frozen parameters still feed forward evaluation but their gradient entries
// are reported as zero and optimizers must leave them untouched.
class ParamStore {
 public:
  struct Segment {
    std::string name;
    Eigen::Index offset = 0;
    Eigen::Index size = 0;
    bool frozen = false;
  };

  // Appends a segment of `size` parameters, all initialized to `init`.
  // Returns the segment id. Names must be unique and non-empty.
  int add_segment(std::string name, Eigen::Index size, double init = 0.0);

  Eigen::Index size() const { return values_.size(); }
  int segment_count() const { return static_cast<int>(segments_.size()); }

  const Segment& segment(int id) const;
  // Returns the segment id for `name`, or -1 when absent.
  int find_segment(std::string_view name) const;

  double value(Eigen::Index index) const { return values_[index]; }
  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }

  Eigen::Ref<Eigen::VectorXd> segment_values(int id);
  Eigen::Ref<const Eigen::VectorXd> segment_values(int id) const;

  void set_frozen(int id, bool frozen);
  bool frozen(int id) const { return segment(id).frozen; }
  bool frozen_at(Eigen::Index index) const { return frozen_mask_[static_cast<std::size_t>(index)] != 0; }
  const std::vector<std::uint8_t>& frozen_mask() const { return frozen_mask_; }

 private:
  std::vector<Segment> segments_;
  Eigen::VectorXd values_;
  std::vector<std::uint8_t> frozen_mask_;
};

// Freezes a set of segments on construction and restores the previous flags
// when leaving scope. Keeps freeze/thaw pairs exception-safe in trainers.
class FreezeGuard {
 public:
  FreezeGuard(ParamStore& store, const std::vector<int>& segments_to_freeze);
  ~FreezeGuard();
  FreezeGuard(const FreezeGuard&) = delete;
  FreezeGuard& operator=(const FreezeGuard&) = delete;

 private:
  ParamStore& store_;
  std::vector<std::pair<int, bool>> saved_;
};

}  // namespace lcl
