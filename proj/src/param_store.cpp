#include "lcl/param_store.hpp"

#include <algorithm>

namespace lcl {

int ParamStore::add_segment(std::string name, Eigen::Index size, double init) {
  if (name.empty()) throw Error("param segment name must be non-empty");
  if (size <= 0) throw Error("param segment '" + name + "' must have positive size");
  if (find_segment(name) >= 0) throw Error("duplicate param segment '" + name + "'");

  Segment seg;
  seg.name = std::move(name);
  seg.offset = values_.size();
  seg.size = size;
  segments_.push_back(seg);

  values_.conservativeResize(seg.offset + size);
  values_.segment(seg.offset, size).setConstant(init);
  frozen_mask_.resize(static_cast<std::size_t>(values_.size()), 0);
  return static_cast<int>(segments_.size()) - 1;
}

const ParamStore::Segment& ParamStore::segment(int id) const {
  if (id < 0 || id >= segment_count()) throw Error("param segment id out of range");
  return segments_[static_cast<std::size_t>(id)];
}

int ParamStore::find_segment(std::string_view name) const {
  for (int i = 0; i < segment_count(); ++i) {
    if (segments_[static_cast<std::size_t>(i)].name == name) return i;
  }
  return -1;
}

Eigen::Ref<Eigen::VectorXd> ParamStore::segment_values(int id) {
  const Segment& seg = segment(id);
  return values_.segment(seg.offset, seg.size);
}

Eigen::Ref<const Eigen::VectorXd> ParamStore::segment_values(int id) const {
  const Segment& seg = segment(id);
  return values_.segment(seg.offset, seg.size);
}

void ParamStore::set_frozen(int id, bool frozen) {
  if (id < 0 || id >= segment_count()) throw Error("param segment id out of range");
  Segment& seg = segments_[static_cast<std::size_t>(id)];
  seg.frozen = frozen;
  std::fill(frozen_mask_.begin() + seg.offset, frozen_mask_.begin() + seg.offset + seg.size,
            static_cast<std::uint8_t>(frozen ? 1 : 0));
}

FreezeGuard::FreezeGuard(ParamStore& store, const std::vector<int>& segments_to_freeze)
    : store_(store) {
  saved_.reserve(segments_to_freeze.size());
  for (int id : segments_to_freeze) {
    saved_.emplace_back(id, store.frozen(id));
    store.set_frozen(id, true);
  }
}

FreezeGuard::~FreezeGuard() {
  for (auto it = saved_.rbegin(); it != saved_.rend(); ++it) {
    store_.set_frozen(it->first, it->second);
  }
}

}  // namespace lcl
