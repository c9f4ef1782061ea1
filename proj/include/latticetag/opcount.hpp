#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace latticetag {

enum class Entity { Tag = 0, Reader = 1, Server = 2 };

inline const char* entity_name(Entity e) {
  switch (e) {
    case Entity::Tag: return "tag";
    case Entity::Reader: return "reader";
    case Entity::Server: return "server";
  }
  return "?";
}

// Per-entity tally of abstract operations executed during one session.
// Units follow the accounting convention used throughout the cost model:
// sampling a length-k vector = k, sampling a scalar = 1, elementwise
// vector ops = length, permutation apply = length, matrix-vector
// multiply = 2*rows*cols, fixed hash = input residues, expanding hash =
// input + output residues. Comparisons and concatenation are free.
class OpCounter {
 public:
  void add(Entity e, std::uint64_t ops) { tally_[static_cast<int>(e)] += ops; }
  std::uint64_t total(Entity e) const { return tally_[static_cast<int>(e)]; }
  std::uint64_t grand_total() const {
    return tally_[0] + tally_[1] + tally_[2];
  }
  void reset() { tally_[0] = tally_[1] = tally_[2] = 0; }

 private:
  std::uint64_t tally_[3] = {0, 0, 0};
};

namespace ops {

struct ActiveScope {
  OpCounter* counter = nullptr;
  Entity entity = Entity::Tag;
};

inline ActiveScope& active() {
  thread_local ActiveScope scope;
  return scope;
}

// RAII guard routing primitive-operation charges to one entity's tally.
// While no scope is live, charges are dropped, so setup-phase work
// (key generation, registration, serialization) is never counted.
class Scope {
 public:
  Scope(OpCounter* counter, Entity entity) : saved_(active()) {
    active() = ActiveScope{counter, entity};
  }
  ~Scope() { active() = saved_; }
  Scope(const Scope&) = delete;
  Scope& operator=(const Scope&) = delete;

 private:
  ActiveScope saved_;
};

inline void charge(std::uint64_t n) {
  ActiveScope& s = active();
  if (s.counter != nullptr) s.counter->add(s.entity, n);
}

}  // namespace ops
}  // namespace latticetag
