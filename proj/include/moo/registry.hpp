#pragma once

#include "moo/interp.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <string>

namespace moo {

/// Per-node table of exported objects. Object ids are assigned from 1 and
/// never reused within a node lifetime; id 0 is reserved for the node itself
/// (trace routing and node-level queries). At most one static-singleton
/// entry exists per class.
class Registry {
  public:
    /// Export an object (idempotent: the same object keeps its id).
    uint64_t export_object(const ObjPtr& h);

    /// nullptr when the oid was never exported here.
    ObjPtr find(uint64_t oid) const;

    /// Export a class's static singleton (idempotent per class).
    uint64_t bind_singleton(const std::string& cls, const ObjPtr& h);
    ObjPtr singleton(const std::string& cls) const;

    /// Number of exported objects whose runtime class is exactly `cls`.
    size_t count_instances_of(const std::string& cls) const;
    size_t size() const;

  private:
    mutable std::mutex mu_;
    std::map<uint64_t, ObjPtr> objects_;
    std::map<const Obj*, uint64_t> ids_;
    std::map<std::string, uint64_t> singletons_;
    uint64_t next_oid_ = 1;
};

} // namespace moo
