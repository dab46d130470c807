#include "moo/registry.hpp"

namespace moo {

uint64_t Registry::export_object(const ObjPtr& h) {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = ids_.find(h.get());
    if (it != ids_.end()) return it->second;
    uint64_t oid = next_oid_++;
    objects_[oid] = h;
    ids_[h.get()] = oid;
    return oid;
}

ObjPtr Registry::find(uint64_t oid) const {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = objects_.find(oid);
    return it == objects_.end() ? nullptr : it->second;
}

uint64_t Registry::bind_singleton(const std::string& cls, const ObjPtr& h) {
    {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = singletons_.find(cls);
        if (it != singletons_.end()) return it->second;
    }
    uint64_t oid = export_object(h);
    std::lock_guard<std::mutex> lk(mu_);
    singletons_.emplace(cls, oid);
    return oid;
}

ObjPtr Registry::singleton(const std::string& cls) const {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = singletons_.find(cls);
    if (it == singletons_.end()) return nullptr;
    auto oit = objects_.find(it->second);
    return oit == objects_.end() ? nullptr : oit->second;
}

size_t Registry::count_instances_of(const std::string& cls) const {
    std::lock_guard<std::mutex> lk(mu_);
    size_t n = 0;
    for (const auto& [oid, h] : objects_)
        if (h->cls == cls) ++n;
    return n;
}

size_t Registry::size() const {
    std::lock_guard<std::mutex> lk(mu_);
    return objects_.size();
}

} // namespace moo
