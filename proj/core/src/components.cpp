#include "tumorseg/components.hpp"

#include <array>
#include <numeric>
#include <string>

#include "tumorseg/errors.hpp"

namespace tumorseg {

Connectivity connectivity_from_int(int value) {
  switch (value) {
    case 6: return Connectivity::k6;
    case 18: return Connectivity::k18;
    case 26: return Connectivity::k26;
    default:
      throw ConfigError("connectivity must be 6, 18 or 26, got " + std::to_string(value));
  }
}

std::vector<std::array<int, 3>> neighbor_offsets(Connectivity c) {
  std::vector<std::array<int, 3>> out;
  for (int z = -1; z <= 1; ++z) {
    for (int y = -1; y <= 1; ++y) {
      for (int x = -1; x <= 1; ++x) {
        const int nonzero = (x != 0) + (y != 0) + (z != 0);
        if (nonzero == 0) continue;
        if (c == Connectivity::k6 && nonzero > 1) continue;
        if (c == Connectivity::k18 && nonzero > 2) continue;
        out.push_back({x, y, z});
      }
    }
  }
  return out;
}

BinaryMask ComponentLabeling::component_mask(std::uint32_t id) const {
  std::vector<std::uint8_t> m(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) m[i] = ids[i] == id && id != 0;
  return BinaryMask(geometry, std::move(m));
}

BinaryMask ComponentLabeling::select(const std::vector<bool>& keep) const {
  std::vector<std::uint8_t> m(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto id = ids[i];
    m[i] = id != 0 && id < keep.size() && keep[id];
  }
  return BinaryMask(geometry, std::move(m));
}

namespace {

class DisjointSet {
 public:
  std::uint32_t make() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }

  std::uint32_t find(std::uint32_t x) {
    std::uint32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const std::uint32_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  // The smaller root survives, so a set's root is its earliest provisional
  // label.
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) {
      parent_[b] = a;
    } else {
      parent_[a] = b;
    }
  }

  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
};

}  // namespace

ComponentLabeling connected_components(const BinaryMask& mask, Connectivity connectivity) {
  const GridShape& s = mask.shape();
  ComponentLabeling out;
  out.geometry = mask.geometry();
  out.ids.assign(s.voxels(), 0);

  // Neighbors already visited in a raster scan: those preceding the voxel
  // in storage order.
  std::vector<std::array<int, 3>> backward;
  for (const auto& o : neighbor_offsets(connectivity)) {
    if (o[2] < 0 || (o[2] == 0 && (o[1] < 0 || (o[1] == 0 && o[0] < 0)))) backward.push_back(o);
  }

  DisjointSet sets;
  sets.make();  // provisional label 0 is background
  const auto sx = static_cast<long>(s.dx), sy = static_cast<long>(s.dy);
  const auto sz = static_cast<long>(s.dz);
  for (long z = 0; z < sz; ++z) {
    for (long y = 0; y < sy; ++y) {
      for (long x = 0; x < sx; ++x) {
        const std::size_t i = s.index(x, y, z);
        if (!mask[i]) continue;
        std::uint32_t label = 0;
        for (const auto& o : backward) {
          const long nx = x + o[0], ny = y + o[1], nz = z + o[2];
          if (nx < 0 || ny < 0 || nz < 0 || nx >= sx || ny >= sy) continue;
          const std::uint32_t other = out.ids[s.index(nx, ny, nz)];
          if (other == 0) continue;
          if (label == 0) {
            label = other;
          } else if (other != label) {
            sets.unite(label, other);
          }
        }
        out.ids[i] = label != 0 ? label : sets.make();
      }
    }
  }

  // Provisional labels appear in increasing order of their first voxel, and
  // each set's root is its smallest provisional label, so numbering roots
  // in increasing order numbers components by first appearance.
  std::vector<std::uint32_t> final_id(sets.size(), 0);
  for (std::uint32_t l = 1; l < sets.size(); ++l) {
    const std::uint32_t root = sets.find(l);
    if (root == l) final_id[l] = ++out.count;
  }
  out.sizes.assign(out.count, 0);
  for (auto& id : out.ids) {
    if (id == 0) continue;
    id = final_id[sets.find(id)];
    ++out.sizes[id - 1];
  }
  return out;
}

}  // namespace tumorseg
