#pragma once

#include <functional>
#include <memory>

namespace sct {

// Immutable ordered map with path-copying inserts (AVL balanced).
// Copying the map is O(1); insert returns a new map sharing structure with the
// old one. The interpreter saves/restores whole tables across call extents, so
// persistence here is what keeps non-tail calls O(log n) instead of O(n).
template <class K, class V, class Less = std::less<K>>
class persistent_map {
  struct node {
    K key;
    V val;
    std::shared_ptr<const node> left, right;
    int height;
    std::size_t count;
  };
  using node_ptr = std::shared_ptr<const node>;

  node_ptr root_;

  static int height(const node_ptr& n) { return n ? n->height : 0; }
  static std::size_t count(const node_ptr& n) { return n ? n->count : 0; }

  static node_ptr make(const K& k, const V& v, node_ptr l, node_ptr r) {
    auto n = std::make_shared<node>(node{k, v, std::move(l), std::move(r), 0, 0});
    auto* m = const_cast<node*>(n.get());
    m->height = 1 + std::max(height(n->left), height(n->right));
    m->count = 1 + count(n->left) + count(n->right);
    return n;
  }

  static node_ptr rotate_left(const node_ptr& n) {
    const node_ptr& r = n->right;
    return make(r->key, r->val, make(n->key, n->val, n->left, r->left), r->right);
  }

  static node_ptr rotate_right(const node_ptr& n) {
    const node_ptr& l = n->left;
    return make(l->key, l->val, l->left, make(n->key, n->val, l->right, n->right));
  }

  static node_ptr balance(node_ptr n) {
    int d = height(n->left) - height(n->right);
    if (d > 1) {
      if (height(n->left->left) < height(n->left->right))
        n = make(n->key, n->val, rotate_left(n->left), n->right);
      return rotate_right(n);
    }
    if (d < -1) {
      if (height(n->right->right) < height(n->right->left))
        n = make(n->key, n->val, n->left, rotate_right(n->right));
      return rotate_left(n);
    }
    return n;
  }

  static node_ptr insert(const node_ptr& n, const K& k, const V& v) {
    Less less;
    if (!n) return make(k, v, nullptr, nullptr);
    if (less(k, n->key)) return balance(make(n->key, n->val, insert(n->left, k, v), n->right));
    if (less(n->key, k)) return balance(make(n->key, n->val, n->left, insert(n->right, k, v)));
    return make(k, v, n->left, n->right);
  }

  template <class F>
  static void walk(const node_ptr& n, F& f) {
    if (!n) return;
    walk(n->left, f);
    f(n->key, n->val);
    walk(n->right, f);
  }

  explicit persistent_map(node_ptr r) : root_(std::move(r)) {}

 public:
  persistent_map() = default;

  const V* find(const K& k) const {
    Less less;
    const node* n = root_.get();
    while (n) {
      if (less(k, n->key))
        n = n->left.get();
      else if (less(n->key, k))
        n = n->right.get();
      else
        return &n->val;
    }
    return nullptr;
  }

  persistent_map set(const K& k, const V& v) const { return persistent_map(insert(root_, k, v)); }

  std::size_t size() const { return count(root_); }
  bool empty() const { return !root_; }

  // In-order (ascending key) traversal.
  template <class F>
  void for_each(F f) const {
    walk(root_, f);
  }
};

}  // namespace sct
