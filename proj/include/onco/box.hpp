#pragma once

#include <memory>
#include <type_traits>
#include <utility>

namespace onco {

// Heap-allocated value with deep-copy semantics. Lets recursive variant
// types (an Association holding a nested constraint) stay regular.
template <typename T>
class Box {
 public:
  template <typename U, typename = std::enable_if_t<!std::is_same_v<std::remove_cvref_t<U>, Box>>>
  Box(U&& value) : ptr_(std::make_unique<T>(std::forward<U>(value))) {}  // NOLINT
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;
  ~Box() = default;

  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) { return *a.ptr_ == *b.ptr_; }

 private:
  std::unique_ptr<T> ptr_;
};

}  // namespace onco
