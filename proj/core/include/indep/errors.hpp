#pragma once

#include <stdexcept>
#include <string>

namespace indep {

/// Base class for all library errors. The category maps onto CLI exit codes.
class Error : public std::runtime_error {
 public:
  enum class Category { kInput = 1, kConfiguration = 2, kBudget = 3, kInternal = 4 };

  Error(Category category, const std::string& what) : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

 private:
  Category category_;
};

/// Malformed record, wrong arity, or a coordinate outside [1, n].
class MalformedInput : public Error {
 public:
  explicit MalformedInput(const std::string& what) : Error(Category::kInput, what) {}
};

/// An operation that needs m >= 1 saw an empty stream.
class EmptyStream : public Error {
 public:
  explicit EmptyStream(const std::string& what = "stream is empty") : Error(Category::kInput, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(Category::kConfiguration, what) {}
};

/// A request would exceed a dense-iteration or work budget.
class BudgetExceeded : public Error {
 public:
  explicit BudgetExceeded(const std::string& what) : Error(Category::kBudget, what) {}
};

/// Argument outside an operation's mathematical domain.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(Category::kConfiguration, what) {}
};

/// Two sketch states built from different randomness or shapes.
class MergeIncompatible : public Error {
 public:
  explicit MergeIncompatible(const std::string& what) : Error(Category::kConfiguration, what) {}
};

/// Rethrows e as its own dynamic type with prefix prepended to the message.
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& prefix) {
  const std::string what = prefix + e.what();
  if (dynamic_cast<const MalformedInput*>(&e)) throw MalformedInput(what);
  if (dynamic_cast<const EmptyStream*>(&e)) throw EmptyStream(what);
  if (dynamic_cast<const ConfigError*>(&e)) throw ConfigError(what);
  if (dynamic_cast<const BudgetExceeded*>(&e)) throw BudgetExceeded(what);
  if (dynamic_cast<const DomainError*>(&e)) throw DomainError(what);
  if (dynamic_cast<const MergeIncompatible*>(&e)) throw MergeIncompatible(what);
  throw Error(e.category(), what);
}

}  // namespace indep
