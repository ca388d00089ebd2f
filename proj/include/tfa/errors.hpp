#ifndef TFA_ERRORS_HPP
#define TFA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tfa {

/// Invalid configuration value; carries the key path.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

private:
  std::string key_;
};

/// A structural predicate of the decomposition failed.
class StructuralError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace tfa

#endif
