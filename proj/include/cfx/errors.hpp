#ifndef CFX_ERRORS_HPP
#define CFX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cfx {

/// A caller broke an operation's precondition (point outside region, schema
/// mismatch, malformed model). Maps to CLI exit code 2.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// An enumeration or queue outgrew its configured cap. Maps to exit code 3.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. `row` is the 1-based data row (0 when not row-bound).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, long row = 0)
        : std::runtime_error(row > 0 ? "row " + std::to_string(row) + ": " + what : what),
          row_(row) {}
    long row() const { return row_; }

private:
    long row_;
};

} // namespace cfx

#endif
