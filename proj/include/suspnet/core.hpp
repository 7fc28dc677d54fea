// Shared types and error reporting.
#pragma once

#include <Eigen/Dense>

#include <numbers>
#include <stdexcept>
#include <string>

namespace suspnet {

using Vec2 = Eigen::Vector2d;

inline constexpr double pi = std::numbers::pi;

// Error categories map onto CLI exit codes.
enum class ErrorKind { Config, Numeric, Validation };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), kind_(kind), code_(std::move(code)) {}
    ErrorKind kind() const { return kind_; }
    const std::string& code() const { return code_; }

private:
    ErrorKind kind_;
    std::string code_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& code, const std::string& what = "") {
    throw Error(kind, code, what);
}

enum class NeckKind { InteriorInterior, InteriorBoundary };

inline Vec2 rotate_cw(const Vec2& v) { return {v.y(), -v.x()}; }

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace suspnet
