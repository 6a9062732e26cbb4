#pragma once

#include <stdexcept>
#include <string>

namespace reparam {

struct FamilyMismatch : std::runtime_error {
    explicit FamilyMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidMode : std::runtime_error {
    explicit InvalidMode(const std::string& what) : std::runtime_error(what) {}
};

struct LevelTooLarge : std::runtime_error {
    explicit LevelTooLarge(const std::string& what) : std::runtime_error(what) {}
};

struct LocateFailure : std::runtime_error {
    explicit LocateFailure(const std::string& what) : std::runtime_error(what) {}
};

struct MeshMismatch : std::runtime_error {
    explicit MeshMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyRegion : std::runtime_error {
    explicit EmptyRegion(const std::string& what) : std::runtime_error(what) {}
};

struct BadProfile : std::runtime_error {
    explicit BadProfile(const std::string& what) : std::runtime_error(what) {}
};

struct NotVStable : std::runtime_error {
    explicit NotVStable(const std::string& what) : std::runtime_error(what) {}
};

struct ConstantMapRejected : std::runtime_error {
    explicit ConstantMapRejected(const std::string& what) : std::runtime_error(what) {}
};

struct SameOrbitSuspected : std::runtime_error {
    explicit SameOrbitSuspected(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroGap : std::runtime_error {
    explicit ZeroGap(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace reparam
