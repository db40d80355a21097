#pragma once

#include <optional>
#include <string_view>

namespace examqa {

// Pipeline stages map one-to-one onto model roles; the translator role
// serves dataset expansion.
enum class Role { describer, aggregator, reasoner, translator };

constexpr const char* to_string(Role r) {
    switch (r) {
        case Role::describer: return "describer";
        case Role::aggregator: return "aggregator";
        case Role::reasoner: return "reasoner";
        case Role::translator: return "translator";
    }
    return "describer";
}

inline std::optional<Role> role_from_string(std::string_view s) {
    if (s == "describer") return Role::describer;
    if (s == "aggregator") return Role::aggregator;
    if (s == "reasoner") return Role::reasoner;
    if (s == "translator") return Role::translator;
    return std::nullopt;
}

}  // namespace examqa
