#include "datamarket/common/value.hpp"

namespace datamarket {

void encode_value(crypto::Encoder& enc, const Value& v) {
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::int64_t>) {
                enc.tag('i').i64(x);
            } else if constexpr (std::is_same_v<T, Money>) {
                enc.tag('m').i64(x.micros());
            } else if constexpr (std::is_same_v<T, std::string>) {
                enc.tag('s').str(x);
            } else {
                enc.tag('b').bytes(x);
            }
        },
        v);
}

std::string describe(const Value& v) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::int64_t>) {
                return std::to_string(x);
            } else if constexpr (std::is_same_v<T, Money>) {
                return x.to_string();
            } else if constexpr (std::is_same_v<T, std::string>) {
                return x;
            } else {
                return crypto::to_hex(x);
            }
        },
        v);
}

namespace {

template <class T>
const T& get_arg(const Args& args, std::size_t i, const char* kind) {
    if (i >= args.size()) throw ArgumentError("missing argument " + std::to_string(i));
    const T* p = std::get_if<T>(&args[i]);
    if (!p) throw ArgumentError("argument " + std::to_string(i) + " is not " + kind);
    return *p;
}

}  // namespace

std::int64_t arg_int(const Args& args, std::size_t i) { return get_arg<std::int64_t>(args, i, "an integer"); }
Money arg_money(const Args& args, std::size_t i) { return get_arg<Money>(args, i, "an amount"); }
const std::string& arg_string(const Args& args, std::size_t i) { return get_arg<std::string>(args, i, "a string"); }
const Bytes& arg_bytes(const Args& args, std::size_t i) { return get_arg<Bytes>(args, i, "bytes"); }

}  // namespace datamarket
