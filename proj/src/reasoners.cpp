#include "nsbench/reasoners.hpp"

#include "nsbench/error.hpp"

namespace nsb {

const std::vector<std::string>& engine_names() {
    static const std::vector<std::string> names = {"ilp", "dt", "bn", "nscl"};
    return names;
}

std::unique_ptr<Reasoner> make_reasoner(const std::string& engine, const AttributeSchema& schema,
                                        std::uint64_t seed) {
    if (engine == "ilp") return std::make_unique<IlpReasoner>(schema);
    if (engine == "dt") return std::make_unique<DtReasoner>(schema);
    if (engine == "bn") return std::make_unique<BnReasoner>(schema);
    if (engine == "nscl") return std::make_unique<NsclReasoner>(schema, seed);
    throw Error("UNKNOWN_ENGINE", "no engine named '" + engine + "'");
}

} // namespace nsb
