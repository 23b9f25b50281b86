#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "rtlkit/common/error.hpp"
#include "rtlkit/common/io.hpp"

namespace rtlkit::evalkit {

struct TrialFlags {
    bool syntax_pass = false;
    bool functional_pass = false;
};

/// Results of n generations for one problem.
struct TrialRecord {
    std::string problem_id;
    std::size_t n = 0;
    std::size_t c = 0;         // functional passes
    std::size_t c_syntax = 0;  // syntax passes
    std::vector<TrialFlags> trials;

    static TrialRecord from_trials(std::string id, std::vector<TrialFlags> flags) {
        TrialRecord r{std::move(id), flags.size(), 0, 0, std::move(flags)};
        for (const auto& f : r.trials) {
            require(!f.functional_pass || f.syntax_pass, ErrorKind::InvalidInput,
                    r.problem_id + ": functional pass without syntax pass");
            r.c += f.functional_pass;
            r.c_syntax += f.syntax_pass;
        }
        return r;
    }

    void validate() const {
        require(c <= n && c_syntax <= n, ErrorKind::InvalidInput, problem_id + ": pass count exceeds trials");
        require(c <= c_syntax, ErrorKind::InvalidInput, problem_id + ": more functional than syntax passes");
    }
};

/// Probability that a random k-subset of n trials contains at least one of c
/// passes: 1 - C(n-c, k) / C(n, k), evaluated as a product to avoid overflow.
inline double pass_at_k(std::size_t n, std::size_t c, std::size_t k) {
    require(c <= n, ErrorKind::Precondition, "pass count exceeds trials");
    require(k <= n, ErrorKind::Precondition, "k exceeds trials");
    if (n - c < k) return 1.0;
    double miss = 1.0;
    for (std::size_t i = n - c + 1; i <= n; ++i) miss *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
    return 1.0 - miss;
}

struct PassAtK {
    double syntax = 0;
    double functional = 0;
};

inline PassAtK pass_at_k(const std::vector<TrialRecord>& records, std::size_t k) {
    require(!records.empty(), ErrorKind::Precondition, "pass@k over no problems");
    require(k >= 1, ErrorKind::Precondition, "k must be >= 1");
    PassAtK out;
    for (const auto& r : records) {
        r.validate();
        if (r.n < k)
            fail(ErrorKind::Precondition, r.problem_id + ": n=" + std::to_string(r.n) + " < k=" + std::to_string(k));
        out.syntax += pass_at_k(r.n, r.c_syntax, k);
        out.functional += pass_at_k(r.n, r.c, k);
    }
    out.syntax /= static_cast<double>(records.size());
    out.functional /= static_cast<double>(records.size());
    return out;
}

/// Either {"problem_id", "trials": [{"syntax_pass", "functional_pass"}...]}
/// or {"problem_id", "n", "c", "c_syntax"?}; optional "temperature".
inline TrialRecord trial_from_json(const json& j) {
    try {
        auto id = j.at("problem_id").get<std::string>();
        if (j.contains("trials")) {
            std::vector<TrialFlags> flags;
            for (const auto& t : j["trials"])
                flags.push_back({t.at("syntax_pass").get<bool>(), t.at("functional_pass").get<bool>()});
            return TrialRecord::from_trials(std::move(id), std::move(flags));
        }
        TrialRecord r{std::move(id), j.at("n").get<std::size_t>(), j.at("c").get<std::size_t>(), 0, {}};
        r.c_syntax = j.value("c_syntax", r.c);
        r.validate();
        return r;
    } catch (const json::exception& e) {
        fail(ErrorKind::ParseError, std::string("bad trial record: ") + e.what());
    }
}

struct TemperatureResult {
    double temperature = 0;
    std::map<std::size_t, PassAtK> by_k;
};

/// pass@k per sampling temperature, and the best over temperatures for each k
/// (syntax and functional maximised independently).
struct PassReport {
    std::vector<TemperatureResult> per_temperature;
    std::map<std::size_t, PassAtK> best;
};

inline PassReport pass_at_k_report(const std::map<double, std::vector<TrialRecord>>& by_temperature,
                                   const std::vector<std::size_t>& ks) {
    require(!by_temperature.empty(), ErrorKind::Precondition, "no trial records");
    PassReport rep;
    for (const auto& [t, records] : by_temperature) {
        TemperatureResult tr{t, {}};
        for (auto k : ks) {
            auto v = pass_at_k(records, k);
            tr.by_k[k] = v;
            auto [it, fresh] = rep.best.try_emplace(k, v);
            if (!fresh) {
                it->second.syntax = std::max(it->second.syntax, v.syntax);
                it->second.functional = std::max(it->second.functional, v.functional);
            }
        }
        rep.per_temperature.push_back(std::move(tr));
    }
    return rep;
}

} // namespace rtlkit::evalkit
