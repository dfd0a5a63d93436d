#include "expray/address.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "expray/potential.hpp"

namespace expray {

namespace {

constexpr long long kScanCap = 4096;

double round_or_inf(double v) {
    if (!std::isfinite(v)) return v;
    return std::nearbyint(v);
}

}  // namespace

ExternalAddress ExternalAddress::eventually_periodic(std::vector<long long> preperiod,
                                                     std::vector<long long> period) {
    if (period.empty()) raise(Errc::ParseError, "period must be nonempty");
    ExternalAddress s;
    s.kind_ = AddressKind::EventuallyPeriodic;
    s.preperiod_ = std::move(preperiod);
    s.period_ = std::move(period);
    return s;
}

ExternalAddress ExternalAddress::generated(double growth_x, double scale_y) {
    if (!(growth_x > 0.0) || !(scale_y > 0.0))
        raise(Errc::ParseError, "generated address needs growth_x > 0 and scale_y > 0");
    ExternalAddress s;
    s.kind_ = AddressKind::Generated;
    s.base_x_ = growth_x;
    s.scale_y_ = scale_y;
    return s;
}

double ExternalAddress::growth_x() const {
    if (kind_ != AddressKind::Generated) return 0.0;
    return F_iter(base_x_, gen_offset_);
}

bool ExternalAddress::operator==(const ExternalAddress& o) const {
    if (kind_ != o.kind_) return false;
    if (kind_ == AddressKind::EventuallyPeriodic)
        return preperiod_ == o.preperiod_ && period_ == o.period_;
    return base_x_ == o.base_x_ && scale_y_ == o.scale_y_ && gen_offset_ == o.gen_offset_;
}

long long entry(const ExternalAddress& s, long long k) {
    if (k < 1) raise(Errc::ParseError, "entry index must be >= 1");
    if (s.kind_ == AddressKind::EventuallyPeriodic) {
        const auto pre = static_cast<long long>(s.preperiod_.size());
        if (k <= pre) return s.preperiod_[static_cast<size_t>(k - 1)];
        const auto per = static_cast<long long>(s.period_.size());
        return s.period_[static_cast<size_t>((k - 1 - pre) % per)];
    }
    const double v = entry_value(s, k);
    if (!std::isfinite(v) || std::abs(v) > 9.0e18)
        raise(Errc::EntryOverflow, "generated entry exceeds integer range at k=" + std::to_string(k));
    return static_cast<long long>(std::llround(v));
}

double entry_value(const ExternalAddress& s, long long k) {
    if (s.kind_ == AddressKind::EventuallyPeriodic)
        return static_cast<double>(entry(s, k));
    const double f = F_iter(s.base_x_, s.gen_offset_ + k - 1);
    return round_or_inf(s.scale_y_ * f);
}

ExternalAddress shift(const ExternalAddress& s, long long n) {
    if (n < 0) raise(Errc::ParseError, "shift count must be >= 0");
    ExternalAddress out = s;
    if (n == 0) return out;
    if (s.kind_ == AddressKind::Generated) {
        out.gen_offset_ += n;
        return out;
    }
    const auto pre = static_cast<long long>(s.preperiod_.size());
    if (n <= pre) {
        out.preperiod_.assign(s.preperiod_.begin() + n, s.preperiod_.end());
        return out;
    }
    out.preperiod_.clear();
    const auto per = static_cast<long long>(s.period_.size());
    const auto rot = static_cast<size_t>((n - pre) % per);
    out.period_.assign(s.period_.begin() + rot, s.period_.end());
    out.period_.insert(out.period_.end(), s.period_.begin(), s.period_.begin() + rot);
    return out;
}

PotentialBounds potential_bounds(const ExternalAddress& s) {
    PotentialBounds out;
    if (s.kind() == AddressKind::EventuallyPeriodic) {
        out.t_min = 0.0;
        out.is_fast = false;
        long long max_abs = 0;
        for (long long v : s.preperiod()) max_abs = std::max(max_abs, std::abs(v));
        for (long long v : s.period()) max_abs = std::max(max_abs, std::abs(v));
        if (max_abs == 0) return out;  // every term is 0

        const auto base = static_cast<long long>(s.preperiod().size() + s.period().size());
        double best = 0.0;
        long long n = 1;
        for (; n <= base + 64; ++n)
            best = std::max(best, F_iter(std::abs(static_cast<double>(entry(s, n))), -(n - 1)));
        // Terms beyond n are bounded by F^{o(-n+1)}(max|s|), which decreases to 0;
        // extend the scan until that majorant drops below the running maximum.
        while (n <= kScanCap && F_iter(static_cast<double>(max_abs), -(n - 1)) >= best) {
            best = std::max(best, F_iter(std::abs(static_cast<double>(entry(s, n))), -(n - 1)));
            ++n;
        }
        out.t_star = best;
        return out;
    }

    out.is_fast = true;
    out.t_min = s.growth_x();
    if (std::isinf(out.t_min)) {
        out.t_star = out.t_min;
        return out;
    }
    // Terms F^{o(-n+1)}(|s_n|) converge to growth_x; once the forward ladder
    // saturates, the remaining terms differ from it by less than an ulp.
    double best = out.t_min;
    for (long long n = 1; n <= 64; ++n) {
        const double v = entry_value(s, n);
        if (!std::isfinite(v)) break;
        best = std::max(best, F_iter(std::abs(v), -(n - 1)));
    }
    out.t_star = best;
    return out;
}

double tail_potential(const ExternalAddress& s, double K) {
    return potential_bounds(s).t_star + 2.0 * std::log(K + 3.0);
}

Ordering lex_compare(const ExternalAddress& a, const ExternalAddress& b, long long horizon) {
    const bool generated =
        a.kind() == AddressKind::Generated || b.kind() == AddressKind::Generated;
    long long h = horizon;
    if (!generated) {
        const auto pre = static_cast<long long>(
            std::max(a.preperiod().size(), b.preperiod().size()));
        const auto l = std::lcm(a.period().size(), b.period().size());
        h = pre + static_cast<long long>(l);
    } else if (h < 1) {
        raise(Errc::UndecidedAtHorizon, "comparison of generated addresses needs a horizon");
    }
    for (long long k = 1; k <= h; ++k) {
        if (!generated) {
            const long long ak = entry(a, k), bk = entry(b, k);
            if (ak < bk) return Ordering::Less;
            if (ak > bk) return Ordering::Greater;
        } else {
            const double ak = entry_value(a, k), bk = entry_value(b, k);
            if (ak < bk) return Ordering::Less;
            if (ak > bk) return Ordering::Greater;
        }
    }
    if (generated)
        raise(Errc::UndecidedAtHorizon,
              "streams agree through k=" + std::to_string(h));
    return Ordering::Equal;
}

namespace {

std::vector<long long> parse_entries(const std::string& text, const char* what) {
    std::vector<long long> out;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) {
        try {
            size_t used = 0;
            out.push_back(std::stoll(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            raise(Errc::ParseError, std::string(what) + ": bad integer '" + tok + "'");
        }
    }
    return out;
}

double parse_real_field(const std::string& text, const std::string& key) {
    const auto pos = text.find(key + "=");
    if (pos == std::string::npos)
        raise(Errc::ParseError, "generated address literal needs '" + key + "='");
    size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text.substr(pos + key.size() + 1), &used);
    } catch (const std::exception&) {
        raise(Errc::ParseError, "bad value for '" + key + "'");
    }
    return v;
}

}  // namespace

ExternalAddress parse_address(const std::string& text) {
    const auto first = text.find_first_not_of(" \t");
    if (first == std::string::npos) raise(Errc::ParseError, "empty address literal");
    std::string body = text.substr(first);
    if (body.rfind("gen", 0) == 0) {
        return ExternalAddress::generated(parse_real_field(body, "x"),
                                          parse_real_field(body, "y"));
    }
    const auto bar = body.find('|');
    if (bar == std::string::npos)
        raise(Errc::ParseError, "address literal needs a '|' between preperiod and period");
    auto pre = parse_entries(body.substr(0, bar), "preperiod");
    auto per = parse_entries(body.substr(bar + 1), "period");
    if (per.empty()) raise(Errc::ParseError, "period part must be nonempty");
    return ExternalAddress::eventually_periodic(std::move(pre), std::move(per));
}

std::string format_address(const ExternalAddress& s) {
    if (s.kind() == AddressKind::Generated) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "gen x=%.17g y=%.17g", s.growth_x(), s.scale_y());
        return buf;
    }
    std::string out;
    for (size_t i = 0; i < s.preperiod().size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(s.preperiod()[i]);
    }
    out += '|';
    for (size_t i = 0; i < s.period().size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(s.period()[i]);
    }
    return out;
}

}  // namespace expray
