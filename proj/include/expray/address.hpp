#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "expray/error.hpp"

namespace expray {

enum class AddressKind { EventuallyPeriodic, Generated };

enum class Ordering { Less, Equal, Greater };

/// Integer sequence s = (s1, s2, ...) addressing the horizontal strips an
/// orbit visits. Either an eventually periodic list of entries, or a fast
/// sequence generated by the rule s_k = round(scale_y * F^{o(k-1)}(growth_x)).
class ExternalAddress {
  public:
    static ExternalAddress eventually_periodic(std::vector<long long> preperiod,
                                               std::vector<long long> period);
    static ExternalAddress generated(double growth_x, double scale_y);

    AddressKind kind() const { return kind_; }
    const std::vector<long long>& preperiod() const { return preperiod_; }
    const std::vector<long long>& period() const { return period_; }
    double growth_x() const;  // effective growth parameter; saturates under shifts
    double scale_y() const { return scale_y_; }

    bool operator==(const ExternalAddress& o) const;

  private:
    friend long long entry(const ExternalAddress&, long long);
    friend double entry_value(const ExternalAddress&, long long);
    friend ExternalAddress shift(const ExternalAddress&, long long);

    AddressKind kind_ = AddressKind::EventuallyPeriodic;
    std::vector<long long> preperiod_;
    std::vector<long long> period_;
    double base_x_ = 0.0;
    double scale_y_ = 0.0;
    long long gen_offset_ = 0;  // shifts advance the generation rule index
};

struct PotentialBounds {
    double t_star = 0.0;  // sup_n F^{o(-n+1)}(|s_n|)
    double t_min = 0.0;   // infimum of potentials at which the ray exists
    bool is_fast = false;
};

/// s_k, 1-based. Generated entries beyond the integer range signal EntryOverflow.
long long entry(const ExternalAddress& s, long long k);

/// s_k as a double, saturating instead of erroring. Used for seeds and bounds.
double entry_value(const ExternalAddress& s, long long k);

/// Drops the first n entries; the representation kind is preserved.
ExternalAddress shift(const ExternalAddress& s, long long n);

PotentialBounds potential_bounds(const ExternalAddress& s);

/// t_s* + 2 log(K+3): above this potential the ray of s is defined for all
/// |kappa| <= K and the tail asymptotics apply.
double tail_potential(const ExternalAddress& s, double K);

/// Lexicographic comparison of entry streams. Requires a horizon when a
/// Generated address is involved; agreement up to it signals UndecidedAtHorizon.
Ordering lex_compare(const ExternalAddress& a, const ExternalAddress& b, long long horizon = 0);

/// Literal syntax: "p1 p2|q1 q2" (preperiod | period, bar mandatory) or
/// "gen x=<real> y=<real>". format/parse round-trip is bit exact.
ExternalAddress parse_address(const std::string& text);
std::string format_address(const ExternalAddress& s);

}  // namespace expray
