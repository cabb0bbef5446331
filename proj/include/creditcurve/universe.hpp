#pragma once

#include "creditcurve/fitting.hpp"
#include "creditcurve/ratecurve.hpp"

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace credit {

using Date = std::chrono::year_month_day;

/// Parses YYYY-MM-DD. Throws InputError.
Date parse_date(std::string_view text, std::size_t line = 0);
std::string format_date(const Date& date);
/// (to - from) in days / 365.25
double year_fraction(const Date& from, const Date& to);

/// Sovereign par-spread pillars, interpolated linearly in T and held flat
/// outside the pillar range.
class SovereignCurve {
public:
    struct Pillar {
        double tenor;
        double spread;
    };
    explicit SovereignCurve(std::vector<Pillar> pillars);
    double spread_at(double tenor) const;
    const std::vector<Pillar>& pillars() const { return pillars_; }

private:
    std::vector<Pillar> pillars_;
};

/// Descriptive fields carried next to an instrument for reporting.
struct InstrumentInfo {
    std::string sector;
    std::string country;
    std::optional<Rating> external_rating;
    std::optional<Rating> internal_rating;
};

struct UniverseSnapshot {
    Date as_of;
    std::vector<Instrument> instruments; // bonds first, then CDS, in file order
    std::vector<InstrumentInfo> info;    // parallel to instruments
    RiskfreeCurve riskfree;
    std::map<std::string, SovereignCurve> sovereign_curves;
};

struct UniversePaths {
    std::filesystem::path riskfree;
    std::optional<std::filesystem::path> bonds;
    std::optional<std::filesystem::path> cds;
    std::optional<std::filesystem::path> sovereign;
};

/// Header row plus data rows of a comma-separated file. Blank lines and lines
/// starting with '#' are skipped; fields are whitespace-trimmed. An empty
/// input gives an empty header.
struct CsvTable {
    std::vector<std::string> header;
    struct Row {
        std::size_t line;
        std::vector<std::string> fields;
    };
    std::vector<Row> rows;

    std::optional<std::size_t> column(std::string_view name) const;
};

CsvTable read_csv(std::istream& in);

/// `tenor_years,zero_rate`
RiskfreeCurve parse_riskfree(std::istream& in, Compounding compounding);

/// Instruments plus their descriptive info, as read from one file.
struct ParsedInstruments {
    std::vector<Instrument> instruments;
    std::vector<InstrumentInfo> info;
};

/// Columns: id, coupon, price, maturity (YYYY-MM-DD) or tenor; optional
/// issue_size, rating, internal_rating, sector, country, recovery. An empty
/// file has no instruments.
ParsedInstruments parse_bonds(std::istream& in, const Date& as_of);
/// Columns: id, coupon, maturity or tenor, spread or upfront; optional
/// quoting_recovery, issue_size, rating, internal_rating, sector, country,
/// recovery.
ParsedInstruments parse_cds(std::istream& in, const Date& as_of);
/// Columns: country, tenor_years, par_spread
std::map<std::string, SovereignCurve> parse_sovereign(std::istream& in);

/// Reads and validates a snapshot: unique identifiers, positive tenors,
/// internal ratings applied, sovereign spreads attached by country.
UniverseSnapshot load_universe(const UniversePaths& paths, const Date& as_of,
                               Compounding compounding);

/// Builds a snapshot from already-parsed pieces (same validation).
UniverseSnapshot assemble_universe(const Date& as_of, ParsedInstruments bonds,
                                   ParsedInstruments cds, RiskfreeCurve riskfree,
                                   std::map<std::string, SovereignCurve> sovereign);

} // namespace credit
