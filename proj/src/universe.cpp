#include "creditcurve/universe.hpp"

#include "creditcurve/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <set>

namespace credit {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view text, std::string_view column, std::size_t line) {
    const std::string s(trim(text));
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (s.empty() || used != s.size() || !std::isfinite(value))
        throw InputError("column '" + std::string(column) + "': expected a number, got '" + s + "'",
                         line);
    return value;
}

/// Field accessor bound to one row.
class RowView {
public:
    RowView(const CsvTable& table, const CsvTable::Row& row) : table_(table), row_(row) {}

    std::size_t line() const { return row_.line; }

    std::optional<std::string> text(std::string_view column) const {
        const auto idx = table_.column(column);
        if (!idx || *idx >= row_.fields.size() || row_.fields[*idx].empty())
            return std::nullopt;
        return row_.fields[*idx];
    }
    std::string required_text(std::string_view column) const {
        auto v = text(column);
        if (!v)
            throw InputError("missing value for column '" + std::string(column) + "'", line());
        return *v;
    }
    std::optional<double> number(std::string_view column) const {
        const auto v = text(column);
        if (!v)
            return std::nullopt;
        return parse_number(*v, column, line());
    }
    double required_number(std::string_view column) const {
        return parse_number(required_text(column), column, line());
    }
    std::optional<Rating> rating(std::string_view column) const {
        const auto v = text(column);
        if (!v)
            return std::nullopt;
        try {
            return Rating::from_symbol(*v);
        } catch (const InputError& e) {
            throw InputError(e.what(), line());
        }
    }

private:
    const CsvTable& table_;
    const CsvTable::Row& row_;
};

void require_columns(const CsvTable& table, std::initializer_list<std::string_view> names,
                     std::string_view file_kind) {
    for (auto name : names)
        if (!table.column(name))
            throw InputError(std::string(file_kind) + " file is missing column '" +
                             std::string(name) + "'");
}

double tenor_for(const RowView& row, const Date& as_of) {
    if (const auto maturity = row.text("maturity")) {
        const double t = year_fraction(as_of, parse_date(*maturity, row.line()));
        if (!(t > 0.0))
            throw InputError("instrument matures on or before the as-of date", row.line());
        return t;
    }
    if (const auto tenor = row.number("tenor")) {
        if (!(*tenor > 0.0))
            throw InputError("tenor must be positive", row.line());
        return *tenor;
    }
    throw InputError("either 'maturity' or 'tenor' is required", row.line());
}

void fill_common(const RowView& row, Instrument& inst, InstrumentInfo& info) {
    inst.id = row.required_text("id");
    if (const auto size = row.number("issue_size")) {
        if (!(*size > 0.0))
            throw InputError("issue_size must be positive", row.line());
        inst.issue_size = *size;
    }
    info.external_rating = row.rating("rating");
    info.internal_rating = row.rating("internal_rating");
    inst.rating = info.internal_rating ? info.internal_rating : info.external_rating;
    info.sector = row.text("sector").value_or("");
    info.country = row.text("country").value_or("");
    if (const auto r = row.number("recovery")) {
        if (!(*r >= 0.0 && *r < 1.0))
            throw InputError("recovery must lie in [0, 1)", row.line());
        inst.recovery_override = *r;
    }
}

} // namespace

Date parse_date(std::string_view text, std::size_t line) {
    text = trim(text);
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    char tail = 0;
    const std::string s(text);
    if (std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3)
        throw InputError("expected a date as YYYY-MM-DD, got '" + s + "'", line);
    const Date date{std::chrono::year(y), std::chrono::month(m), std::chrono::day(d)};
    if (!date.ok())
        throw InputError("invalid calendar date '" + s + "'", line);
    return date;
}

std::string format_date(const Date& date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

double year_fraction(const Date& from, const Date& to) {
    const auto days = (std::chrono::sys_days(to) - std::chrono::sys_days(from)).count();
    return static_cast<double>(days) / 365.25;
}

SovereignCurve::SovereignCurve(std::vector<Pillar> pillars) : pillars_(std::move(pillars)) {
    if (pillars_.empty())
        throw InputError("sovereign curve needs at least one pillar");
    std::sort(pillars_.begin(), pillars_.end(),
              [](const Pillar& x, const Pillar& y) { return x.tenor < y.tenor; });
    for (std::size_t i = 1; i < pillars_.size(); ++i)
        if (!(pillars_[i].tenor > pillars_[i - 1].tenor))
            throw InputError("sovereign curve tenors must be distinct");
}

double SovereignCurve::spread_at(double tenor) const {
    if (tenor <= pillars_.front().tenor)
        return pillars_.front().spread;
    if (tenor >= pillars_.back().tenor)
        return pillars_.back().spread;
    const auto it = std::upper_bound(pillars_.begin(), pillars_.end(), tenor,
                                     [](double t, const Pillar& p) { return t < p.tenor; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double w = (tenor - lo.tenor) / (hi.tenor - lo.tenor);
    return lo.spread + w * (hi.spread - lo.spread);
}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
        return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string raw;
    std::size_t line = 0;
    bool have_header = false;
    while (std::getline(in, raw)) {
        ++line;
        if (!raw.empty() && raw.back() == '\r')
            raw.pop_back();
        const auto content = trim(raw);
        if (content.empty() || content.front() == '#')
            continue;
        std::vector<std::string> fields;
        std::string_view rest = content;
        while (true) {
            const auto comma = rest.find(',');
            fields.emplace_back(trim(rest.substr(0, comma)));
            if (comma == std::string_view::npos)
                break;
            rest.remove_prefix(comma + 1);
        }
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() > table.header.size())
            throw InputError("row has more fields than the header", line);
        table.rows.push_back({line, std::move(fields)});
    }
    return table;
}

RiskfreeCurve parse_riskfree(std::istream& in, Compounding compounding) {
    const auto table = read_csv(in);
    require_columns(table, {"tenor_years", "zero_rate"}, "riskfree curve");
    std::vector<ZeroPillar> pillars;
    for (const auto& row : table.rows) {
        const RowView view(table, row);
        pillars.push_back({view.required_number("tenor_years"), view.required_number("zero_rate")});
        if (pillars.size() > 1 && !(pillars.back().tenor > pillars[pillars.size() - 2].tenor))
            throw InputError("tenors must be strictly increasing", row.line);
        if (!(pillars.back().tenor > 0.0))
            throw InputError("tenors must be positive", row.line);
    }
    if (pillars.empty())
        throw InputError("riskfree curve has no pillars");
    return RiskfreeCurve(std::move(pillars), compounding);
}

ParsedInstruments parse_bonds(std::istream& in, const Date& as_of) {
    const auto table = read_csv(in);
    ParsedInstruments out;
    if (table.header.empty())
        return out;
    require_columns(table, {"id", "coupon", "price"}, "bond");
    for (const auto& row : table.rows) {
        const RowView view(table, row);
        Instrument inst;
        InstrumentInfo info;
        fill_common(view, inst, info);
        BondSpec bond{view.required_number("coupon"), tenor_for(view, as_of),
                      view.required_number("price")};
        if (!(bond.coupon >= 0.0))
            throw InputError("coupon must be non-negative", row.line);
        if (!(bond.price > 0.0))
            throw InputError("price must be positive", row.line);
        inst.terms = bond;
        out.instruments.push_back(std::move(inst));
        out.info.push_back(std::move(info));
    }
    return out;
}

ParsedInstruments parse_cds(std::istream& in, const Date& as_of) {
    const auto table = read_csv(in);
    ParsedInstruments out;
    if (table.header.empty())
        return out;
    require_columns(table, {"id", "coupon"}, "CDS");
    for (const auto& row : table.rows) {
        const RowView view(table, row);
        Instrument inst;
        InstrumentInfo info;
        fill_common(view, inst, info);
        CdsSpec cds{view.required_number("coupon"), tenor_for(view, as_of), TradedSpread{0.0}};
        const auto spread = view.number("spread");
        const auto upfront = view.number("upfront");
        if (spread.has_value() == upfront.has_value())
            throw InputError("exactly one of 'spread' and 'upfront' must be given", row.line);
        if (spread) {
            if (*spread < 0.0)
                throw InputError("traded spread must be non-negative", row.line);
            cds.quote = TradedSpread{*spread};
        } else {
            cds.quote = Upfront{*upfront};
        }
        if (const auto qr = view.number("quoting_recovery")) {
            if (!(*qr >= 0.0 && *qr < 1.0))
                throw InputError("quoting_recovery must lie in [0, 1)", row.line);
            cds.quoting_recovery = *qr;
        }
        inst.terms = cds;
        out.instruments.push_back(std::move(inst));
        out.info.push_back(std::move(info));
    }
    return out;
}

std::map<std::string, SovereignCurve> parse_sovereign(std::istream& in) {
    const auto table = read_csv(in);
    require_columns(table, {"country", "tenor_years", "par_spread"}, "sovereign");
    std::map<std::string, std::vector<SovereignCurve::Pillar>> pillars;
    for (const auto& row : table.rows) {
        const RowView view(table, row);
        pillars[view.required_text("country")].push_back(
            {view.required_number("tenor_years"), view.required_number("par_spread")});
    }
    std::map<std::string, SovereignCurve> out;
    for (auto& [country, p] : pillars)
        out.emplace(country, SovereignCurve(std::move(p)));
    return out;
}

UniverseSnapshot assemble_universe(const Date& as_of, ParsedInstruments bonds,
                                   ParsedInstruments cds, RiskfreeCurve riskfree,
                                   std::map<std::string, SovereignCurve> sovereign) {
    UniverseSnapshot snap{as_of, std::move(bonds.instruments), std::move(bonds.info),
                          std::move(riskfree), std::move(sovereign)};
    for (std::size_t i = 0; i < cds.instruments.size(); ++i) {
        snap.instruments.push_back(std::move(cds.instruments[i]));
        snap.info.push_back(std::move(cds.info[i]));
    }
    if (snap.instruments.empty())
        throw InputError("no instruments");

    std::set<std::string> seen;
    for (std::size_t i = 0; i < snap.instruments.size(); ++i) {
        auto& inst = snap.instruments[i];
        if (!seen.insert(inst.id).second)
            throw InputError("duplicate instrument identifier '" + inst.id + "'");
        const auto& country = snap.info[i].country;
        if (!country.empty()) {
            if (const auto it = snap.sovereign_curves.find(country);
                it != snap.sovereign_curves.end())
                inst.sovereign_spread = it->second.spread_at(inst.tenor());
        }
    }
    return snap;
}

UniverseSnapshot load_universe(const UniversePaths& paths, const Date& as_of,
                               Compounding compounding) {
    auto open = [](const std::filesystem::path& p) {
        std::ifstream in(p);
        if (!in)
            throw InputError("cannot open '" + p.string() + "'");
        return in;
    };
    auto with_file = [](const std::filesystem::path& p, auto&& fn) {
        try {
            return fn();
        } catch (const InputError& e) {
            throw InputError(p.string() + ": " + e.what());
        }
    };

    auto rf_in = open(paths.riskfree);
    auto riskfree = with_file(paths.riskfree, [&] { return parse_riskfree(rf_in, compounding); });
    ParsedInstruments bonds, cds;
    if (paths.bonds) {
        auto in = open(*paths.bonds);
        bonds = with_file(*paths.bonds, [&] { return parse_bonds(in, as_of); });
    }
    if (paths.cds) {
        auto in = open(*paths.cds);
        cds = with_file(*paths.cds, [&] { return parse_cds(in, as_of); });
    }
    std::map<std::string, SovereignCurve> sovereign;
    if (paths.sovereign) {
        auto in = open(*paths.sovereign);
        sovereign = with_file(*paths.sovereign, [&] { return parse_sovereign(in); });
    }
    return assemble_universe(as_of, std::move(bonds), std::move(cds), std::move(riskfree),
                             std::move(sovereign));
}

} // namespace credit
