#include "strat/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace strat {

namespace {

std::string num17(Real v)
{
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string fixed(double v, int digits = 2)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string escape_xml(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

}  // namespace

std::string wings_csv(const ConditionReport& r)
{
    std::ostringstream os;
    os << "wing,label,t,g,log_t,log_g\n";
    for (std::size_t w = 0; w < r.traces.size(); ++w) {
        const auto& tr = r.traces[w];
        for (std::size_t i = 0; i < tr.t.size(); ++i) {
            os << w << "," << csv_field(tr.label) << "," << num17(tr.t[i]) << "," << num17(tr.g[i]) << ","
               << num17(std::log(tr.t[i])) << "," << (tr.g[i] > 0 ? num17(std::log(tr.g[i])) : std::string("-inf"))
               << "\n";
        }
    }
    return os.str();
}

std::string wings_svg(const ConditionReport& r, const std::string& title)
{
    const double W = 640, H = 420, left = 70, right = 20, top = 40, bottom = 50;
    double tmin = std::numeric_limits<double>::infinity(), tmax = -tmin, gmin = tmin, gmax = -tmin;
    for (const auto& tr : r.traces)
        for (std::size_t i = 0; i < tr.t.size(); ++i) {
            if (!(tr.g[i] > 0) || !std::isfinite(tr.g[i]) || !(tr.t[i] > 0)) continue;
            double lt = std::log10(static_cast<double>(tr.t[i])), lg = std::log10(static_cast<double>(tr.g[i]));
            if (!std::isfinite(lg)) continue;
            tmin = std::min(tmin, lt);
            tmax = std::max(tmax, lt);
            gmin = std::min(gmin, lg);
            gmax = std::max(gmax, lg);
        }
    if (!std::isfinite(tmin)) {
        tmin = -1;
        tmax = 0;
        gmin = -1;
        gmax = 0;
    }
    tmin = std::floor(tmin);
    tmax = std::ceil(tmax);
    gmin = std::floor(gmin);
    gmax = std::ceil(gmax);
    if (tmax <= tmin) tmax = tmin + 1;
    if (gmax <= gmin) gmax = gmin + 1;
    auto X = [&](double lt) { return left + (lt - tmin) / (tmax - tmin) * (W - left - right); };
    auto Y = [&](double lg) { return H - bottom - (lg - gmin) / (gmax - gmin) * (H - top - bottom); };

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
       << escape_xml(title) << "</text>\n";
    os << "<g stroke=\"#ccc\" stroke-width=\"1\">\n";
    const int tstep = std::max(1, static_cast<int>((tmax - tmin) / 10));
    const int gstep = std::max(1, static_cast<int>((gmax - gmin) / 10));
    for (int k = static_cast<int>(tmin); k <= static_cast<int>(tmax); k += tstep)
        os << "<line x1=\"" << fixed(X(k)) << "\" y1=\"" << fixed(top) << "\" x2=\"" << fixed(X(k)) << "\" y2=\""
           << fixed(H - bottom) << "\"/>\n";
    for (int k = static_cast<int>(gmin); k <= static_cast<int>(gmax); k += gstep)
        os << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(Y(k)) << "\" x2=\"" << fixed(W - right) << "\" y2=\""
           << fixed(Y(k)) << "\"/>\n";
    os << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int k = static_cast<int>(tmin); k <= static_cast<int>(tmax); k += tstep)
        os << "<text x=\"" << fixed(X(k)) << "\" y=\"" << fixed(H - bottom + 16) << "\" text-anchor=\"middle\">1e" << k
           << "</text>\n";
    for (int k = static_cast<int>(gmin); k <= static_cast<int>(gmax); k += gstep)
        os << "<text x=\"" << fixed(left - 6) << "\" y=\"" << fixed(Y(k) + 4) << "\" text-anchor=\"end\">1e" << k
           << "</text>\n";
    os << "<text x=\"" << fixed((left + W - right) / 2) << "\" y=\"" << fixed(H - 12) << "\" text-anchor=\"middle\">t</text>\n";
    os << "<text x=\"16\" y=\"" << fixed((top + H - bottom) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << fixed((top + H - bottom) / 2) << ")\">ratio</text>\n";
    os << "</g>\n";
    os << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(W - left - right)
       << "\" height=\"" << fixed(H - top - bottom) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (const auto& tr : r.traces) {
        std::string pts;
        for (std::size_t i = 0; i < tr.t.size(); ++i) {
            if (!(tr.g[i] > 0) || !(tr.t[i] > 0)) continue;
            double lg = std::log10(static_cast<double>(tr.g[i]));
            if (!std::isfinite(lg)) continue;
            if (!pts.empty()) pts += " ";
            pts += fixed(X(std::log10(static_cast<double>(tr.t[i])))) + "," + fixed(Y(lg));
        }
        if (pts.empty()) continue;
        os << "<polyline fill=\"none\" stroke=\"" << (tr.witness ? "#c00" : "#36c") << "\" stroke-width=\""
           << (tr.witness ? "2" : "1") << "\" points=\"" << pts << "\"><title>" << escape_xml(tr.label)
           << "</title></polyline>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << text;
    if (!f) throw Error("cannot write " + path.string());
}

ReportFiles write_report(const ConditionReport& r, const std::filesystem::path& dir, const std::string& stem)
{
    ReportFiles files{dir / (stem + ".txt"), dir / (stem + ".csv"), dir / (stem + ".svg")};
    write_text(files.text, r.str());
    write_text(files.csv, wings_csv(r));
    write_text(files.svg, wings_svg(r, to_string(r.condition) + ": " + r.lower + " < " + r.upper + " at " +
                                           format_point(r.base) + " (" + to_string(r.verdict) + ")"));
    return files;
}

std::string gallery_table(const std::vector<EntryOutcome>& outcomes)
{
    std::vector<std::vector<std::string>> rows{{"entry", "check", "pair", "base", "expected", "verdict", "C", "slope", "result"}};
    for (const auto& e : outcomes) {
        for (std::size_t i = 0; i < e.checks.size(); ++i) {
            const auto& c = e.checks[i];
            const auto* x = c.expectation;
            std::string expected = x && x->verdict ? to_string(*x->verdict) + " [" + x->source + "]" : "-";
            std::string result = c.pass ? "pass" : "FAIL";
            if (!c.note.empty()) result += " (" + c.note + ")";
            rows.push_back({e.name, to_string(c.report.condition), c.report.lower + " < " + c.report.upper,
                            format_point(c.report.base), expected, to_string(c.report.verdict), format_real(c.report.c, 4),
                            format_real(c.report.slope, 4), result});
        }
    }
    std::vector<std::size_t> width(rows.front().size(), 0);
    for (const auto& r : rows)
        for (std::size_t k = 0; k < r.size(); ++k) width[k] = std::max(width[k], r[k].size());
    std::ostringstream os;
    for (const auto& r : rows) {
        std::string line;
        for (std::size_t k = 0; k < r.size(); ++k) {
            line += r[k];
            if (k + 1 < r.size()) line += std::string(width[k] - r[k].size() + 2, ' ');
        }
        os << line << "\n";
    }
    int pass = 0;
    for (const auto& e : outcomes) pass += e.pass() ? 1 : 0;
    os << pass << " of " << outcomes.size() << " entries pass\n";
    return os.str();
}

std::string refinement_text(const RefinementState& r)
{
    std::ostringstream os;
    const auto& s = r.scene.strat;
    os << "status: " << to_string(r.status) << "\n";
    os << "rounds: " << r.rounds << "\n";
    os << "level: " << r.level << "\n";
    for (const auto& l : r.log) os << "log: " << l << "\n";
    for (const auto& st : s.strata()) os << "stratum: " << st.name << " dim " << st.dim() << "\n";
    for (const auto& fp : s.frontier()) os << "frontier: " << s.at(fp.lower).name << " < " << s.at(fp.upper).name << "\n";
    for (const auto& p : r.scans)
        os << "scan: " << to_string(p.condition) << " " << p.lower << " < " << p.upper << " base " << p.base_points
           << " failing " << p.failing << " absent " << p.absent << " inconclusive " << p.inconclusive << "\n";
    return os.str();
}

}  // namespace strat
