#include "metacsv/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "metacsv/errors.hpp"

namespace metacsv {

namespace {

std::string num(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    // avoid the "-0.00" artifact so identical inputs render identically
    std::string s(buf);
    if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') {
        s.erase(s.begin());
    }
    return s;
}

std::string px(double value) { return num(value, 2); }

/// Linear data-to-pixel mapping over a fixed pixel span.
struct Scale {
    double lo = 0.0, hi = 1.0;
    double px_lo = 0.0, px_hi = 1.0;
    double operator()(double v) const {
        return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
    }
};

class SvgWriter {
public:
    SvgWriter(int width, int height) : width_(width), height_(height) {
        body_ += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                 std::to_string(width) + "\" height=\"" + std::to_string(height) +
                 "\" viewBox=\"0 0 " + std::to_string(width) + " " +
                 std::to_string(height) + "\" font-family=\"sans-serif\">\n";
        body_ += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) +
                 "\" height=\"" + std::to_string(height) + "\" fill=\"white\"/>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& style) {
        body_ += "<line x1=\"" + px(x1) + "\" y1=\"" + px(y1) + "\" x2=\"" + px(x2) +
                 "\" y2=\"" + px(y2) + "\" " + style + "/>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& style) {
        body_ += "<rect x=\"" + px(x) + "\" y=\"" + px(y) + "\" width=\"" + px(w) +
                 "\" height=\"" + px(h) + "\" " + style + "/>\n";
    }

    void circle(double cx, double cy, double r, const std::string& style) {
        body_ += "<circle cx=\"" + px(cx) + "\" cy=\"" + px(cy) + "\" r=\"" + px(r) +
                 "\" " + style + "/>\n";
    }

    void polygon(const std::vector<std::pair<double, double>>& pts,
                 const std::string& style) {
        body_ += "<polygon points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i) body_ += ' ';
            body_ += px(pts[i].first) + "," + px(pts[i].second);
        }
        body_ += "\" " + style + "/>\n";
    }

    void text(double x, double y, const std::string& content, const std::string& style) {
        body_ += "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" " + style + ">" +
                 xml_escape(content) + "</text>\n";
    }

    SvgDocument finish() {
        body_ += "</svg>\n";
        return SvgDocument{width_, height_, std::move(body_)};
    }

private:
    int width_;
    int height_;
    std::string body_;
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    void include(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad(double fraction) {
        const double span = hi - lo;
        lo -= span * fraction;
        hi += span * fraction;
        if (hi <= lo) {  // degenerate, all values identical at zero
            lo -= 1.0;
            hi += 1.0;
        }
    }
};

void x_axis(SvgWriter& svg, const Scale& x, double y, int ticks, int decimals) {
    svg.line(x.px_lo, y, x.px_hi, y, "stroke=\"#333\" stroke-width=\"1\"");
    for (int i = 0; i < ticks; ++i) {
        const double v = x.lo + (x.hi - x.lo) * i / (ticks - 1);
        const double xp = x(v);
        svg.line(xp, y, xp, y + 4, "stroke=\"#333\" stroke-width=\"1\"");
        svg.text(xp, y + 16, num(v, decimals),
                 "font-size=\"10\" fill=\"#333\" text-anchor=\"middle\"");
    }
}

void y_axis(SvgWriter& svg, const Scale& y, double x, int ticks, int decimals) {
    svg.line(x, y.px_lo, x, y.px_hi, "stroke=\"#333\" stroke-width=\"1\"");
    for (int i = 0; i < ticks; ++i) {
        const double v = y.lo + (y.hi - y.lo) * i / (ticks - 1);
        const double yp = y(v);
        svg.line(x - 4, yp, x, yp, "stroke=\"#333\" stroke-width=\"1\"");
        svg.text(x - 6, yp + 3, num(v, decimals),
                 "font-size=\"10\" fill=\"#333\" text-anchor=\"end\"");
    }
}

std::string effect_ci_text(double effect, double lo, double hi) {
    return num(effect, 3) + " [" + num(lo, 3) + ", " + num(hi, 3) + "]";
}

}  // namespace

std::string xml_escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

MassPoint mass_point(const MetaAnalysisResult& result, std::string label) {
    MassPoint point;
    point.label = std::move(label);
    point.effect = result.random.effect;
    point.se = result.random.se;
    point.n_total = result.random.n_total;
    point.significant = std::fabs(point.effect) >= kCritical95 * point.se;
    return point;
}

SvgDocument forest_svg(const MetaAnalysisResult& result) {
    const auto& estimates = result.estimates;
    const std::size_t k = estimates.size();
    const int width = 800;
    const int height = 28 * (static_cast<int>(k) + 2) + 80;

    // Random-model weight shares size the study squares.
    std::vector<double> share(k);
    {
        double sum_w = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            share[i] = 1.0 / (estimates[i].variance + result.heterogeneity.tau2);
            sum_w += share[i];
        }
        for (auto& s : share) s /= sum_w;
    }

    Range range;
    range.include(0.0);
    for (const auto& est : estimates) {
        const double half = kCritical95 * std::sqrt(est.variance);
        range.include(est.effect - half);
        range.include(est.effect + half);
    }
    range.include(result.fixed.ci_low);
    range.include(result.fixed.ci_high);
    range.include(result.random.ci_low);
    range.include(result.random.ci_high);
    range.pad(0.10);

    const double plot_left = 310.0;
    const double plot_right = 610.0;
    const Scale x{range.lo, range.hi, plot_left, plot_right};

    SvgWriter svg(width, height);
    const double top = 36.0;
    const double row_h = 28.0;
    const double rows_bottom = top + row_h * (static_cast<double>(k) + 2.0);

    if (result.title) {
        svg.text(10, 20, *result.title, "font-size=\"14\" fill=\"#111\" font-weight=\"bold\"");
    }

    svg.line(x(0.0), top - 6, x(0.0), rows_bottom + 4,
             "stroke=\"#999\" stroke-width=\"1\" stroke-dasharray=\"4,3\"");

    for (std::size_t i = 0; i < k; ++i) {
        const auto& est = estimates[i];
        const double cy = top + row_h * static_cast<double>(i) + row_h / 2.0;
        const double se = std::sqrt(est.variance);
        const double lo = est.effect - kCritical95 * se;
        const double hi = est.effect + kCritical95 * se;
        svg.line(x(lo), cy, x(hi), cy, "stroke=\"#444\" stroke-width=\"1.2\" class=\"ci\"");
        const double side = 4.0 + 12.0 * share[i];
        svg.rect(x(est.effect) - side / 2.0, cy - side / 2.0, side, side,
                 "fill=\"#4682b4\" class=\"study\"");
        svg.text(10, cy + 4, est.study_label, "font-size=\"12\" fill=\"#111\"");
        svg.text(790, cy + 4, effect_ci_text(est.effect, lo, hi),
                 "font-size=\"12\" fill=\"#111\" text-anchor=\"end\"");
    }

    const auto diamond_row = [&](const PooledResult& pooled, std::size_t row,
                                 const char* name, const char* fill) {
        const double cy = top + row_h * static_cast<double>(row) + row_h / 2.0;
        svg.polygon({{x(pooled.ci_low), cy},
                     {x(pooled.effect), cy - 8.0},
                     {x(pooled.ci_high), cy},
                     {x(pooled.effect), cy + 8.0}},
                    std::string("fill=\"") + fill + "\" class=\"pooled\"");
        svg.text(10, cy + 4, name, "font-size=\"12\" fill=\"#111\" font-weight=\"bold\"");
        svg.text(790, cy + 4, effect_ci_text(pooled.effect, pooled.ci_low, pooled.ci_high),
                 "font-size=\"12\" fill=\"#111\" text-anchor=\"end\"");
    };
    diamond_row(result.fixed, k, "Fixed effect", "#2f6f9f");
    diamond_row(result.random, k + 1, "Random effects (DL)", "#8c5f9e");

    x_axis(svg, x, rows_bottom + 10, 5, 2);

    const auto& het = result.heterogeneity;
    svg.text(10, rows_bottom + 40,
             "Q=" + num(het.q, 2) + " (df=" + std::to_string(het.df) +
                 ", p=" + num(het.p_q, 4) + "), I2=" + num(het.i2, 1) +
                 "%, tau2=" + num(het.tau2, 3),
             "font-size=\"11\" fill=\"#333\" class=\"heterogeneity\"");

    return svg.finish();
}

SvgDocument funnel_svg(const MetaAnalysisResult& result) {
    const int width = 640;
    const int height = 480;
    const auto& estimates = result.estimates;

    double se_max = 0.0;
    for (const auto& est : estimates) {
        se_max = std::max(se_max, std::sqrt(est.variance));
    }
    const double se_top = se_max * 1.1;
    const double mu = result.fixed.effect;

    Range range;
    range.lo = range.hi = mu;
    for (const auto& est : estimates) range.include(est.effect);
    range.include(mu - kCritical95 * se_top);
    range.include(mu + kCritical95 * se_top);
    range.pad(0.08);

    const Scale x{range.lo, range.hi, 60.0, 620.0};
    const Scale y{0.0, se_top, 24.0, 430.0};  // inverted: se = 0 at the top

    SvgWriter svg(width, height);
    if (result.title) {
        svg.text(60, 14, *result.title, "font-size=\"12\" fill=\"#111\" font-weight=\"bold\"");
    }

    // pseudo-95% funnel, meeting at se = 0
    svg.line(x(mu), y(0.0), x(mu - kCritical95 * se_top), y(se_top),
             "stroke=\"#999\" stroke-width=\"1\" stroke-dasharray=\"5,4\" class=\"funnel-bound\"");
    svg.line(x(mu), y(0.0), x(mu + kCritical95 * se_top), y(se_top),
             "stroke=\"#999\" stroke-width=\"1\" stroke-dasharray=\"5,4\" class=\"funnel-bound\"");
    svg.line(x(mu), y(0.0), x(mu), y(se_top),
             "stroke=\"#4682b4\" stroke-width=\"1\" class=\"pooled-line\"");

    for (const auto& est : estimates) {
        svg.circle(x(est.effect), y(std::sqrt(est.variance)), 4.0,
                   "fill=\"#333\" fill-opacity=\"0.75\" class=\"study\"");
    }

    x_axis(svg, x, 440, 5, 2);
    y_axis(svg, y, 60, 5, 3);
    svg.text(340, 470, "effect", "font-size=\"11\" fill=\"#333\" text-anchor=\"middle\"");
    svg.text(12, 230, "standard error", "font-size=\"11\" fill=\"#333\" "
             "transform=\"rotate(-90 12 230)\" text-anchor=\"middle\"");

    return svg.finish();
}

SvgDocument labbe_mass_svg(const std::vector<MassPoint>& points) {
    if (points.empty()) {
        throw Error(errc::empty_input, "no points for the aggregate plot");
    }
    const int width = 640;
    const int height = 480;

    double se_max = 0.0;
    for (const auto& p : points) se_max = std::max(se_max, p.se);
    const double se_top = se_max * 1.15;

    Range range;
    range.include(0.0);
    for (const auto& p : points) range.include(p.effect);
    range.include(-kCritical95 * se_top);
    range.include(kCritical95 * se_top);
    range.pad(0.08);

    const Scale x{range.lo, range.hi, 60.0, 620.0};
    const Scale y{0.0, se_top, 430.0, 24.0};  // se grows upward

    SvgWriter svg(width, height);

    // 0.05-significance boundary: |effect| = 1.959964 * se
    svg.line(x(0.0), y(0.0), x(-kCritical95 * se_top), y(se_top),
             "stroke=\"#888\" stroke-width=\"1\" stroke-dasharray=\"5,4\" class=\"sig-bound\"");
    svg.line(x(0.0), y(0.0), x(kCritical95 * se_top), y(se_top),
             "stroke=\"#888\" stroke-width=\"1\" stroke-dasharray=\"5,4\" class=\"sig-bound\"");

    for (const auto& p : points) {
        const double r = std::clamp(0.75 * std::sqrt(static_cast<double>(p.n_total)),
                                    3.0, 20.0);
        const char* fill = p.significant ? "#c0392b" : "#4682b4";
        svg.circle(x(p.effect), y(p.se), r,
                   std::string("fill=\"") + fill +
                       "\" fill-opacity=\"0.75\" class=\"mass-point\"");
        svg.text(x(p.effect) + r + 2.0, y(p.se) + 3.0, p.label,
                 "font-size=\"9\" fill=\"#333\"");
    }

    x_axis(svg, x, 440, 5, 2);
    y_axis(svg, y, 60, 5, 3);
    svg.text(340, 470, "effect size", "font-size=\"11\" fill=\"#333\" text-anchor=\"middle\"");
    svg.text(12, 230, "standard error (random model)",
             "font-size=\"11\" fill=\"#333\" transform=\"rotate(-90 12 230)\" "
             "text-anchor=\"middle\"");

    return svg.finish();
}

}  // namespace metacsv
