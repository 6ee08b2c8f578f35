//! Static SVG bar charts and the summary page.
//!
//! Charts are assembled as plain SVG text with fixed layout constants and
//! one-decimal coordinates, so a given set of metrics documents always
//! renders to identical bytes. Each bar carries `data-*` attributes, which
//! keeps the output both styleable and assertable in tests.

use crate::metrics::MetricsDoc;
use std::fmt::Write as _;

const BAR_WIDTH: f64 = 30.0;
const BAR_GAP: f64 = 6.0;
const GROUP_GAP: f64 = 34.0;
const PLOT_HEIGHT: f64 = 260.0;
const MARGIN_LEFT: f64 = 52.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 42.0;
const MARGIN_RIGHT: f64 = 16.0;

const CONFIDENCE_SERIES: [(&str, &str); 4] = [
    ("high", "#2f6fb2"),
    ("medium", "#8fb7dd"),
    ("low", "#e0a840"),
    ("unstated", "#b5b5b5"),
];

const METRIC_SERIES: [(&str, &str); 4] = [
    ("recall", "#2f6fb2"),
    ("specificity", "#4f9d69"),
    ("rejected", "#b5b5b5"),
    ("accuracy", "#e0a840"),
];

struct Bar {
    series: &'static str,
    color: &'static str,
    /// Percent in [0, 100], or None for an undefined value.
    percent: Option<f64>,
}

struct Group {
    label: String,
    bars: Vec<Bar>,
}

fn esc(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn render_chart(title: &str, chart_class: &str, groups: &[Group]) -> String {
    let bars_per_group = groups.iter().map(|g| g.bars.len()).max().unwrap_or(0);
    let group_width =
        bars_per_group as f64 * BAR_WIDTH + (bars_per_group.saturating_sub(1)) as f64 * BAR_GAP;
    let width = MARGIN_LEFT + groups.len() as f64 * (group_width + GROUP_GAP) + MARGIN_RIGHT;
    let height = MARGIN_TOP + PLOT_HEIGHT + MARGIN_BOTTOM;
    let baseline = MARGIN_TOP + PLOT_HEIGHT;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" class=\"{chart_class}\" \
         font-family=\"sans-serif\" font-size=\"11\">"
    );
    let _ = writeln!(
        svg,
        "  <rect x=\"0\" y=\"0\" width=\"{width:.0}\" height=\"{height:.0}\" fill=\"#ffffff\"/>"
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{:.1}\" y=\"20\" font-size=\"14\" font-weight=\"bold\">{}</text>",
        MARGIN_LEFT,
        esc(title)
    );

    // Horizontal gridlines every 20%.
    for tick in (0..=5).map(|i| i * 20) {
        let y = baseline - PLOT_HEIGHT * f64::from(tick) / 100.0;
        let _ = writeln!(
            svg,
            "  <line x1=\"{MARGIN_LEFT:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>",
            width - MARGIN_RIGHT
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" fill=\"#555555\">{tick}</text>",
            MARGIN_LEFT - 6.0,
            y + 4.0
        );
    }

    let mut x = MARGIN_LEFT + GROUP_GAP / 2.0;
    for group in groups {
        let _ = writeln!(
            svg,
            "  <g class=\"group\" data-group=\"{}\">",
            esc(&group.label)
        );
        let mut bar_x = x;
        for bar in &group.bars {
            match bar.percent {
                Some(pct) => {
                    let clamped = pct.clamp(0.0, 100.0);
                    let bar_h = PLOT_HEIGHT * clamped / 100.0;
                    let y = baseline - bar_h;
                    let _ = writeln!(
                        svg,
                        "    <rect class=\"bar\" data-series=\"{}\" data-value=\"{pct:.1}\" \
                         x=\"{bar_x:.1}\" y=\"{y:.1}\" width=\"{BAR_WIDTH:.1}\" \
                         height=\"{bar_h:.1}\" fill=\"{}\"/>",
                        bar.series, bar.color
                    );
                    let _ = writeln!(
                        svg,
                        "    <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" \
                         fill=\"#333333\">{pct:.0}</text>",
                        bar_x + BAR_WIDTH / 2.0,
                        y - 3.0
                    );
                }
                None => {
                    let _ = writeln!(
                        svg,
                        "    <text class=\"undefined\" data-series=\"{}\" x=\"{:.1}\" \
                         y=\"{:.1}\" text-anchor=\"middle\" fill=\"#888888\">—</text>",
                        bar.series,
                        bar_x + BAR_WIDTH / 2.0,
                        baseline - 4.0
                    );
                }
            }
            bar_x += BAR_WIDTH + BAR_GAP;
        }
        let _ = writeln!(
            svg,
            "    <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"12\">{}</text>",
            x + group_width / 2.0,
            baseline + 16.0,
            esc(&group.label)
        );
        let _ = svg.write_str("  </g>\n");
        x += group_width + GROUP_GAP;
    }

    // Legend along the top edge.
    let series: Vec<(&str, &str)> = groups
        .first()
        .map(|g| g.bars.iter().map(|b| (b.series, b.color)).collect())
        .unwrap_or_default();
    let mut lx = MARGIN_LEFT;
    for (name, color) in series {
        let _ = writeln!(
            svg,
            "  <rect x=\"{lx:.1}\" y=\"28\" width=\"10\" height=\"10\" fill=\"{color}\"/>"
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{:.1}\" y=\"37\" fill=\"#333333\">{name}</text>",
            lx + 14.0
        );
        lx += 14.0 + 7.0 * name.len() as f64 + 18.0;
    }

    let _ = writeln!(
        svg,
        "  <line x1=\"{MARGIN_LEFT:.1}\" y1=\"{baseline:.1}\" x2=\"{:.1}\" y2=\"{baseline:.1}\" \
         stroke=\"#333333\" stroke-width=\"1\"/>",
        width - MARGIN_RIGHT
    );
    svg.push_str("</svg>\n");
    svg
}

/// Correct detections for one class, split by confidence level, one group
/// per dataset. Shares are percentages of that class's correct detections.
pub fn confidence_chart(class: &str, docs: &[MetricsDoc]) -> String {
    let title = format!("Correct {} detections by confidence level (%)", class);
    let groups: Vec<Group> = docs
        .iter()
        .map(|doc| {
            let breakdown = doc.confidence_breakdown.get(class).and_then(Option::as_ref);
            let bars = CONFIDENCE_SERIES
                .iter()
                .map(|(series, color)| Bar {
                    series,
                    color,
                    percent: breakdown
                        .map(|b| b.shares.get(*series).copied().unwrap_or(0.0) * 100.0),
                })
                .collect();
            Group {
                label: doc.label.clone(),
                bars,
            }
        })
        .collect();
    render_chart(&title, &format!("confidence-chart-{class}"), &groups)
}

/// Headline metrics per dataset: recall, specificity, rejected, accuracy.
pub fn comparison_chart(docs: &[MetricsDoc]) -> String {
    let groups: Vec<Group> = docs
        .iter()
        .map(|doc| {
            let rate = |r: &Option<crate::metrics::RateDoc>| r.as_ref().map(|r| r.percent);
            let values = [
                rate(&doc.recall),
                rate(&doc.specificity),
                rate(&doc.rejection_rate),
                rate(&doc.accuracy),
            ];
            let bars = METRIC_SERIES
                .iter()
                .zip(values)
                .map(|((series, color), percent)| Bar {
                    series,
                    color,
                    percent,
                })
                .collect();
            Group {
                label: doc.label.clone(),
                bars,
            }
        })
        .collect();
    render_chart(
        "Performance metrics by dataset (%)",
        "comparison-chart",
        &groups,
    )
}

/// Summary page linking the charts and tabulating the headline numbers.
pub fn summary_page(docs: &[MetricsDoc]) -> String {
    let mut html = String::from(
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n\
         <title>Evaluation report</title>\n\
         <style>body{font-family:sans-serif;margin:24px}table{border-collapse:collapse}\
         td,th{border:1px solid #999;padding:4px 10px;text-align:right}\
         th:first-child,td:first-child{text-align:left}</style>\n</head>\n<body>\n\
         <h1>Evaluation report</h1>\n<table>\n<tr><th>Dataset</th><th>Recall</th>\
         <th>Specificity</th><th>Rejected</th><th>Accuracy</th></tr>\n",
    );
    let cell = |r: &Option<crate::metrics::RateDoc>| {
        r.as_ref()
            .map(|r| r.display.clone())
            .unwrap_or_else(|| "—".to_string())
    };
    for doc in docs {
        let _ = writeln!(
            html,
            "<tr><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>",
            esc(&doc.label),
            cell(&doc.recall),
            cell(&doc.specificity),
            cell(&doc.rejection_rate),
            cell(&doc.accuracy),
        );
    }
    html.push_str(
        "</table>\n<h2>Charts</h2>\n\
         <p><img src=\"comparison.svg\" alt=\"metrics comparison\"></p>\n\
         <p><img src=\"confidence_real.svg\" alt=\"real detections by confidence\"></p>\n\
         <p><img src=\"confidence_fake.svg\" alt=\"fake detections by confidence\"></p>\n\
         </body>\n</html>\n",
    );
    html
}
