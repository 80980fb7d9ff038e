//! Minimal SVG line charts for sweep tables.

use std::fmt::Write as _;

use super::sweep::SweepTable;
use crate::config::SweepParameter;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn ticks(lo: f64, hi: f64, log: bool) -> Vec<f64> {
    if log {
        let (a, b) = (lo.floor() as i32, hi.ceil() as i32);
        return (a..=b).map(|e| e as f64).collect();
    }
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(t);
        t += step;
    }
    out
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        format!("1e{}", v as i32)
    } else if v.abs() >= 100.0 || v == v.round() {
        format!("{v:.0}")
    } else {
        format!("{v:.3}").trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

impl Chart {
    pub fn to_svg(&self) -> String {
        let tx = |v: f64| if self.log_x { v.log10() } else { v };
        let ty = |v: f64| if self.log_y { v.log10() } else { v };
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter(|(x, y)| (!self.log_x || *x > 0.0) && (!self.log_y || *y > 0.0))
            .map(|&(x, y)| (tx(x), ty(y)))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        let (mut x0, mut x1, mut y0, mut y1) = pts.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
        );
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if !self.log_y {
            y0 = y0.min(0.0);
        }
        if x1 - x0 < 1e-12 {
            x1 = x0 + 1.0;
        }
        if y1 - y0 < 1e-12 {
            y1 = y0 + 1.0;
        }
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            W / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            svg,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for t in ticks(x0, x1, self.log_x) {
            let x = sx(t);
            let _ = writeln!(
                svg,
                r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                TOP + ph,
                TOP + ph + 16.0,
                tick_label(t, self.log_x)
            );
        }
        for t in ticks(y0, y1, self.log_y) {
            let y = sy(t);
            let _ = writeln!(
                svg,
                r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                LEFT + pw,
                LEFT - 6.0,
                y + 4.0,
                tick_label(t, self.log_y)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            H - 14.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );
        for (k, s) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let path: Vec<String> = s
                .points
                .iter()
                .filter(|(x, y)| (!self.log_x || *x > 0.0) && (!self.log_y || *y > 0.0))
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(tx(x)), sy(ty(y))))
                .collect();
            if path.is_empty() {
                continue;
            }
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                path.join(" ")
            );
            for p in &path {
                let (x, y) = p.split_once(',').unwrap_or(("0", "0"));
                let _ = writeln!(svg, r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#);
            }
            let ly = TOP + 14.0 + 16.0 * k as f64;
            let lx = LEFT + pw - 150.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
                lx + 20.0,
                lx + 26.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

/// Chart in the layout of the matching figure: error in cm for the
/// resolution, exposure and speed sweeps, accuracy for spacing, BER on a
/// log axis for the link sweeps.
pub fn sweep_chart(table: &SweepTable) -> Chart {
    let p = table.parameter();
    let x_label = match p {
        SweepParameter::Resolution => "Image sensor resolution (MP)",
        SweepParameter::Exposure => "Exposure time (s)",
        SweepParameter::FvSpeed => "FV speed (km/h)",
        SweepParameter::SlSpacing => "Distance between streetlights (m)",
        SweepParameter::Sinr => "SINR (dB)",
        SweepParameter::LedPower => "LED power (W)",
    }
    .to_string();
    match table {
        SweepTable::Error { rows, .. } => {
            if p == SweepParameter::SlSpacing {
                return Chart {
                    title: "Localization accuracy".into(),
                    x_label,
                    y_label: "Accuracy (%)".into(),
                    log_x: false,
                    log_y: false,
                    series: vec![Series {
                        label: "accuracy".into(),
                        points: rows.iter().map(|r| (r.value, r.stats.accuracy_percent)).collect(),
                    }],
                };
            }
            Chart {
                title: "Distance measurement error".into(),
                x_label,
                y_label: "Error (cm)".into(),
                log_x: p == SweepParameter::Exposure,
                log_y: false,
                series: vec![
                    Series {
                        label: "maximum".into(),
                        points: rows.iter().map(|r| (r.value, r.stats.maximum_error * 100.0)).collect(),
                    },
                    Series {
                        label: "average".into(),
                        points: rows.iter().map(|r| (r.value, r.stats.average_error * 100.0)).collect(),
                    },
                ],
            }
        }
        SweepTable::Ber { rows, .. } => {
            let mut labels: Vec<f64> = rows.iter().map(|r| r.series).collect();
            labels.dedup();
            let name = |s: f64| match p {
                SweepParameter::LedPower => format!("{s} bps"),
                _ => format!("sigma_c = {s}"),
            };
            Chart {
                title: "Bit error rate".into(),
                x_label,
                y_label: "BER".into(),
                log_x: p == SweepParameter::LedPower,
                log_y: true,
                series: labels
                    .iter()
                    .map(|&s| Series {
                        label: name(s),
                        points: rows
                            .iter()
                            .filter(|r| r.series == s)
                            .map(|r| (r.value, r.ber_analytic))
                            .collect(),
                    })
                    .collect(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::sweep::BerRow;

    #[test]
    fn three_filter_curves_give_three_polylines() {
        let rows = [0.1, 0.5, 1.0]
            .iter()
            .flat_map(|&s| {
                [0.0, 5.0, 10.0].map(|v| BerRow {
                    value: v,
                    series: s,
                    ber_analytic: 0.1 / (1.0 + v + s),
                    ber_monte_carlo: 0.0,
                    bits: 1,
                })
            })
            .collect();
        let svg = sweep_chart(&SweepTable::Ber { parameter: SweepParameter::Sinr, rows }).to_svg();
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn linear_ticks_cover_range() {
        let t = ticks(0.0, 17.5, false);
        assert_eq!(t.first(), Some(&0.0));
        assert!(*t.last().unwrap() <= 17.5 && *t.last().unwrap() >= 15.0);
    }
}
