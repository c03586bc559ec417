//! Presentational SVG output: a station map and simple line charts.

use std::fmt::Write;

use voltsite_core::geo::{Domain, Point};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// One station marker on the map.
#[derive(Debug, Clone)]
pub struct MapStation {
    pub id: String,
    pub location: Point,
    pub wait_h: f64,
    /// Drawn in a second color when true.
    pub added: bool,
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>
"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Stations as circles with area proportional to their mean wait, and
/// substations as small squares. Exactly one `<circle>` per station.
pub fn station_map(title: &str, domain: Domain, stations: &[MapStation], substations: &[Point]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let scale = ((WIDTH - 2.0 * MARGIN) / domain.width()).min((HEIGHT - 2.0 * MARGIN) / domain.height());
    let px = |p: Point| (MARGIN + (p.x - domain.min_x) * scale, HEIGHT - MARGIN - (p.y - domain.min_y) * scale);
    let (x0, y1) = px(Point::new(domain.min_x, domain.min_y));
    let (x1, y0) = px(Point::new(domain.max_x, domain.max_y));
    let _ = writeln!(
        out,
        r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="#f7f7f7" stroke="#444"/>"##,
        x1 - x0,
        y1 - y0
    );
    for s in substations {
        let (x, y) = px(*s);
        let _ = writeln!(out, r##"<rect x="{:.2}" y="{:.2}" width="8" height="8" fill="#555"/>"##, x - 4.0, y - 4.0);
    }
    let max_wait = stations.iter().map(|s| s.wait_h).fold(0.0, f64::max);
    for s in stations {
        let (x, y) = px(s.location);
        let rel = if max_wait > 0.0 { s.wait_h / max_wait } else { 0.0 };
        let r = 4.0 + 16.0 * rel.sqrt();
        let color = if s.added { PALETTE[1] } else { PALETTE[0] };
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r:.2}" fill="{color}" fill-opacity="0.6" stroke="{color}"><title>{} wait {:.3} h</title></circle>"#,
            escape(&s.id),
            s.wait_h
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="{}">circle area ~ mean wait (max {max_wait:.3} h); blue existing, red added</text>"#,
        HEIGHT - 15.0
    );
    out.push_str("</svg>\n");
    out
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Line chart with linear axes fitted to the data.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let all = series.iter().flat_map(|s| s.points.iter()).filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in all {
        xmin = xmin.min(*x);
        xmax = xmax.max(*x);
        ymin = ymin.min(*y);
        ymax = ymax.max(*y);
    }
    if !xmin.is_finite() {
        (xmin, xmax, ymin, ymax) = (0.0, 1.0, 0.0, 1.0);
    }
    if xmax <= xmin {
        xmax = xmin + 1.0;
    }
    if ymax <= ymin {
        ymax = ymin + 1.0;
    }
    let pw = WIDTH - 2.0 * MARGIN;
    let ph = HEIGHT - 2.0 * MARGIN;
    let px = |x: f64, y: f64| (MARGIN + (x - xmin) / (xmax - xmin) * pw, HEIGHT - MARGIN - (y - ymin) / (ymax - ymin) * ph);
    let _ = writeln!(
        out,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##
    );
    for i in 0..=4 {
        let f = f64::from(i) / 4.0;
        let (x, _) = px(xmin + f * (xmax - xmin), ymin);
        let (_, y) = px(xmin, ymin + f * (ymax - ymin));
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
            HEIGHT - MARGIN + 16.0,
            tick_label(xmin + f * (xmax - xmin))
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{y:.2}" text-anchor="end">{}</text>"#,
            MARGIN - 6.0,
            tick_label(ymin + f * (ymax - ymin))
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(x, y)| {
                let (a, b) = px(*x, *y);
                format!("{a:.2},{b:.2}")
            })
            .collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            MARGIN + 8.0,
            MARGIN + 16.0 + 14.0 * i as f64,
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn tick_label(v: f64) -> String {
    if v.abs() >= 100.0 || v == v.round() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// Trailing moving average, used to smooth noisy training curves.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    let mut sum = 0.0;
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            sum += v;
            if i >= w {
                sum -= values[i - w];
            }
            sum / (i + 1).min(w) as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_circle_per_station() {
        let d = Domain::new(0.0, 0.0, 4.0, 4.0);
        let st: Vec<MapStation> = (0..7)
            .map(|i| MapStation {
                id: format!("s{i}"),
                location: Point::new(0.5 * f64::from(i), 1.0),
                wait_h: f64::from(i) * 0.1,
                added: i > 4,
            })
            .collect();
        let svg = station_map("t", d, &st, &[Point::new(2.0, 2.0)]);
        assert_eq!(svg.matches("<circle").count(), 7);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn chart_has_one_polyline_per_series() {
        let s = |n: &str| Series { name: n.into(), points: vec![(1.0, 2.0), (2.0, 1.0)] };
        let svg = line_chart("a<b", "k", "wait", &[s("x"), s("y")]);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a&lt;b"));
        assert_eq!(line_chart("e", "x", "y", &[]).matches("<polyline").count(), 0);
    }

    #[test]
    fn moving_average_window() {
        assert_eq!(moving_average(&[2.0, 4.0, 6.0, 8.0], 2), vec![2.0, 3.0, 5.0, 7.0]);
    }
}
