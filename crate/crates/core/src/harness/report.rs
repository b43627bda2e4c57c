//! CSV and SVG output for sweep results.

use std::fmt::Write as _;
use std::path::Path;

use super::{CellResult, DecoderId, SweepResult};
use crate::{Error, Result};

const HEADER: &str = "decoder,snr_db,symbols,successes,success_rate,ci95,time_ms";

/// CSV text with rows sorted by `(decoder, snr_db)`. The `time_ms` field is
/// empty when timing was not recorded.
pub fn to_csv_string(res: &SweepResult) -> String {
    let mut sorted = res.clone();
    sorted.sort();
    let mut out = String::with_capacity(64 * (sorted.cells.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for c in &sorted.cells {
        let time = c.mean_time_ms.map(|t| format!("{t:.6}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{:.6},{},{},{:.6},{:.6},{}",
            c.decoder,
            c.snr_db,
            c.symbols,
            c.successes,
            c.success_rate(),
            c.ci95(),
            time
        );
    }
    out
}

pub fn write_csv(res: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_csv_string(res))?;
    Ok(())
}

/// Reads a CSV produced by [`to_csv_string`]. Rates and half-widths are
/// recomputed from the counts.
pub fn parse_csv(text: &str) -> Result<SweepResult> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        _ => return Err(Error::Parse { line: 1, msg: "missing or unexpected header".into() }),
    }
    let mut cells = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = raw.split(',').collect();
        if f.len() != 7 {
            return Err(Error::Parse { line, msg: format!("expected 7 fields, got {}", f.len()) });
        }
        let bad = |what: &str| Error::Parse { line, msg: format!("bad {what}") };
        cells.push(CellResult {
            decoder: f[0].parse::<DecoderId>().map_err(|_| bad("decoder"))?,
            snr_db: f[1].parse().map_err(|_| bad("snr_db"))?,
            symbols: f[2].parse().map_err(|_| bad("symbols"))?,
            successes: f[3].parse().map_err(|_| bad("successes"))?,
            nonconverged: 0,
            failures: 0,
            mean_time_ms: if f[6].is_empty() { None } else { Some(f[6].parse().map_err(|_| bad("time_ms"))?) },
        });
    }
    let mut res = SweepResult { cells };
    res.sort();
    Ok(res)
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

/// Success rate against SNR, one polyline per decoder.
pub fn render_svg(res: &SweepResult) -> Result<String> {
    if res.cells.is_empty() {
        return Err(Error::Config("nothing to plot".into()));
    }
    let mut sorted = res.clone();
    sorted.sort();
    let (lo, hi) = sorted
        .cells
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| (lo.min(c.snr_db), hi.max(c.snr_db)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |snr: f64| LEFT + (snr - lo) / span * plot_w;
    let sy = |rate: f64| TOP + (1.0 - rate) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for k in 0..=5 {
        let rate = k as f64 / 5.0;
        let y = sy(rate);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{rate:.1}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let mut snrs: Vec<f64> = sorted.cells.iter().map(|c| c.snr_db).collect();
    snrs.sort_by(f64::total_cmp);
    snrs.dedup();
    for s in &snrs {
        let x = sx(*s);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{s}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 20.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">SNR (dB)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">success rate</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    let mut decoders: Vec<DecoderId> = sorted.cells.iter().map(|c| c.decoder).collect();
    decoders.dedup();
    for (k, d) in decoders.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = sorted
            .cells
            .iter()
            .filter(|c| c.decoder == *d)
            .map(|c| format!("{:.2},{:.2}", sx(c.snr_db), sy(c.success_rate())))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="curve" data-decoder="{d}" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
        let ly = TOP + 20.0 + 20.0 * k as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            svg,
            r#"<g class="legend"><line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{d}</text></g>"#,
            lx + 25.0,
            lx + 32.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn render_plot(res: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, render_svg(res)?)?;
    Ok(())
}
