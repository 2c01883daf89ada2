//! CSV, JSON and SVG renderings of a [`SweepResult`], each embedding the [`RunSpec`].

use std::fmt::Write;

use gi_core::optimizer::{SweepFailure, SweepMeta, SweepPoint, SweepResult};
use serde::{Deserialize, Serialize};

use crate::spec::{Format, RunSpec};

pub fn emit(result: &SweepResult, spec: &RunSpec, format: Format) -> Vec<u8> {
    match format {
        Format::Csv => csv(result, spec),
        Format::Json => json(result, spec),
        Format::Svg => svg(result, spec),
    }
    .into_bytes()
}

fn spec_json(spec: &RunSpec) -> String {
    serde_json::to_string(spec).expect("RunSpec serializes")
}

/// 17 significant digits, enough to round-trip any `f64`.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv(result: &SweepResult, spec: &RunSpec) -> String {
    let mut s = String::new();
    writeln!(s, "# run_spec {}", spec_json(spec)).unwrap();
    writeln!(s, "# label {} eta {}", result.meta.label, num(result.meta.eta)).unwrap();
    for f in &result.failures {
        writeln!(s, "# failed n_tot {}: {}", num(f.n_tot), f.message.replace('\n', " ")).unwrap();
    }
    let mut header = vec!["n_tot".to_string(), "value".to_string()];
    header.extend(result.meta.param_names.iter().cloned());
    writeln!(s, "{}", header.join(",")).unwrap();
    for p in &result.points {
        let mut row = vec![num(p.n_tot), num(p.value)];
        row.extend(p.params.iter().map(|&x| num(x)));
        writeln!(s, "{}", row.join(",")).unwrap();
    }
    s
}

#[derive(Serialize, Deserialize)]
struct JsonMeta {
    #[serde(flatten)]
    sweep: SweepMeta,
    run_spec: RunSpec,
}

#[derive(Serialize, Deserialize)]
struct JsonDoc {
    meta: JsonMeta,
    points: Vec<SweepPoint>,
    failures: Vec<SweepFailure>,
}

fn json(result: &SweepResult, spec: &RunSpec) -> String {
    let doc = JsonDoc {
        meta: JsonMeta {
            sweep: result.meta.clone(),
            run_spec: spec.clone(),
        },
        points: result.points.clone(),
        failures: result.failures.clone(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("result serializes");
    s.push('\n');
    s
}

/// Inverse of the JSON emitter.
pub fn parse_json(bytes: &[u8]) -> serde_json::Result<(SweepResult, RunSpec)> {
    let doc: JsonDoc = serde_json::from_slice(bytes)?;
    Ok((
        SweepResult {
            meta: doc.meta.sweep,
            points: doc.points,
            failures: doc.failures,
        },
        doc.meta.run_spec,
    ))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 110.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

/// Plotted quantity: the sensitivity itself, or the bound `1/sqrt(H)` for QFI sweeps.
fn plotted(result: &SweepResult) -> (Vec<(f64, f64)>, &'static str) {
    let qfi = result.meta.label.starts_with("qfi");
    let pts = result
        .points
        .iter()
        .map(|p| (p.n_tot, if qfi { 1.0 / p.value.sqrt() } else { p.value }))
        .filter(|&(n, v)| n > 0.0 && v > 0.0 && v.is_finite())
        .collect();
    (pts, if qfi { "1/sqrt(H)" } else { "S" })
}

fn svg(result: &SweepResult, spec: &RunSpec) -> String {
    let (data, y_label) = plotted(result);
    let (n_lo, n_hi) = match (data.first(), data.last()) {
        (Some(a), Some(b)) if b.0 > a.0 => (a.0, b.0),
        (Some(a), _) => (a.0 / 10.0, a.0 * 10.0),
        _ => spec.ntot.map(|g| (g.lo, g.hi.max(g.lo * 10.0))).unwrap_or((1.0, 10.0)),
    };
    let shot = |n: f64| 1.0 / n.sqrt();
    let heis = |n: f64| 1.0 / n;
    let ys = data
        .iter()
        .map(|p| p.1)
        .chain([shot(n_lo), shot(n_hi), heis(n_lo), heis(n_hi)]);
    let (y_lo, y_hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| (lo.min(y), hi.max(y)));
    let (x0, x1) = (n_lo.log10().floor(), n_hi.log10().ceil().max(n_lo.log10().floor() + 1.0));
    let (y0, y1) = (y_lo.log10().floor(), y_hi.log10().ceil().max(y_lo.log10().floor() + 1.0));
    let px = |n: f64| LEFT + (n.log10() - x0) / (x1 - x0) * (WIDTH - LEFT - RIGHT);
    let py = |y: f64| HEIGHT - BOTTOM - (y.log10() - y0) / (y1 - y0) * (HEIGHT - TOP - BOTTOM);
    let polyline = |pts: &[(f64, f64)]| -> String {
        pts.iter().map(|&(n, y)| format!("{:.3},{:.3}", px(n), py(y))).collect::<Vec<_>>().join(" ")
    };
    let reference = |f: &dyn Fn(f64) -> f64| -> Vec<(f64, f64)> {
        (0..=32)
            .map(|i| {
                let n = 10f64.powf(n_lo.log10() + (n_hi.log10() - n_lo.log10()) * i as f64 / 32.0);
                (n, f(n))
            })
            .collect()
    };

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, "<title>{} sweep, eta = {}</title>", escape(&result.meta.label), result.meta.eta).unwrap();
    writeln!(s, "<desc>{}</desc>", escape(&spec_json(spec))).unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    let (bx0, by0, bx1, by1) = (LEFT, TOP, WIDTH - RIGHT, HEIGHT - BOTTOM);
    writeln!(
        s,
        r#"<rect x="{bx0}" y="{by0}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        bx1 - bx0,
        by1 - by0
    )
    .unwrap();
    for k in x0 as i32..=x1 as i32 {
        let x = px(10f64.powi(k));
        writeln!(s, r#"<line x1="{x:.3}" y1="{by1}" x2="{x:.3}" y2="{:.3}" stroke="black"/>"#, by1 + 5.0).unwrap();
        writeln!(s, r#"<text x="{x:.3}" y="{:.3}" text-anchor="middle">1e{k}</text>"#, by1 + 20.0).unwrap();
    }
    for k in y0 as i32..=y1 as i32 {
        let y = py(10f64.powi(k));
        writeln!(s, r#"<line x1="{:.3}" y1="{y:.3}" x2="{bx0}" y2="{y:.3}" stroke="black"/>"#, bx0 - 5.0).unwrap();
        writeln!(s, r#"<text x="{:.3}" y="{:.3}" text-anchor="end">1e{k}</text>"#, bx0 - 8.0, y + 4.0).unwrap();
    }
    writeln!(s, r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">N_tot</text>"#, (bx0 + bx1) / 2.0, HEIGHT - 15.0).unwrap();
    writeln!(
        s,
        r#"<text x="20" y="{:.3}" text-anchor="middle" transform="rotate(-90 20 {:.3})">{y_label}</text>"#,
        (by0 + by1) / 2.0,
        (by0 + by1) / 2.0
    )
    .unwrap();

    let shot_pts = reference(&shot);
    let heis_pts = reference(&heis);
    writeln!(s, r#"<polyline fill="none" stroke="gray" stroke-dasharray="6 4" points="{}"/>"#, polyline(&shot_pts)).unwrap();
    writeln!(s, r#"<polyline fill="none" stroke="gray" stroke-dasharray="2 3" points="{}"/>"#, polyline(&heis_pts)).unwrap();
    writeln!(s, r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#, polyline(&data)).unwrap();
    let (ln, ly) = shot_pts[shot_pts.len() - 1];
    writeln!(s, r#"<text x="{:.3}" y="{:.3}">shot noise</text>"#, px(ln) + 6.0, py(ly) + 4.0).unwrap();
    let (ln, ly) = heis_pts[heis_pts.len() - 1];
    writeln!(s, r#"<text x="{:.3}" y="{:.3}">Heisenberg</text>"#, px(ln) + 6.0, py(ly) + 4.0).unwrap();
    writeln!(s, "</svg>").unwrap();
    s
}
